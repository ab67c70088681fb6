#include <nrsec/ue.hpp>

#include <algorithm>

namespace nrsec::ue
{

using json = sim::json;

bool UsimProfile::plmn_allowed(const std::string &plmn) const
{
    if (forbidden_plmns.count(plmn))
        return false;
    return plmn == hplmn || std::find(preferred_plmns.begin(), preferred_plmns.end(), plmn) != preferred_plmns.end();
}

const char *to_string(Mode m)
{
    switch (m)
    {
    case Mode::Off:
        return "off";
    case Mode::Scanning:
        return "scanning";
    case Mode::Camped:
        return "camped";
    case Mode::Connecting:
        return "connecting";
    case Mode::Connected:
        return "connected";
    case Mode::HandoverInProgress:
        return "handover_in_progress";
    case Mode::Barred:
        return "barred";
    }
    return "?";
}

std::optional<Mode> mode_from_string(const std::string &s)
{
    for (auto m : {Mode::Off, Mode::Scanning, Mode::Camped, Mode::Connecting, Mode::Connected,
                   Mode::HandoverInProgress, Mode::Barred})
        if (s == to_string(m))
            return m;
    return std::nullopt;
}

bool transition_allowed(Mode from, Mode to)
{
    switch (from)
    {
    case Mode::Off:
        return to == Mode::Scanning;
    case Mode::Scanning:
        return to == Mode::Camped;
    case Mode::Camped:
        return to == Mode::Connecting || to == Mode::Barred || to == Mode::Scanning;
    case Mode::Connecting:
        return to == Mode::Connected || to == Mode::Camped || to == Mode::Scanning;
    case Mode::Connected:
        return to == Mode::HandoverInProgress || to == Mode::Camped || to == Mode::Scanning;
    case Mode::HandoverInProgress:
        return to == Mode::Connected || to == Mode::Scanning;
    case Mode::Barred:
        return to == Mode::Scanning;
    }
    return false;
}

Selection power_on_and_select(const UsimProfile &profile, const std::vector<radio::DecodedFrame> &decoded,
                              const std::function<bool(const radio::DecodedFrame &)> &accept)
{
    Selection out;
    const radio::DecodedFrame *best = nullptr;
    for (const auto &d : decoded)
    {
        if (!d.frame.sib1 || !profile.plmn_allowed(d.frame.sib1->plmn_id) || (accept && !accept(d)))
        {
            out.rejected.push_back(d.frame.pci);
            continue;
        }
        if (d.frame.mib.cell_barred)
        {
            out.barred.push_back(d.frame.pci);
            continue;
        }
        if (!best || d.power_dbm > best->power_dbm ||
            (d.power_dbm == best->power_dbm && d.frame.pci < best->frame.pci))
            best = &d;
    }
    if (best)
        out.pci = best->frame.pci;
    return out;
}

bool check_tracking_area(const std::vector<std::uint32_t> &tal, const radio::Sib1 &sib1)
{
    return std::find(tal.begin(), tal.end(), sib1.tac) == tal.end();
}

std::pair<wire::RegistrationRequest, bool> build_registration_request(const UsimProfile &profile,
                                                                       const RegistrationInputs &in)
{
    wire::RegistrationRequest req;
    req.type = in.type;
    if (in.concealment)
        req.identity = kh::conceal_supi(profile.supi, in.home_public_key, in.home_key_id, in.ephemeral);
    else
        req.identity = profile.supi;
    const bool has_ctx = in.ctx && in.ctx->valid();
    req.ksi = has_ctx ? in.ctx->ksi : kh::kKsiNoContext;
    if (in.guti)
    {
        req.guti = in.guti;
        req.prev_amf = in.guti->amf_id;
    }
    return {req, has_ctx};
}

ChallengeReply respond_to_challenge(UsimProfile &profile, const Rand128 &rand, const kh::Autn &autn,
                                    std::string_view sn_name, std::uint8_t ksi)
{
    auto outcome = kh::verify_autn(profile.k, profile.sqn_ue, rand, autn);
    if (auto *ok = std::get_if<kh::AkaSuccess>(&outcome))
    {
        profile.sqn_ue = ok->sqn;
        auto res_star = kh::compute_res_star(ok->res, ok->ck, ok->ik, sn_name);
        auto k_ausf = kh::derive_k_ausf(ok->ck, ok->ik, sn_name);
        auto keys = kh::derive_serving_keys(k_ausf, sn_name, profile.supi);
        return {wire::AuthenticationResponse{res_star}, outcome,
                kh::SecurityContext::establish(ksi, keys, ok->sqn)};
    }
    auto cause = std::holds_alternative<kh::SyncFailure>(outcome) ? wire::AuthFailureCause::SyncFailure
                                                                  : wire::AuthFailureCause::MacFailure;
    return {wire::AuthenticationFailure{cause}, outcome, std::nullopt};
}

bool is_paging_occasion(std::uint32_t tmsi, Tick now, Tick cycle)
{
    return now % cycle == tmsi % cycle;
}

namespace
{

std::pair<std::string, std::uint64_t> split_token(const std::string &token)
{
    auto colon = token.find(':');
    if (colon == std::string::npos)
        return {token, 0};
    return {token.substr(0, colon), std::stoull(token.substr(colon + 1))};
}

json keys_json(const kh::AsKeys &k)
{
    return json{{"k_gnb", to_hex(k.k_gnb)}, {"rrc_enc", to_hex(k.rrc_cipher)}, {"rrc_int", to_hex(k.rrc_integrity)}};
}

} // namespace

UeEntity::UeEntity(UeConfig cfg, std::uint64_t seed) : Entity(cfg.spec.id, seed), cfg_(std::move(cfg)) {}

void UeEntity::set_mode(sim::Simulation &sim, Mode next, const std::string &reason)
{
    if (next == mode_)
        return;
    json j{{"from", to_string(mode_)}, {"to", to_string(next)}, {"reason", reason}};
    if (serving_pci_)
        j["pci"] = *serving_pci_;
    if (c_rnti_)
        j["c_rnti"] = *c_rnti_;
    sim.trace(id(), "ue_state", std::move(j));
    mode_ = next;
}

void UeEntity::drop_connection()
{
    c_rnti_.reset();
    as_keys_.reset();
    pending_as_keys_.reset();
    ra_.phase = RaPhase::Idle;
    ++ra_gen_;
}

std::string UeEntity::sn_name() const
{
    return sim::default_sn_name(serving_sib1_ ? serving_sib1_->plmn_id : cfg_.profile.hplmn);
}

void UeEntity::scan(sim::Simulation &sim, const std::vector<radio::DecodedFrame> &decoded)
{
    std::function<bool(const radio::DecodedFrame &)> accept;
    const auto &tss_cfg = sim.tss();
    if (tss_cfg.enabled && tss_cfg.ue_verify)
    {
        // Experimental acquisition-time check with a pre-shared secret.
        accept = [&](const radio::DecodedFrame &d) {
            radio::ReportEntry e{d.frame.pci, d.power_dbm, d.frame.tss, d.frame.origin};
            return tss::verify_entry(tss_cfg, e, sim.now()) == tss::Verdict::Accept;
        };
    }
    auto sel = power_on_and_select(cfg_.profile, decoded, accept);
    if (sel.barred != last_barred_)
    {
        if (!sel.barred.empty())
            sim.trace(id(), "cell_barred_skipped", json{{"pcis", sel.barred}});
        last_barred_ = sel.barred;
    }
    if (!sel.pci)
        return;
    for (const auto &d : decoded)
    {
        if (d.frame.pci != *sel.pci)
            continue;
        serving_pci_ = d.frame.pci;
        serving_sib1_ = d.frame.sib1;
        sim.trace(id(), "camp",
                  json{{"pci", d.frame.pci},
                       {"power_dbm", d.power_dbm},
                       {"plmn", d.frame.sib1->plmn_id},
                       {"tac", d.frame.sib1->tac}});
        set_mode(sim, Mode::Camped, "cell_selected");
        break;
    }
    last_barred_.clear();
}

void UeEntity::on_ssb(sim::Simulation &sim, const std::vector<radio::DecodedFrame> &decoded,
                      const std::vector<radio::CellMeasurement> &measured)
{
    auto serving = [&]() -> const radio::DecodedFrame * {
        if (!serving_pci_)
            return nullptr;
        for (const auto &d : decoded)
            if (d.frame.pci == *serving_pci_)
                return &d;
        return nullptr;
    };

    if (mode_ == Mode::Off && sim.now() >= cfg_.spec.power_on)
        set_mode(sim, Mode::Scanning, "power_on");
    if (mode_ == Mode::Barred)
        set_mode(sim, Mode::Scanning, "reselect_after_barring");

    switch (mode_)
    {
    case Mode::Off:
    case Mode::Barred:
        break;
    case Mode::Scanning:
        scan(sim, decoded);
        if (mode_ == Mode::Camped)
            maybe_register(sim);
        break;
    case Mode::Camped: {
        const auto *cell = serving();
        if (!cell)
        {
            serving_pci_.reset();
            set_mode(sim, Mode::Scanning, "serving_cell_lost");
            scan(sim, decoded);
        }
        else if (cell->frame.mib.cell_barred)
        {
            sim.trace(id(), "cell_barred_skipped", json{{"pcis", {cell->frame.pci}}});
            set_mode(sim, Mode::Barred, "cell_barred");
            serving_pci_.reset();
            break;
        }
        else
            serving_sib1_ = cell->frame.sib1;
        if (mode_ == Mode::Camped)
            maybe_register(sim);
        break;
    }
    case Mode::Connecting:
        break;
    case Mode::Connected: {
        const auto *cell = serving();
        if (!cell)
        {
            sim.trace(id(), "radio_link_failure", json{{"pci", *serving_pci_}});
            drop_connection();
            serving_pci_.reset();
            set_mode(sim, Mode::Scanning, "radio_link_failure");
            if (registration_pending_)
                registration_ended(sim, false, "radio_link_failure");
            scan(sim, decoded);
            break;
        }
        serving_sib1_ = cell->frame.sib1;
        measurement_report(sim, measured);
        break;
    }
    case Mode::HandoverInProgress:
        break;
    }
    note_sync_source(sim);
}

void UeEntity::note_sync_source(sim::Simulation &sim)
{
    std::optional<std::uint16_t> pci;
    if (mode_ == Mode::HandoverInProgress)
        pci = ho_target_pci_;
    else if (mode_ == Mode::Camped || mode_ == Mode::Connecting || mode_ == Mode::Connected)
        pci = serving_pci_;
    std::optional<std::pair<std::uint16_t, std::string>> now;
    if (pci)
        now = std::make_pair(*pci, sim.sync_source(id(), *pci).value_or(""));
    if (now == last_sync_)
        return;
    last_sync_ = now;
    // Instrumentation only: which transmitter the UE is actually locked onto.
    sim.trace(id(), "sync_source",
              now ? json{{"pci", now->first}, {"origin", now->second}} : json{{"pci", nullptr}, {"origin", nullptr}});
}

void UeEntity::maybe_register(sim::Simulation &sim)
{
    if (registration_pending_ || sim.now() < backoff_until_ || !serving_sib1_)
        return;
    if (!registered_)
        start_connection(sim, Purpose::Registration, wire::RegistrationType::Initial);
    else if (check_tracking_area(tal_, *serving_sib1_))
        start_connection(sim, Purpose::Registration, wire::RegistrationType::Mobility);
    else if (periodic_due_)
        start_connection(sim, Purpose::Registration, wire::RegistrationType::Periodic);
    else if (page_pending_)
        start_connection(sim, Purpose::PageResponse, wire::RegistrationType::Service);
}

void UeEntity::start_connection(sim::Simulation &sim, Purpose purpose, wire::RegistrationType type)
{
    periodic_due_ = false;
    registration_pending_ = true;
    pending_type_ = type;
    ++registration_gen_;
    sim.trace(id(), "registration_attempt",
              json{{"type", wire::to_string(type)}, {"pci", *serving_pci_}, {"tac", serving_sib1_->tac}});
    sim.set_timer(id(), sim.scenario().timing.registration_guard, "reg_guard:" + std::to_string(registration_gen_));

    ra_ = RaState{};
    ra_.purpose = purpose;
    ra_.pci = *serving_pci_;
    ra_.pool = serving_sib1_->ra.preamble_pool;
    ra_.max_attempts = serving_sib1_->ra.max_attempts;
    ra_.cause = purpose == Purpose::PageResponse ? "mt_access" : "mo_signalling";
    set_mode(sim, Mode::Connecting, purpose == Purpose::PageResponse ? "page_response" : "registration");
    schedule_attempt(sim);
}

void UeEntity::schedule_attempt(sim::Simulation &sim)
{
    const Tick period = sim.scenario().timing.ra_occasion_period;
    Tick t = sim.now() + (ra_.attempt == 0 ? 0 : 1);
    Tick occasion = (t + period - 1) / period * period;
    ++ra_gen_;
    ra_.phase = RaPhase::AwaitOccasion;
    ra_.occasion = occasion;
    sim.set_timer(id(), occasion - sim.now(), "ra_send:" + std::to_string(ra_gen_));
}

void UeEntity::ra_retry(sim::Simulation &sim, const std::string &why)
{
    sim.trace(id(), "ra_attempt_failed", json{{"attempt", ra_.attempt}, {"reason", why}, {"pci", ra_.pci}});
    if (ra_.attempt >= ra_.max_attempts)
    {
        ra_failed(sim);
        return;
    }
    schedule_attempt(sim);
}

void UeEntity::ra_failed(sim::Simulation &sim)
{
    ra_.phase = RaPhase::Idle;
    ++ra_gen_;
    sim.trace(id(), "ra_failure", json{{"pci", ra_.pci}, {"attempts", ra_.attempt}});
    if (ra_.purpose == Purpose::Handover)
    {
        sim.trace(id(), "handover_failure", json{{"target_pci", ho_target_pci_}, {"reason", "ra_failure"}});
        drop_connection();
        serving_pci_.reset();
        // Reselect from scratch rather than falling back to the source cell.
        set_mode(sim, Mode::Scanning, "handover_failure");
        return;
    }
    set_mode(sim, Mode::Camped, "ra_failure");
    registration_ended(sim, false, "ra_failure");
}

void UeEntity::ra_succeeded(sim::Simulation &sim, std::uint16_t c_rnti)
{
    ra_.phase = RaPhase::Idle;
    ++ra_gen_;
    if (ra_.purpose == Purpose::Handover)
    {
        c_rnti_ = c_rnti;
        serving_pci_ = ho_target_pci_;
        as_keys_ = pending_as_keys_;
        pending_as_keys_.reset();
        ctx_->nhcc += 1;
        set_mode(sim, Mode::Connected, "handover_complete");
        sim.trace(id(), "handover_complete",
                  json{{"target_pci", ho_target_pci_}, {"c_rnti", c_rnti}, {"nhcc", ctx_->nhcc},
                       {"k_gnb_star", to_hex(as_keys_->k_gnb)}});
        sim.send_uplink(id(), ho_target_pci_, wire::secured(wire::RrcReconfigurationComplete{c_rnti}));
        next_report_at_ = sim.now() + sim.scenario().timing.report_interval;
        return;
    }

    c_rnti_ = c_rnti;
    set_mode(sim, Mode::Connected, "rrc_setup");
    RegistrationInputs in;
    in.type = pending_type_;
    in.ctx = ctx_;
    in.guti = guti_;
    in.concealment = cfg_.concealment;
    in.home_public_key = cfg_.home_public_key;
    in.home_key_id = cfg_.home_key_id;
    rng().fill(in.ephemeral);
    auto [req, protect] = build_registration_request(cfg_.profile, in);
    wire::WireMessage msg{wire::RrcSetupComplete{c_rnti, req}, protect};
    sim.send_uplink(id(), *serving_pci_, std::move(msg));
}

void UeEntity::measurement_report(sim::Simulation &sim, const std::vector<radio::CellMeasurement> &measured)
{
    if (!as_keys_ || !c_rnti_ || sim.now() < next_report_at_)
        return;
    const radio::CellMeasurement *serving = nullptr;
    std::vector<radio::CellMeasurement> neighbors;
    for (const auto &m : measured)
    {
        if (m.pci == *serving_pci_)
            serving = &m;
        else
            neighbors.push_back(m);
    }
    if (!serving)
        return;
    auto trigger = radio::evaluate_report_trigger(*serving, neighbors, sim.scenario().radio.trigger_margin_db);
    if (!trigger)
        return;

    radio::MeasurementReport report{serving->pci, serving->power_dbm, {}};
    for (const auto &n : neighbors)
        report.neighbors.push_back({n.pci, n.power_dbm, std::nullopt, n.origin});
    for (const auto &n : neighbors)
        if (n.tss)
            report = tss::attach_observed_tag(std::move(report), *n.tss);

    json entries = json::array();
    for (const auto &e : report.neighbors)
        entries.push_back(json{{"pci", e.pci}, {"power_dbm", e.power_dbm}, {"origin", e.origin},
                               {"tagged", e.tss.has_value()}});
    sim.trace(id(), "measurement_report",
              json{{"serving_pci", report.serving_pci}, {"trigger_pci", *trigger}, {"neighbors", entries}});
    sim.send_uplink(id(), *serving_pci_, wire::secured(wire::MeasurementReportMsg{*c_rnti_, std::move(report)}));
    next_report_at_ = sim.now() + sim.scenario().timing.report_interval;
}

void UeEntity::registration_ended(sim::Simulation &sim, bool success, const std::string &why)
{
    if (!registration_pending_)
        return;
    registration_pending_ = false;
    ++registration_gen_;
    if (success)
    {
        sim.trace(id(), "registration_accepted",
                  json{{"type", wire::to_string(pending_type_)}, {"tmsi", guti_->tmsi}, {"amf", guti_->amf_id}});
        if (pending_type_ == wire::RegistrationType::Service)
            page_pending_ = false;
        if (cfg_.spec.periodic_registration > 0)
        {
            ++periodic_gen_;
            sim.set_timer(id(), cfg_.spec.periodic_registration, "periodic:" + std::to_string(periodic_gen_));
        }
    }
    else
    {
        sim.trace(id(), "registration_failed", json{{"type", wire::to_string(pending_type_)}, {"reason", why}});
        backoff_until_ = sim.now() + sim.scenario().timing.registration_backoff;
        page_pending_ = false;
    }
}

void UeEntity::send_nas(sim::Simulation &sim, wire::NasMessage nas, bool protect)
{
    wire::WireMessage msg{wire::UlInformationTransfer{*c_rnti_, std::move(nas)}, protect};
    sim.send_uplink(id(), *serving_pci_, std::move(msg));
}

void UeEntity::handle_nas(sim::Simulation &sim, const wire::NasMessage &nas)
{
    if (auto *req = std::get_if<wire::AuthenticationRequest>(&nas))
    {
        if (!registration_pending_)
        {
            sim.trace(id(), "challenge_ignored", json{{"reason", "no_registration_pending"}});
            return;
        }
        const auto before = cfg_.profile.sqn_ue;
        auto reply = respond_to_challenge(cfg_.profile, req->rand, req->autn, sn_name(), req->ksi);
        sim.trace(id(), "aka_result",
                  json{{"outcome", kh::outcome_name(reply.outcome)},
                       {"sqn_before", before},
                       {"sqn_after", cfg_.profile.sqn_ue},
                       {"rand", to_hex(req->rand)}});
        if (reply.ctx)
        {
            ctx_ = reply.ctx;
            sim.trace(id(), "security_context",
                      json{{"ksi", ctx_->ksi}, {"k_amf", to_hex(ctx_->k_amf)}, {"sqn", ctx_->sqn}});
        }
        send_nas(sim, reply.reply, false);
        return;
    }
    if (auto *acc = std::get_if<wire::RegistrationAccept>(&nas))
    {
        if (!registration_pending_)
            return;
        guti_ = acc->guti;
        tal_ = acc->tal;
        registered_ = true;
        send_nas(sim, wire::RegistrationComplete{}, true);
        registration_ended(sim, true, "accepted");
        return;
    }
    if (auto *rej = std::get_if<wire::RegistrationReject>(&nas))
    {
        registration_ended(sim, false, "rejected:" + rej->cause);
        return;
    }
}

void UeEntity::on_message(sim::Simulation &sim, const sim::Delivery &d)
{
    if (!d.pci)
        return;
    const std::uint16_t pci = *d.pci;
    const bool on_serving = serving_pci_ && pci == *serving_pci_;
    const bool on_ra_cell = ra_.phase != RaPhase::Idle && pci == ra_.pci;
    if (!on_serving && !on_ra_cell)
        return;
    const bool connected = mode_ == Mode::Connected && c_rnti_;

    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, wire::RandomAccessResponse>)
            {
                if (ra_.phase != RaPhase::AwaitRar || !on_ra_cell || m.preamble != ra_.preamble ||
                    m.occasion != ra_.occasion)
                    return;
                ra_.tc_rnti = m.tc_rnti;
                ra_.phase = RaPhase::AwaitResolution;
                sim.send_uplink(id(), ra_.pci, wire::clear(wire::RrcSetupRequest{m.tc_rnti, ra_.identity, ra_.cause}));
            }
            else if constexpr (std::is_same_v<T, wire::ContentionResolution>)
            {
                if (ra_.phase != RaPhase::AwaitResolution || !on_ra_cell || m.tc_rnti != ra_.tc_rnti)
                    return;
                if (m.ue_identity != ra_.identity)
                {
                    ra_retry(sim, "contention_lost");
                    return;
                }
                if (!m.setup)
                {
                    ra_.phase = RaPhase::Idle;
                    ++ra_gen_;
                    sim.trace(id(), "rrc_reject", json{{"pci", ra_.pci}});
                    if (ra_.purpose == Purpose::Handover)
                    {
                        ra_failed(sim);
                        return;
                    }
                    set_mode(sim, Mode::Camped, "rrc_reject");
                    registration_ended(sim, false, "rrc_reject");
                    return;
                }
                ra_succeeded(sim, ra_.purpose == Purpose::Handover ? ho_new_c_rnti_ : m.tc_rnti);
            }
            else if constexpr (std::is_same_v<T, wire::DlInformationTransfer>)
            {
                if (connected && on_serving && m.c_rnti == *c_rnti_)
                    handle_nas(sim, m.nas);
            }
            else if constexpr (std::is_same_v<T, wire::RrcSecurityModeCommand>)
            {
                if (!connected || !on_serving || m.c_rnti != *c_rnti_)
                    return;
                if (!ctx_ || !ctx_->valid() || !serving_sib1_)
                {
                    sim.trace(id(), "security_mode_rejected", json{{"reason", "no_context"}});
                    return;
                }
                as_keys_ = kh::derive_k_gnb(ctx_->k_amf, serving_sib1_->cell_id, serving_sib1_->freq);
                auto j = keys_json(*as_keys_);
                j["cell_id"] = serving_sib1_->cell_id;
                sim.trace(id(), "as_keys", std::move(j));
                next_report_at_ = sim.now();
            }
            else if constexpr (std::is_same_v<T, wire::RrcReconfiguration>)
            {
                if (!connected || !on_serving || m.c_rnti != *c_rnti_ || !as_keys_ || !ctx_)
                    return;
                auto k_star = kh::derive_k_gnb_star(as_keys_->k_gnb, m.target_gnb_id, ctx_->nhcc);
                pending_as_keys_ = kh::derive_as_keys(k_star);
                ho_target_pci_ = m.target_pci;
                ho_new_c_rnti_ = m.new_c_rnti;
                sim.trace(id(), "handover_started",
                          json{{"source_pci", *serving_pci_},
                               {"target_pci", m.target_pci},
                               {"target_gnb_id", m.target_gnb_id},
                               {"nhcc", ctx_->nhcc},
                               {"k_gnb_star", to_hex(k_star)}});
                set_mode(sim, Mode::HandoverInProgress, "rrc_reconfiguration");
                ra_ = RaState{};
                ra_.purpose = Purpose::Handover;
                ra_.pci = m.target_pci;
                ra_.identity = m.new_c_rnti;
                ra_.cause = "handover";
                // Target RA parameters are unknown until its SIB1 is read; use the source's.
                if (serving_sib1_)
                {
                    ra_.pool = serving_sib1_->ra.preamble_pool;
                    ra_.max_attempts = serving_sib1_->ra.max_attempts;
                }
                schedule_attempt(sim);
            }
            else if constexpr (std::is_same_v<T, wire::RrcRelease>)
            {
                if (!connected || !on_serving || m.c_rnti != *c_rnti_)
                    return;
                drop_connection();
                set_mode(sim, Mode::Camped, "rrc_release");
                registration_ended(sim, false, "released");
            }
            else if constexpr (std::is_same_v<T, wire::Paging>)
            {
                if (mode_ != Mode::Camped || !on_serving || !guti_ || m.tmsi != guti_->tmsi)
                    return;
                sim.trace(id(), "page_received", json{{"pci", pci}});
                page_pending_ = true;
                maybe_register(sim);
            }
            else if constexpr (std::is_same_v<T, wire::UserData>)
            {
                if (connected && m.c_rnti == *c_rnti_)
                    sim.trace(id(), "user_data", json{{"bytes", m.payload.size()}});
            }
        },
        d.msg.body);
}

void UeEntity::on_timer(sim::Simulation &sim, const std::string &token)
{
    auto [name, gen] = split_token(token);
    if (name == "ra_send")
    {
        if (gen != ra_gen_ || ra_.phase != RaPhase::AwaitOccasion)
            return;
        ++ra_.attempt;
        ra_.preamble = static_cast<std::uint32_t>(rng().below(ra_.pool));
        if (ra_.purpose != Purpose::Handover)
            ra_.identity = rng().bits(40);
        ra_.phase = RaPhase::AwaitRar;
        sim.trace(id(), "ra_attempt",
                  json{{"attempt", ra_.attempt}, {"preamble", ra_.preamble}, {"pci", ra_.pci}, {"cause", ra_.cause}});
        sim.send_uplink(id(), ra_.pci, wire::clear(wire::RaPreamble{ra_.preamble, ra_.occasion}));
        ++ra_gen_;
        sim.set_timer(id(), sim.scenario().timing.ra_response_window, "ra_timeout:" + std::to_string(ra_gen_));
    }
    else if (name == "ra_timeout")
    {
        if (gen != ra_gen_ || (ra_.phase != RaPhase::AwaitRar && ra_.phase != RaPhase::AwaitResolution))
            return;
        ra_retry(sim, ra_.phase == RaPhase::AwaitRar ? "no_response" : "no_contention_resolution");
    }
    else if (name == "reg_guard")
    {
        if (gen != registration_gen_ || !registration_pending_)
            return;
        if (mode_ == Mode::Connecting)
        {
            ra_.phase = RaPhase::Idle;
            ++ra_gen_;
            set_mode(sim, Mode::Camped, "registration_timeout");
        }
        else if (mode_ == Mode::Connected)
        {
            drop_connection();
            set_mode(sim, Mode::Camped, "registration_timeout");
        }
        registration_ended(sim, false, "timeout");
    }
    else if (name == "periodic")
    {
        if (gen != periodic_gen_)
            return;
        periodic_due_ = true;
        if (mode_ == Mode::Camped)
            maybe_register(sim);
    }
}

void UeEntity::finish(sim::Simulation &sim)
{
    json j{{"mode", to_string(mode_)}, {"sqn", cfg_.profile.sqn_ue}, {"registered", registered_}};
    j["serving_pci"] = serving_pci_ ? json(*serving_pci_) : json(nullptr);
    j["nhcc"] = ctx_ ? json(ctx_->nhcc) : json(nullptr);
    j["k_amf"] = ctx_ ? json(to_hex(ctx_->k_amf)) : json(nullptr);
    j["k_gnb"] = as_keys_ ? json(to_hex(as_keys_->k_gnb)) : json(nullptr);
    sim.trace(id(), "ue_final", std::move(j));
}

std::unique_ptr<sim::Entity> make_ue(const sim::Scenario &s, const sim::UeSpec &spec, std::uint64_t seed)
{
    UeConfig cfg;
    cfg.spec = spec;
    cfg.profile.supi = spec.supi;
    if (!spec.k)
        throw std::logic_error("UE root key not provisioned");
    cfg.profile.k = kh::RootKey{*spec.k};
    cfg.profile.hplmn = spec.supi.plmn_id;
    cfg.profile.preferred_plmns = spec.preferred_plmns;
    cfg.profile.forbidden_plmns = {spec.forbidden_plmns.begin(), spec.forbidden_plmns.end()};
    cfg.profile.sqn_ue = spec.sqn;
    cfg.concealment = s.concealment;
    if (!s.home.private_key)
        throw std::logic_error("home key pair not provisioned");
    auto home = kh::HomeKeyPair::from_private(s.home.key_id, *s.home.private_key);
    cfg.home_public_key = home.public_key;
    cfg.home_key_id = home.key_id;
    return std::make_unique<UeEntity>(std::move(cfg), seed);
}

} // namespace nrsec::ue
