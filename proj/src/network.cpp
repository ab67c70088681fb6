#include <nrsec/crypto.hpp>
#include <nrsec/network.hpp>

#include <algorithm>

namespace nrsec::net
{

using json = sim::json;

namespace
{

std::vector<std::string> split(const std::string &token)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        auto colon = token.find(':', start);
        out.push_back(token.substr(start, colon - start));
        if (colon == std::string::npos)
            return out;
        start = colon + 1;
    }
}

std::string join(std::initializer_list<std::string> parts)
{
    std::string out;
    for (const auto &p : parts)
    {
        if (!out.empty())
            out += ':';
        out += p;
    }
    return out;
}

const char *identity_kind(const wire::Identity &id)
{
    return std::holds_alternative<kh::Suci>(id) ? "suci" : "supi";
}

} // namespace

Route forward_initial_ue_message(const std::optional<std::string> &prev_amf, const std::vector<EntityId> &reachable,
                                 const EntityId &default_amf)
{
    if (prev_amf && std::find(reachable.begin(), reachable.end(), *prev_amf) != reachable.end())
        return {*prev_amf, true};
    return {default_amf, false};
}

const char *to_string(RegistrationDecision d)
{
    switch (d)
    {
    case RegistrationDecision::ReuseContext:
        return "reuse_context";
    case RegistrationDecision::ContextTransfer:
        return "context_transfer";
    case RegistrationDecision::Authenticate:
        return "authenticate";
    }
    return "?";
}

RegistrationDecision amf_handle_registration(const wire::RegistrationRequest &req, const EntityId &self,
                                             bool local_context, bool other_amf_reachable)
{
    if (req.ksi == kh::kKsiNoContext || !req.guti)
        return RegistrationDecision::Authenticate;
    if (req.guti->amf_id == self)
        return local_context ? RegistrationDecision::ReuseContext : RegistrationDecision::Authenticate;
    return other_amf_reachable ? RegistrationDecision::ContextTransfer : RegistrationDecision::Authenticate;
}

bool hres_matches(const Res128 &res_star, const Rand128 &rand, const Res128 &hxres_star)
{
    auto h = kh::hash_response(res_star, rand);
    return crypto::equal_ct(h.view(), hxres_star.view());
}

HandoverPlan decide_handover(const HandoverPolicy &policy, const radio::MeasurementReport &report,
                             bool protected_channel, Tick now)
{
    HandoverPlan plan;
    const radio::ReportEntry *best = nullptr;
    for (const auto &e : report.neighbors)
    {
        if (e.power_dbm < report.serving_power_dbm + policy.trigger_margin_db)
            continue;
        if (!best || e.power_dbm > best->power_dbm || (e.power_dbm == best->power_dbm && e.pci < best->pci))
            best = &e;
    }
    if (!best)
    {
        plan.reason = "no_trigger";
        return plan;
    }
    plan.target_pci = best->pci;
    if (!protected_channel)
    {
        plan.reason = "unprotected";
        return plan;
    }
    if (std::find(policy.ncl.begin(), policy.ncl.end(), best->pci) == policy.ncl.end())
    {
        plan.reason = "not_in_ncl";
        return plan;
    }
    if (policy.mode == sim::Mode::Tss)
    {
        plan.verdict = tss::network_verify_report(policy.tss, report, best->pci, now);
        if (*plan.verdict != tss::Verdict::Accept)
        {
            plan.reason = tss::to_string(*plan.verdict);
            return plan;
        }
    }
    plan.reason = "plan";
    return plan;
}

// ---------------------------------------------------------------------------
// gNB

GnbEntity::GnbEntity(const sim::Scenario &, sim::GnbSpec spec, std::uint64_t seed)
    : Entity(spec.id, seed), spec_(std::move(spec))
{
}

std::optional<kh::AsKeys> GnbEntity::session_keys(std::uint16_t c_rnti) const
{
    auto it = sessions_.find(c_rnti);
    if (it == sessions_.end())
        return std::nullopt;
    return it->second.keys;
}

std::vector<radio::SsbFrame> GnbEntity::transmit_ssb(sim::Simulation &sim)
{
    radio::SsbFrame f;
    f.pci = spec_.pci;
    f.mib.sfn = static_cast<std::uint32_t>(sim.now() % 1024);
    f.mib.cell_barred = spec_.barred;
    f.sib1 = radio::Sib1{spec_.plmn, spec_.tac, spec_.gnb_id, spec_.freq, spec_.ra, sim.mode() == sim::Mode::Tss};
    if (sim.tss().enabled)
        f.tss = tss::generate_tss(sim.tss(), spec_.pci, tss::slot_of(sim.tss(), sim.now()));
    return {f};
}

std::uint16_t GnbEntity::allocate_rnti()
{
    while (true)
    {
        std::uint16_t r = next_rnti_++;
        if (next_rnti_ >= 0xfff0)
            next_rnti_ = 0x4601;
        if (!sessions_.count(r) && !ra_groups_.count(r))
            return r;
    }
}

GnbEntity::Session *GnbEntity::session_by_radio(const EntityId &radio, std::uint16_t c_rnti)
{
    auto it = sessions_.find(c_rnti);
    if (it == sessions_.end() || it->second.radio != radio)
        return nullptr;
    return &it->second;
}

void GnbEntity::downlink(sim::Simulation &sim, const Session &s, wire::WireMessage msg)
{
    sim.send_downlink(id(), s.radio, std::move(msg), spec_.pci);
}

void GnbEntity::touch(sim::Simulation &sim, Session &s)
{
    s.gen = ++next_gen_;
    if (spec_.inactivity_release > 0)
        sim.set_timer(id(), spec_.inactivity_release,
                      join({"inactive", std::to_string(s.c_rnti), std::to_string(s.gen)}));
}

void GnbEntity::release(sim::Simulation &sim, std::uint16_t c_rnti, const std::string &cause, bool notify_amf)
{
    auto it = sessions_.find(c_rnti);
    if (it == sessions_.end())
        return;
    auto &s = it->second;
    if (notify_amf && !s.amf.empty())
        sim.send_net(id(), s.amf, wire::secured(wire::UeContextReleaseRequest{s.amf_ue_id, c_rnti, cause}));
    sim.trace(id(), "rrc_session_closed", json{{"c_rnti", c_rnti}, {"cause", cause}});
    sessions_.erase(it);
}

void GnbEntity::on_message(sim::Simulation &sim, const sim::Delivery &d)
{
    if (d.msg.channel() == wire::Channel::Air)
        handle_air(sim, d);
    else
        handle_net(sim, d);
}

void GnbEntity::handle_air(sim::Simulation &sim, const sim::Delivery &d)
{
    if (d.pci && *d.pci != spec_.pci)
        return;
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, wire::RaPreamble>)
            {
                if (preambles_.empty())
                    sim.set_timer(id(), 0, "ra_dispatch");
                preambles_[{m.occasion, m.preamble}].push_back(d.from);
            }
            else if constexpr (std::is_same_v<T, wire::RrcSetupRequest>)
            {
                msg3(sim, d.from, m);
            }
            else if constexpr (std::is_same_v<T, wire::RrcSetupComplete>)
            {
                auto *s = session_by_radio(d.from, m.c_rnti);
                if (!s || s->state != SessionState::Setup || !s->amf.empty())
                    return;
                std::optional<std::string> prev;
                if (auto *req = std::get_if<wire::RegistrationRequest>(&m.nas))
                    prev = req->prev_amf;
                auto route = forward_initial_ue_message(prev, spec_.amfs, spec_.amf);
                s->amf = route.amf;
                sim.trace(id(), "initial_ue_routed",
                          json{{"c_rnti", m.c_rnti}, {"amf", route.amf}, {"previous_amf", route.previous}});
                sim.send_net(id(), route.amf, wire::secured(wire::InitialUeMessage{id(), m.c_rnti, m.nas}));
                touch(sim, *s);
            }
            else if constexpr (std::is_same_v<T, wire::UlInformationTransfer>)
            {
                auto *s = session_by_radio(d.from, m.c_rnti);
                if (!s || s->amf.empty())
                    return;
                sim.send_net(id(), s->amf, wire::secured(wire::UplinkNasTransport{s->amf_ue_id, m.c_rnti, m.nas}));
                touch(sim, *s);
            }
            else if constexpr (std::is_same_v<T, wire::MeasurementReportMsg>)
            {
                auto *s = session_by_radio(d.from, m.c_rnti);
                if (!s)
                    return;
                measurement_report(sim, *s, d.msg, m.report);
            }
            else if constexpr (std::is_same_v<T, wire::RrcReconfigurationComplete>)
            {
                auto *s = session_by_radio(d.from, m.c_rnti);
                if (!s || s->state != SessionState::HandoverIn)
                    return;
                s->state = SessionState::Active;
                sim.trace(id(), "handover_arrived",
                          json{{"c_rnti", m.c_rnti}, {"nhcc", s->nhcc}, {"k_gnb", to_hex(s->keys->k_gnb)}});
                sim.send_net(id(), s->ho_source, wire::secured(wire::HandoverNotify{s->ho_source_ran_ue_id}));
                sim.send_net(id(), s->amf,
                             wire::secured(wire::PathSwitchRequest{s->amf_ue_id, id(), s->c_rnti, s->nhcc}));
                touch(sim, *s);
            }
        },
        d.msg.body);
}

void GnbEntity::dispatch_rar(sim::Simulation &sim)
{
    auto arrivals = std::move(preambles_);
    preambles_.clear();
    for (auto &[key, radios] : arrivals)
    {
        const std::uint16_t tc = allocate_rnti();
        ra_groups_[tc] = RaGroup{radios, std::nullopt};
        if (radios.size() > 1)
            sim.trace(id(), "ra_collision", json{{"preamble", key.second}, {"occasion", key.first},
                                                 {"count", radios.size()}});
        for (const auto &r : radios)
            sim.send_downlink(id(), r, wire::clear(wire::RandomAccessResponse{key.second, key.first, tc}), spec_.pci);
        sim.set_timer(id(), sim.scenario().timing.ra_response_window, join({"ra_expire", std::to_string(tc)}));
    }
}

void GnbEntity::msg3(sim::Simulation &sim, const EntityId &radio, const wire::RrcSetupRequest &m)
{
    auto git = ra_groups_.find(m.tc_rnti);
    if (git == ra_groups_.end() || git->second.winner)
        return;
    auto &group = git->second;
    if (std::find(group.radios.begin(), group.radios.end(), radio) == group.radios.end())
        return;
    group.winner = m.ue_identity;

    bool setup = true;
    if (m.cause == "handover")
    {
        auto it = sessions_.find(static_cast<std::uint16_t>(m.ue_identity));
        if (it == sessions_.end() || it->second.state != SessionState::HandoverIn)
            setup = false;
        else
            it->second.radio = radio;
    }
    else if (spec_.overload)
    {
        setup = false;
        sim.trace(id(), "rrc_rejected", json{{"tc_rnti", m.tc_rnti}, {"reason", "overload"}});
    }
    else
    {
        Session s;
        s.c_rnti = m.tc_rnti;
        s.radio = radio;
        auto &stored = sessions_[m.tc_rnti] = s;
        sim.trace(id(), "rrc_setup", json{{"c_rnti", m.tc_rnti}, {"cause", m.cause}});
        touch(sim, stored);
    }
    for (const auto &r : group.radios)
        sim.send_downlink(id(), r, wire::clear(wire::ContentionResolution{m.tc_rnti, m.ue_identity, setup}),
                          spec_.pci);
    ra_groups_.erase(git);
}

void GnbEntity::measurement_report(sim::Simulation &sim, Session &s, const wire::WireMessage &msg,
                                   const radio::MeasurementReport &report)
{
    if (s.state != SessionState::Active || !s.keys)
        return;
    touch(sim, s);
    HandoverPolicy policy{sim.mode(), sim.scenario().radio.trigger_margin_db, spec_.ncl, sim.tss()};
    auto plan = decide_handover(policy, report, msg.protected_, sim.now());
    if (plan.reason != "plan")
    {
        json j{{"c_rnti", s.c_rnti}, {"reason", plan.reason}};
        j["target_pci"] = plan.target_pci ? json(*plan.target_pci) : json(nullptr);
        sim.trace(id(), "handover_rejected", std::move(j));
        return;
    }
    const auto *cell = sim.topology().cell_by_pci(*plan.target_pci);
    if (!cell || cell->entity == id())
    {
        sim.trace(id(), "handover_rejected",
                  json{{"c_rnti", s.c_rnti}, {"reason", "unknown_target"}, {"target_pci", *plan.target_pci}});
        return;
    }
    auto k_star = kh::derive_k_gnb_star(s.keys->k_gnb, cell->gnb_id, s.nhcc);
    s.state = SessionState::HandoverOut;
    s.ho_target = cell->entity;
    s.ho_target_pci = cell->pci;
    json j{{"c_rnti", s.c_rnti}, {"target_pci", cell->pci}, {"target", cell->entity}, {"nhcc", s.nhcc}};
    if (plan.verdict)
        j["verdict"] = tss::to_string(*plan.verdict);
    sim.trace(id(), "handover_decision", std::move(j));
    sim.send_net(id(), cell->entity,
                 wire::secured(wire::HandoverRequest{id(), s.c_rnti, s.amf_ue_id, s.amf, cell->pci, k_star, s.nhcc + 1}));
    sim.set_timer(id(), sim.scenario().timing.handover_guard,
                  join({"ho_out_guard", std::to_string(s.c_rnti), std::to_string(s.gen)}));
}

void GnbEntity::handle_net(sim::Simulation &sim, const sim::Delivery &d)
{
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, wire::DownlinkNasTransport>)
            {
                auto it = sessions_.find(m.ran_ue_id);
                if (it == sessions_.end())
                    return;
                auto &s = it->second;
                s.amf_ue_id = m.amf_ue_id;
                downlink(sim, s,
                         wire::WireMessage{wire::DlInformationTransfer{s.c_rnti, m.nas},
                                           !wire::nas_cleartext_by_default(m.nas)});
            }
            else if constexpr (std::is_same_v<T, wire::InitialContextSetupRequest>)
            {
                auto it = sessions_.find(m.ran_ue_id);
                if (it == sessions_.end())
                    return;
                auto &s = it->second;
                s.amf_ue_id = m.amf_ue_id;
                s.keys = kh::derive_as_keys(m.k_gnb);
                s.nhcc = m.nhcc;
                s.state = SessionState::Active;
                sim.trace(id(), "as_keys", json{{"c_rnti", s.c_rnti}, {"k_gnb", to_hex(s.keys->k_gnb)}});
                downlink(sim, s, wire::secured(wire::RrcSecurityModeCommand{s.c_rnti}));
                downlink(sim, s, wire::secured(wire::DlInformationTransfer{s.c_rnti, m.nas}));
                touch(sim, s);
            }
            else if constexpr (std::is_same_v<T, wire::UeContextReleaseCommand>)
            {
                auto it = sessions_.find(m.ran_ue_id);
                if (it == sessions_.end())
                    return;
                downlink(sim, it->second, wire::secured(wire::RrcRelease{it->second.c_rnti}));
                release(sim, m.ran_ue_id, m.cause, false);
            }
            else if constexpr (std::is_same_v<T, wire::HandoverRequest>)
            {
                Session s;
                s.c_rnti = allocate_rnti();
                s.state = SessionState::HandoverIn;
                s.amf_ue_id = m.amf_ue_id;
                s.amf = m.amf;
                s.keys = kh::derive_as_keys(m.k_gnb_star);
                s.nhcc = m.nhcc;
                s.ho_source = d.from;
                s.ho_source_ran_ue_id = m.source_ran_ue_id;
                s.gen = ++next_gen_;
                sessions_[s.c_rnti] = s;
                sim.trace(id(), "handover_prepared", json{{"new_c_rnti", s.c_rnti}, {"source", d.from}});
                sim.set_timer(id(), sim.scenario().timing.handover_guard,
                              join({"ho_in_guard", std::to_string(s.c_rnti), std::to_string(s.gen)}));
                sim.send_net(id(), d.from, wire::secured(wire::HandoverRequestAck{m.source_ran_ue_id, s.c_rnti}));
            }
            else if constexpr (std::is_same_v<T, wire::HandoverRequestAck>)
            {
                auto it = sessions_.find(m.source_ran_ue_id);
                if (it == sessions_.end() || it->second.state != SessionState::HandoverOut)
                    return;
                auto &s = it->second;
                const auto *cell = sim.topology().cell_by_entity(s.ho_target);
                downlink(sim, s,
                         wire::secured(wire::RrcReconfiguration{s.c_rnti, s.ho_target_pci, cell->gnb_id, cell->freq,
                                                                m.new_c_rnti}));
            }
            else if constexpr (std::is_same_v<T, wire::HandoverPreparationFailure>)
            {
                auto it = sessions_.find(m.source_ran_ue_id);
                if (it != sessions_.end() && it->second.state == SessionState::HandoverOut)
                    it->second.state = SessionState::Active;
            }
            else if constexpr (std::is_same_v<T, wire::HandoverNotify>)
            {
                auto it = sessions_.find(m.source_ran_ue_id);
                if (it != sessions_.end() && it->second.state == SessionState::HandoverOut)
                    release(sim, m.source_ran_ue_id, "handover_complete", false);
            }
            else if constexpr (std::is_same_v<T, wire::PagingRequest>)
            {
                const Tick cycle = sim.scenario().timing.paging_cycle;
                const Tick now = sim.now();
                const Tick target = m.tmsi % cycle;
                const Tick delay = (target + cycle - now % cycle) % cycle;
                sim.set_timer(id(), delay, join({"page_tx", std::to_string(m.tmsi)}));
            }
        },
        d.msg.body);
}

void GnbEntity::on_timer(sim::Simulation &sim, const std::string &token)
{
    auto parts = split(token);
    const auto &name = parts[0];
    if (name == "ra_dispatch")
    {
        dispatch_rar(sim);
        return;
    }
    if (name == "ra_expire")
    {
        ra_groups_.erase(static_cast<std::uint16_t>(std::stoul(parts[1])));
        return;
    }
    if (name == "page_tx")
    {
        auto tmsi = static_cast<std::uint32_t>(std::stoul(parts[1]));
        sim.broadcast_downlink(id(), wire::clear(wire::Paging{tmsi}), spec_.pci);
        return;
    }

    const auto c_rnti = static_cast<std::uint16_t>(std::stoul(parts[1]));
    const auto gen = std::stoull(parts[2]);
    auto it = sessions_.find(c_rnti);
    if (it == sessions_.end())
        return;
    auto &s = it->second;
    if (name == "ho_out_guard")
    {
        if (s.state != SessionState::HandoverOut || s.gen != gen)
            return;
        sim.trace(id(), "handover_failed",
                  json{{"c_rnti", c_rnti}, {"target_pci", s.ho_target_pci}, {"reason", "guard_expired"}});
        release(sim, c_rnti, "handover_failure", true);
    }
    else if (name == "ho_in_guard")
    {
        if (s.state != SessionState::HandoverIn || s.gen != gen)
            return;
        release(sim, c_rnti, "handover_not_arrived", false);
    }
    else if (name == "inactive")
    {
        if (s.state != SessionState::Active || s.gen != gen)
            return;
        downlink(sim, s, wire::secured(wire::RrcRelease{c_rnti}));
        release(sim, c_rnti, "inactivity", true);
    }
}

// ---------------------------------------------------------------------------
// AMF

AmfEntity::AmfEntity(const sim::Scenario &, sim::AmfSpec spec, std::uint64_t seed)
    : Entity(spec.id, seed), spec_(std::move(spec))
{
}

std::optional<kh::SecurityContext> AmfEntity::context_for(const kh::Supi &supi) const
{
    auto it = contexts_.find(supi.str());
    if (it == contexts_.end())
        return std::nullopt;
    return it->second.ctx;
}

AmfEntity::UeRecord *AmfEntity::record(std::uint64_t amf_ue_id)
{
    auto it = records_.find(amf_ue_id);
    return it == records_.end() ? nullptr : &it->second;
}

AmfEntity::UeRecord *AmfEntity::record_by_ran(const EntityId &gnb, std::uint16_t ran_ue_id)
{
    // Latest record wins when RAN identifiers get reused.
    for (auto it = records_.rbegin(); it != records_.rend(); ++it)
        if (it->second.gnb == gnb && it->second.ran_ue_id == ran_ue_id)
            return &it->second;
    return nullptr;
}

AmfEntity::Stored *AmfEntity::stored_by_tmsi(std::uint32_t tmsi)
{
    for (auto &[supi, st] : contexts_)
        if (st.guti.tmsi == tmsi)
            return &st;
    return nullptr;
}

std::vector<std::uint32_t> AmfEntity::tracking_area_list(const sim::Simulation &sim) const
{
    std::vector<std::uint32_t> tal;
    for (const auto &c : sim.topology().cells)
        if (std::find(c.amfs.begin(), c.amfs.end(), id()) != c.amfs.end())
            tal.push_back(c.tac);
    std::sort(tal.begin(), tal.end());
    tal.erase(std::unique(tal.begin(), tal.end()), tal.end());
    return tal;
}

void AmfEntity::on_message(sim::Simulation &sim, const sim::Delivery &d)
{
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, wire::InitialUeMessage>)
            {
                initial_ue_message(sim, d, m);
            }
            else if constexpr (std::is_same_v<T, wire::UplinkNasTransport>)
            {
                UeRecord *rec = m.amf_ue_id ? record(m.amf_ue_id) : record_by_ran(d.from, m.ran_ue_id);
                if (rec && rec->gnb == d.from)
                    uplink_nas(sim, *rec, m.nas);
            }
            else if constexpr (std::is_same_v<T, wire::AuthVectorResponse>)
            {
                auto *rec = record(m.req_id);
                if (!rec)
                    return;
                PendingAuth p{m.rand, m.hxres_star, m.k_seaf, static_cast<std::uint8_t>(next_ksi_)};
                next_ksi_ = (next_ksi_ + 1) % 7;
                rec->pending = p;
                sim.trace(id(), "auth_challenge_sent", json{{"amf_ue_id", rec->amf_ue_id}, {"ksi", p.ksi},
                                                           {"rand", to_hex(m.rand)}});
                sim.send_net(id(), rec->gnb,
                             wire::secured(wire::DownlinkNasTransport{
                                 rec->amf_ue_id, rec->ran_ue_id, wire::AuthenticationRequest{m.rand, m.autn, p.ksi}}));
            }
            else if constexpr (std::is_same_v<T, wire::AuthVectorFailure>)
            {
                if (auto *rec = record(m.req_id))
                {
                    sim.trace(id(), "auth_failed", json{{"amf_ue_id", rec->amf_ue_id}, {"reason", m.reason}});
                    fail_registration(sim, *rec, m.reason);
                }
            }
            else if constexpr (std::is_same_v<T, wire::AuthConfirmResponse>)
            {
                auto *rec = record(m.req_id);
                if (!rec || !rec->pending)
                    return;
                if (!m.success || !m.supi)
                {
                    sim.trace(id(), "auth_failed", json{{"amf_ue_id", rec->amf_ue_id}, {"reason", m.reason}});
                    fail_registration(sim, *rec, m.reason);
                    return;
                }
                const auto p = *rec->pending;
                rec->pending.reset();
                rec->supi = m.supi;
                kh::ServingKeys keys{p.k_seaf, kh::derive_k_amf(p.k_seaf, *m.supi)};
                auto ctx = kh::SecurityContext::establish(p.ksi, keys, 0);
                sim.trace(id(), "authenticated",
                          json{{"amf_ue_id", rec->amf_ue_id}, {"ksi", p.ksi}, {"k_amf", to_hex(ctx.k_amf)}});
                complete_registration(sim, *rec, ctx, "authenticated");
            }
            else if constexpr (std::is_same_v<T, wire::UeContextTransferRequest>)
            {
                wire::UeContextTransferResponse resp;
                resp.req_id = m.req_id;
                if (auto *st = stored_by_tmsi(m.guti.tmsi); st && st->guti == m.guti)
                {
                    resp.supi = st->supi;
                    if (st->ctx.ksi == m.ksi)
                        resp.context = st->ctx;
                }
                sim.trace(id(), "context_transfer_served",
                          json{{"to", d.from}, {"found", resp.context.has_value()}});
                sim.send_net(id(), d.from, wire::secured(std::move(resp)));
            }
            else if constexpr (std::is_same_v<T, wire::UeContextTransferResponse>)
            {
                auto *rec = record(m.req_id);
                if (!rec)
                    return;
                if (m.context && m.supi)
                {
                    rec->supi = m.supi;
                    complete_registration(sim, *rec, *m.context, "transferred");
                }
                else
                    start_authentication(sim, *rec);
            }
            else if constexpr (std::is_same_v<T, wire::PathSwitchRequest>)
            {
                auto *rec = record(m.amf_ue_id);
                if (!rec || !rec->supi)
                    return;
                rec->gnb = m.gnb;
                rec->ran_ue_id = m.ran_ue_id;
                rec->connected = true;
                auto &st = contexts_.at(rec->supi->str());
                st.ctx.nhcc = m.nhcc;
                sim.trace(id(), "path_switch", json{{"amf_ue_id", m.amf_ue_id}, {"gnb", m.gnb}, {"nhcc", m.nhcc}});
            }
            else if constexpr (std::is_same_v<T, wire::UeContextReleaseRequest>)
            {
                auto *rec = record(m.amf_ue_id);
                if (!rec)
                    rec = record_by_ran(d.from, m.ran_ue_id);
                if (!rec || rec->gnb != d.from)
                    return;
                rec->connected = false;
                rec->pending.reset();
                sim.trace(id(), "ue_released", json{{"amf_ue_id", rec->amf_ue_id}, {"cause", m.cause}});
            }
        },
        d.msg.body);
}

void AmfEntity::initial_ue_message(sim::Simulation &sim, const sim::Delivery &d, const wire::InitialUeMessage &m)
{
    const auto *req = std::get_if<wire::RegistrationRequest>(&m.nas);
    if (!req)
        return;
    UeRecord rec;
    rec.amf_ue_id = next_amf_ue_id_++;
    rec.gnb = d.from;
    rec.ran_ue_id = m.ran_ue_id;
    rec.request = *req;
    auto &r = records_[rec.amf_ue_id] = std::move(rec);

    Stored *local = nullptr;
    if (req->guti && req->guti->amf_id == id())
        if (auto *st = stored_by_tmsi(req->guti->tmsi); st && st->ctx.ksi == req->ksi)
            local = st;
    const bool other = req->guti && req->guti->amf_id != id() && sim.topology().amfs.count(req->guti->amf_id);
    const auto decision = amf_handle_registration(*req, id(), local != nullptr, other);
    sim.trace(id(), "registration_request",
              json{{"amf_ue_id", r.amf_ue_id},
                   {"gnb", d.from},
                   {"type", wire::to_string(req->type)},
                   {"identity", identity_kind(req->identity)},
                   {"decision", to_string(decision)}});

    switch (decision)
    {
    case RegistrationDecision::ReuseContext: {
        r.supi = local->supi;
        complete_registration(sim, r, local->ctx, "reuse_context");
        break;
    }
    case RegistrationDecision::ContextTransfer:
        sim.send_net(id(), req->guti->amf_id,
                     wire::secured(wire::UeContextTransferRequest{r.amf_ue_id, *req->guti, req->ksi}));
        break;
    case RegistrationDecision::Authenticate:
        start_authentication(sim, r);
        break;
    }
}

void AmfEntity::start_authentication(sim::Simulation &sim, UeRecord &rec)
{
    sim.trace(id(), "auth_vector_requested", json{{"amf_ue_id", rec.amf_ue_id}});
    sim.send_net(id(), sim.scenario().home.id,
                 wire::secured(wire::AuthVectorRequest{rec.amf_ue_id, rec.request.identity, spec_.sn_name}));
}

void AmfEntity::uplink_nas(sim::Simulation &sim, UeRecord &rec, const wire::NasMessage &nas)
{
    if (auto *resp = std::get_if<wire::AuthenticationResponse>(&nas))
    {
        if (!rec.pending)
        {
            sim.trace(id(), "auth_response_unsolicited", json{{"amf_ue_id", rec.amf_ue_id}});
            return;
        }
        if (!hres_matches(resp->res_star, rec.pending->rand, rec.pending->hxres_star))
        {
            sim.trace(id(), "auth_failed", json{{"amf_ue_id", rec.amf_ue_id}, {"reason", "hres_mismatch"}});
            fail_registration(sim, rec, "hres_mismatch");
            return;
        }
        sim.send_net(id(), sim.scenario().home.id,
                     wire::secured(wire::AuthConfirmRequest{rec.amf_ue_id, resp->res_star}));
    }
    else if (auto *fail = std::get_if<wire::AuthenticationFailure>(&nas))
    {
        if (!rec.pending)
        {
            sim.trace(id(), "auth_failure_unsolicited",
                      json{{"amf_ue_id", rec.amf_ue_id}, {"cause", wire::to_string(fail->cause)}});
            return;
        }
        sim.trace(id(), "auth_failed",
                  json{{"amf_ue_id", rec.amf_ue_id}, {"reason", wire::to_string(fail->cause)}});
        fail_registration(sim, rec, wire::to_string(fail->cause));
    }
    else if (std::holds_alternative<wire::RegistrationComplete>(nas))
    {
        sim.trace(id(), "registration_complete", json{{"amf_ue_id", rec.amf_ue_id}});
        if (!rec.supi)
            return;
        for (auto it = pages_.begin(); it != pages_.end();)
        {
            if (it->second.supi == rec.supi->str())
            {
                sim.trace(id(), "page_answered",
                          json{{"ue", it->second.ue}, {"issued_at", it->second.issued},
                               {"latency", sim.now() - it->second.issued}});
                it = pages_.erase(it);
            }
            else
                ++it;
        }
    }
}

void AmfEntity::complete_registration(sim::Simulation &sim, UeRecord &rec, kh::SecurityContext ctx, const char *how)
{
    const auto text = rec.supi->str();
    auto [it, fresh] = contexts_.try_emplace(text);
    auto &st = it->second;
    st.supi = *rec.supi;
    if (fresh || st.guti.amf_id != id())
    {
        std::uint32_t tmsi;
        do
            tmsi = static_cast<std::uint32_t>(rng().bits(32));
        while (stored_by_tmsi(tmsi));
        st.guti = wire::Guti{id(), tmsi};
    }
    st.ctx = ctx;
    st.amf_ue_id = rec.amf_ue_id;
    rec.connected = true;

    const auto *cell = sim.topology().cell_by_entity(rec.gnb);
    auto as = kh::derive_k_gnb(ctx.k_amf, cell->gnb_id, cell->freq);
    wire::RegistrationAccept accept{st.guti, tracking_area_list(sim)};
    sim.trace(id(), "registration_granted",
              json{{"amf_ue_id", rec.amf_ue_id}, {"how", how}, {"tmsi", st.guti.tmsi}, {"ksi", ctx.ksi},
                   {"nhcc", ctx.nhcc}, {"k_amf", to_hex(ctx.k_amf)}, {"k_gnb", to_hex(as.k_gnb)}});
    sim.send_net(id(), rec.gnb,
                 wire::secured(wire::InitialContextSetupRequest{rec.amf_ue_id, rec.ran_ue_id, as.k_gnb, ctx.nhcc,
                                                               std::move(accept)}));
}

void AmfEntity::fail_registration(sim::Simulation &sim, UeRecord &rec, const std::string &reason)
{
    rec.pending.reset();
    rec.connected = false;
    sim.trace(id(), "registration_rejected", json{{"amf_ue_id", rec.amf_ue_id}, {"reason", reason}});
    sim.send_net(id(), rec.gnb,
                 wire::secured(wire::DownlinkNasTransport{rec.amf_ue_id, rec.ran_ue_id,
                                                          wire::RegistrationReject{reason}}));
    sim.send_net(id(), rec.gnb,
                 wire::secured(wire::UeContextReleaseCommand{rec.amf_ue_id, rec.ran_ue_id, "registration_rejected"}));
}

void AmfEntity::page(sim::Simulation &sim, const EntityId &ue)
{
    auto sit = sim.topology().subscribers.find(ue);
    if (sit == sim.topology().subscribers.end())
        return;
    const auto text = sit->second.str();
    auto cit = contexts_.find(text);
    if (cit == contexts_.end())
    {
        sim.trace(id(), "page_missed", json{{"ue", ue}, {"issued_at", sim.now()}, {"reason", "not_registered"}});
        return;
    }
    const auto &st = cit->second;
    if (auto *rec = record(st.amf_ue_id); rec && rec->connected)
    {
        sim.trace(id(), "page_reachable", json{{"ue", ue}});
        return;
    }
    for (const auto &[n, p] : pages_)
        if (p.supi == text)
        {
            sim.trace(id(), "page_repeated", json{{"ue", ue}, {"pending_since", p.issued}});
            return;
        }
    const auto n = next_page_++;
    pages_[n] = PendingPage{ue, text, sim.now()};
    sim.trace(id(), "page_issued", json{{"ue", ue}, {"tmsi", st.guti.tmsi}});
    for (const auto &c : sim.topology().cells)
        if (std::find(c.amfs.begin(), c.amfs.end(), id()) != c.amfs.end())
            sim.send_net(id(), c.entity, wire::secured(wire::PagingRequest{st.guti.tmsi}));
    sim.set_timer(id(), sim.scenario().timing.paging_timeout, join({"page_timeout", std::to_string(n)}));
}

void AmfEntity::on_timer(sim::Simulation &sim, const std::string &token)
{
    auto colon = token.find(':');
    const auto name = token.substr(0, colon);
    const auto arg = colon == std::string::npos ? std::string() : token.substr(colon + 1);
    if (name == "page")
        page(sim, arg);
    else if (name == "page_timeout")
    {
        auto it = pages_.find(std::stoull(arg));
        if (it == pages_.end())
            return;
        sim.trace(id(), "page_missed",
                  json{{"ue", it->second.ue}, {"issued_at", it->second.issued}, {"reason", "no_response"}});
        pages_.erase(it);
    }
}

// ---------------------------------------------------------------------------
// Home network

HomeEntity::HomeEntity(const sim::Scenario &s, std::uint64_t seed) : Entity(s.home.id, seed)
{
    if (!s.home.private_key)
        throw std::logic_error("home key pair not provisioned");
    keys_ = kh::HomeKeyPair::from_private(s.home.key_id, *s.home.private_key);
    for (const auto &u : s.ues)
    {
        if (!u.k)
            throw std::logic_error("UE root key not provisioned");
        arpf_[u.supi.str()] = Subscriber{u.supi, kh::RootKey{*u.k}, u.sqn};
    }
}

std::uint64_t HomeEntity::sqn_hn(const kh::Supi &supi) const
{
    auto it = arpf_.find(supi.str());
    return it == arpf_.end() ? 0 : it->second.sqn_hn;
}

void HomeEntity::on_message(sim::Simulation &sim, const sim::Delivery &d)
{
    if (auto *req = std::get_if<wire::AuthVectorRequest>(&d.msg.body))
    {
        auto fail = [&](const std::string &reason) {
            sim.trace(id(), "udm_vector_refused", json{{"amf", d.from}, {"req_id", req->req_id}, {"reason", reason}});
            sim.send_net(id(), d.from, wire::secured(wire::AuthVectorFailure{req->req_id, reason}));
        };
        kh::Supi supi;
        if (auto *suci = std::get_if<kh::Suci>(&req->identity))
        {
            try
            {
                supi = kh::deconceal_suci(*suci, keys_);
            }
            catch (const kh::DeconcealFailure &)
            {
                fail("deconceal_failure");
                return;
            }
            sim.trace(id(), "sidf_deconcealed", json{{"req_id", req->req_id}, {"supi", supi.str()}});
        }
        else
            supi = std::get<kh::Supi>(req->identity);

        auto it = arpf_.find(supi.str());
        if (it == arpf_.end())
        {
            fail("unknown_subscriber");
            return;
        }
        auto &sub = it->second;
        const auto rand = rng().octets<Rand128>();
        const auto next = sub.sqn_hn + 1;
        kh::AuthVector av;
        try
        {
            av = kh::generate_auth_vector(sub.k, next, rand, req->sn_name);
        }
        catch (const kh::CounterExhausted &)
        {
            fail("counter_exhausted");
            return;
        }
        sim.trace(id(), "arpf_sqn_advanced", json{{"supi", supi.str()}, {"before", sub.sqn_hn}, {"after", next}});
        sub.sqn_hn = next;
        ausf_pending_[{d.from, req->req_id}] = AusfPending{av.xres_star, supi};
        sim.send_net(id(), d.from,
                     wire::secured(wire::AuthVectorResponse{req->req_id, rand, av.autn,
                                                            kh::hash_response(av.xres_star, rand),
                                                            kh::derive_k_seaf(av.k_ausf, req->sn_name)}));
    }
    else if (auto *conf = std::get_if<wire::AuthConfirmRequest>(&d.msg.body))
    {
        auto it = ausf_pending_.find({d.from, conf->req_id});
        if (it == ausf_pending_.end())
        {
            sim.send_net(id(), d.from,
                         wire::secured(wire::AuthConfirmResponse{conf->req_id, false, std::nullopt, "no_pending_vector"}));
            return;
        }
        auto pending = it->second;
        ausf_pending_.erase(it);
        if (!crypto::equal_ct(conf->res_star.view(), pending.xres_star.view()))
        {
            sim.trace(id(), "ausf_rejected", json{{"req_id", conf->req_id}, {"reason", "res_star_mismatch"}});
            sim.send_net(id(), d.from,
                         wire::secured(wire::AuthConfirmResponse{conf->req_id, false, std::nullopt, "res_star_mismatch"}));
            return;
        }
        sim.trace(id(), "ausf_confirmed", json{{"req_id", conf->req_id}, {"supi", pending.supi.str()}});
        sim.trace(id(), "udm_notified", json{{"supi", pending.supi.str()}, {"serving_amf", d.from}});
        sim.send_net(id(), d.from, wire::secured(wire::AuthConfirmResponse{conf->req_id, true, pending.supi, ""}));
    }
}

std::unique_ptr<sim::Entity> make_gnb(const sim::Scenario &s, const sim::GnbSpec &spec, std::uint64_t seed)
{
    return std::make_unique<GnbEntity>(s, spec, seed);
}

std::unique_ptr<sim::Entity> make_amf(const sim::Scenario &s, const sim::AmfSpec &spec, std::uint64_t seed)
{
    return std::make_unique<AmfEntity>(s, spec, seed);
}

std::unique_ptr<sim::Entity> make_home(const sim::Scenario &s, std::uint64_t seed)
{
    return std::make_unique<HomeEntity>(s, seed);
}

} // namespace nrsec::net
