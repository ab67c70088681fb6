#include <nrsec/adversary.hpp>

#include <algorithm>

namespace nrsec::adv
{

using json = sim::json;

void update_recon(ReconMap &map, const std::vector<radio::DecodedFrame> &decoded, Tick now)
{
    for (const auto &d : decoded)
    {
        if (!d.frame.sib1)
            continue;
        auto [it, fresh] = map.try_emplace(d.frame.pci);
        if (fresh)
        {
            it->second.mib = d.frame.mib;
            it->second.sib1 = *d.frame.sib1;
            it->second.first_seen = now;
            it->second.tag = d.frame.tss;
        }
        it->second.power_dbm = d.power_dbm;
    }
}

radio::SsbFrame spoof_ssb(const sim::AttackerSpec &spec, Tick now)
{
    radio::SsbFrame f;
    f.pci = spec.target_pci;
    f.mib.sfn = static_cast<std::uint32_t>(now % 1024);
    if (spec.overlay_sfn)
        f.mib.sfn = *spec.overlay_sfn;
    if (spec.overlay_cell_barred)
        f.mib.cell_barred = *spec.overlay_cell_barred;
    if (spec.overlay_coreset0)
        f.mib.coreset0_locator = *spec.overlay_coreset0;
    if (spec.full_ssb)
        return f;
    f.is_overlay = true;
    if (spec.overlay_sfn)
        f.overlay_fields.insert(radio::MibField::Sfn);
    if (spec.overlay_cell_barred)
        f.overlay_fields.insert(radio::MibField::CellBarred);
    if (spec.overlay_coreset0)
        f.overlay_fields.insert(radio::MibField::Coreset0);
    return f;
}

radio::SsbFrame clone_ssb(const ReconEntry &cell, std::uint16_t pci, Tick now, sim::TagStrategy strategy,
                          const tss::TssConfig &public_params, Rng &guess)
{
    radio::SsbFrame f;
    f.pci = pci;
    f.mib = cell.mib;
    f.mib.sfn = static_cast<std::uint32_t>(now % 1024);
    f.mib.cell_barred = false;
    f.sib1 = cell.sib1;
    switch (strategy)
    {
    case sim::TagStrategy::Replay:
        f.tss = cell.tag;
        break;
    case sim::TagStrategy::Guess:
        if (cell.sib1.tss_announce)
        {
            Bytes raw((public_params.tag_bits + 7) / 8);
            guess.fill(raw);
            f.tss = tss::TssTag{pci, tss::slot_of(public_params, now), tss::truncate_bits(raw, public_params.tag_bits)};
        }
        break;
    case sim::TagStrategy::None:
        break;
    }
    return f;
}

const char *classify_probe(wire::AuthFailureCause cause)
{
    return cause == wire::AuthFailureCause::SyncFailure ? "victim" : "not_victim";
}

AttackerEntity::AttackerEntity(sim::AttackerSpec spec, std::uint64_t seed)
    : Entity(spec.id, seed), spec_(std::move(spec))
{
    for (const auto &t : spec_.probe_targets)
        probes_[t];
}

std::vector<radio::SsbFrame> AttackerEntity::transmit_ssb(sim::Simulation &sim)
{
    const Tick now = sim.now();
    if (!active(now))
        return {};
    switch (spec_.mode)
    {
    case sim::AttackMode::SsbSpoof: {
        auto f = spoof_ssb(spec_, now);
        if (spec_.full_ssb)
        {
            // A standalone fake cell needs a SIB1; borrow the victim cell's if known.
            auto it = recon_.find(spec_.target_pci);
            if (it == recon_.end())
                return {};
            f.sib1 = it->second.sib1;
        }
        return {f};
    }
    case sim::AttackMode::FakeBsHandover: {
        auto it = recon_.find(spec_.target_pci);
        if (it == recon_.end())
            return {};
        return {clone_ssb(it->second, spec_.target_pci, now, spec_.tag_strategy, sim.tss(), rng())};
    }
    case sim::AttackMode::SqnLinkability:
        return {};
    }
    return {};
}

void AttackerEntity::on_ssb(sim::Simulation &sim, const std::vector<radio::DecodedFrame> &decoded,
                            const std::vector<radio::CellMeasurement> &)
{
    const auto before = recon_.size();
    update_recon(recon_, decoded, sim.now());
    if (recon_.size() != before)
    {
        json cells = json::array();
        for (const auto &[pci, e] : recon_)
            cells.push_back(json{{"pci", pci}, {"tac", e.sib1.tac}, {"tagged", e.tag.has_value()}});
        sim.trace(id(), "recon", json{{"cells", cells}});
    }
}

void AttackerEntity::on_message(sim::Simulation &sim, const sim::Delivery &d)
{
    if (spec_.mode != sim::AttackMode::FakeBsHandover || !active(sim.now()))
        return;
    if (const auto *req = std::get_if<wire::HandoverRequest>(&d.msg.body); req && !d.pci)
    {
        if (spec_.mim)
        {
            mirrored_ = true;
            sim.trace(id(), "mim_mirror_received", json{{"from", d.from}, {"nhcc", req->nhcc}});
        }
        return;
    }
    if (!d.pci || *d.pci != spec_.target_pci)
        return;
    const auto pci = spec_.target_pci;
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, wire::RaPreamble>)
            {
                auto tc = static_cast<std::uint16_t>(0x4601 + rng().below(0xfff0 - 0x4601));
                fake_sessions_[tc] = d.from;
                sim.trace(id(), "fake_bs_preamble", json{{"from", d.from}, {"tc_rnti", tc}});
                sim.send_downlink(id(), d.from, wire::clear(wire::RandomAccessResponse{m.preamble, m.occasion, tc}),
                                  pci);
            }
            else if constexpr (std::is_same_v<T, wire::RrcSetupRequest>)
            {
                if (!spec_.mim)
                {
                    sim.trace(id(), "fake_bs_absorbed", json{{"from", d.from}, {"cause", m.cause}});
                    return;
                }
                sim.send_downlink(id(), d.from,
                                  wire::clear(wire::ContentionResolution{m.tc_rnti, m.ue_identity, true}), pci);
            }
            else if constexpr (std::is_same_v<T, wire::RrcReconfigurationComplete>)
            {
                if (!spec_.mim)
                    return;
                ++relayed_;
                sim.trace(id(), "mim_session", json{{"from", d.from}, {"c_rnti", m.c_rnti}, {"mirrored", mirrored_}});
                sim.send_downlink(id(), d.from, wire::clear(wire::UserData{m.c_rnti, "relay"}), pci);
            }
        },
        d.msg.body);
}

void AttackerEntity::on_overhear(sim::Simulation &sim, const sim::Overheard &o)
{
    if (spec_.mode == sim::AttackMode::SqnLinkability && active(sim.now()))
        linkability_overhear(sim, o);
}

void AttackerEntity::linkability_overhear(sim::Simulation &sim, const sim::Overheard &o)
{
    if (o.content)
    {
        if (auto *dl = std::get_if<wire::DlInformationTransfer>(&o.content->body); dl && !o.uplink)
        {
            if (auto *req = std::get_if<wire::AuthenticationRequest>(&dl->nas);
                req && o.to == spec_.victim && !(captured_ && captured_->accepted))
            {
                captured_ = Captured{req->rand, req->autn, req->ksi, false};
                sim.trace(id(), "challenge_captured", json{{"target", o.to}, {"rand", to_hex(req->rand)}});
            }
            return;
        }
        if (auto *ul = std::get_if<wire::UlInformationTransfer>(&o.content->body); ul && o.uplink)
        {
            if (std::holds_alternative<wire::AuthenticationResponse>(ul->nas) && o.from == spec_.victim &&
                captured_ && !captured_->accepted)
            {
                captured_->accepted = true;
                sim.trace(id(), "challenge_confirmed", json{{"target", o.from}});
            }
            else if (auto *fail = std::get_if<wire::AuthenticationFailure>(&ul->nas))
            {
                auto it = probes_.find(o.from);
                if (it == probes_.end() || !it->second.outstanding)
                    return;
                it->second.outstanding = false;
                const std::string verdict = classify_probe(fail->cause);
                const std::string truth = o.from == spec_.victim ? "victim" : "not_victim";
                ++probes_total_;
                if (verdict == truth)
                    ++probes_correct_;
                sim.trace(id(), "linkability_probe",
                          json{{"target", o.from},
                               {"cause", wire::to_string(fail->cause)},
                               {"verdict", verdict},
                               {"truth", truth},
                               {"correct", verdict == truth}});
            }
            return;
        }
    }

    // A UE with a stored context re-registering: replay the captured challenge
    // at its RNTI before the network answers.
    if (!o.uplink || !captured_ || !captured_->accepted || !o.pci)
        return;
    const auto &view = o.clear_view;
    if (!view.contains("c_rnti") || !view.contains("nas"))
        return;
    const auto &nas = view["nas"];
    if (nas.value("type", "") != "RegistrationRequest" || nas.value("ksi", kh::kKsiNoContext) == kh::kKsiNoContext)
        return;
    auto it = probes_.find(o.from);
    if (it == probes_.end() || it->second.outstanding || it->second.sent >= spec_.probes_per_target)
        return;
    ++it->second.sent;
    it->second.outstanding = true;
    const auto c_rnti = view["c_rnti"].get<std::uint16_t>();
    sim.trace(id(), "probe_sent", json{{"target", o.from}, {"c_rnti", c_rnti}, {"pci", *o.pci}});
    sim.send_downlink(id(), o.from,
                      wire::clear(wire::DlInformationTransfer{
                          c_rnti, wire::AuthenticationRequest{captured_->rand, captured_->autn, captured_->ksi}}),
                      *o.pci);
}

void AttackerEntity::fake_bs_outcome(sim::Simulation &sim)
{
    bool report_triggered = false;
    bool handover_initiated = false;
    std::uint64_t pages_missed = 0;
    Tick captured_ticks = 0;
    bool captured = false;
    Tick captured_since = 0;
    bool user_data = false;

    for (const auto &r : sim.records())
    {
        if (r.entity == spec_.victim && r.kind == "measurement_report")
        {
            for (const auto &n : r.payload["neighbors"])
                if (n["origin"] == id())
                    report_triggered = true;
        }
        else if (r.kind == "air:RrcReconfiguration" && r.payload["to"] == spec_.victim && active(r.tick) &&
                 r.payload["msg"]["target_pci"] == spec_.target_pci)
            handover_initiated = true;
        else if (r.kind == "page_missed" && r.payload["ue"] == spec_.victim)
            ++pages_missed;
        else if (r.entity == spec_.victim && r.kind == "sync_source")
        {
            const bool ours = r.payload["origin"] == id();
            if (ours && !captured)
                captured_since = r.tick;
            else if (!ours && captured)
                captured_ticks += r.tick - captured_since;
            captured = ours;
        }
        else if (r.entity == spec_.victim && r.kind == "user_data")
            user_data = true;
    }
    if (captured)
        captured_ticks += sim.now() - captured_since;

    sim.trace(id(), "attack_outcome",
              json{{"mode", to_string(spec_.mode)},
                   {"victim", spec_.victim},
                   {"target_pci", spec_.target_pci},
                   {"variant", spec_.mim ? "mim" : "dos"},
                   {"tag_strategy", to_string(spec_.tag_strategy)},
                   {"report_triggered", report_triggered},
                   {"handover_initiated", handover_initiated},
                   {"ue_captured_ticks", captured_ticks},
                   {"pages_missed", pages_missed},
                   {"relay_established", user_data}});
}

void AttackerEntity::finish(sim::Simulation &sim)
{
    switch (spec_.mode)
    {
    case sim::AttackMode::FakeBsHandover:
        fake_bs_outcome(sim);
        break;
    case sim::AttackMode::SqnLinkability: {
        json j{{"mode", to_string(spec_.mode)},
               {"victim", spec_.victim},
               {"challenge_captured", captured_ && captured_->accepted},
               {"probes", probes_total_},
               {"correct", probes_correct_}};
        j["accuracy"] = probes_total_ ? json(double(probes_correct_) / probes_total_) : json(nullptr);
        sim.trace(id(), "attack_outcome", std::move(j));
        break;
    }
    case sim::AttackMode::SsbSpoof: {
        std::map<EntityId, bool> camped;
        for (const auto &u : sim.scenario().ues)
            camped[u.id] = false;
        for (const auto &r : sim.records())
            if (r.kind == "camp" && camped.count(r.entity) && r.payload["pci"] == spec_.target_pci && active(r.tick))
                camped[r.entity] = true;
        json per_ue = json::object();
        for (const auto &[ue, c] : camped)
            per_ue[ue] = c;
        sim.trace(id(), "attack_outcome",
                  json{{"mode", to_string(spec_.mode)}, {"target_pci", spec_.target_pci}, {"camped_on_target", per_ue}});
        break;
    }
    }
}

std::unique_ptr<sim::Entity> make_attacker(const sim::Scenario &, const sim::AttackerSpec &spec, std::uint64_t seed)
{
    return std::make_unique<AttackerEntity>(spec, seed);
}

} // namespace nrsec::adv
