#include <nrsec/adversary.hpp>
#include <nrsec/crypto.hpp>
#include <nrsec/engine.hpp>
#include <nrsec/network.hpp>
#include <nrsec/ue.hpp>

namespace nrsec::sim
{

std::string payload_digest(const json &payload)
{
    auto d = crypto::sha256(as_bytes(payload.dump()));
    return to_hex(ByteView(d.data(), 8));
}

json TraceRecord::to_json() const
{
    return json{{"tick", tick},           {"seq", seq},       {"entity", entity},
                {"kind", kind},           {"cleartext", cleartext}, {"digest", payload_digest(payload)},
                {"payload", payload}};
}

TraceRecord TraceRecord::from_json(const json &j)
{
    TraceRecord r;
    r.tick = j.at("tick").get<Tick>();
    r.seq = j.at("seq").get<std::uint64_t>();
    r.entity = j.at("entity").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.cleartext = j.at("cleartext").get<bool>();
    r.payload = j.at("payload");
    return r;
}

std::string TraceRecord::line() const
{
    return to_json().dump();
}

const Topology::Cell *Topology::cell_by_pci(std::uint16_t pci) const
{
    for (const auto &c : cells)
        if (c.pci == pci)
            return &c;
    return nullptr;
}

const Topology::Cell *Topology::cell_by_entity(const EntityId &id) const
{
    for (const auto &c : cells)
        if (c.entity == id)
            return &c;
    return nullptr;
}

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario))
{
    env_.noise_floor_dbm = scenario_.radio.noise_floor_dbm;
    env_.capture_margin_db = scenario_.radio.capture_margin_db;
    for (const auto &l : scenario_.radio.links)
    {
        env_.set_link(l.tx, l.rx, l.dbm);
        if (l.symmetric)
            env_.set_link(l.rx, l.tx, l.dbm);
    }
    for (const auto &g : scenario_.gnbs)
        topology_.cells.push_back({g.id, g.gnb_id, g.pci, g.freq, g.tac, g.plmn, g.amfs});
    for (const auto &a : scenario_.amfs)
        topology_.amfs.insert(a.id);
    for (const auto &u : scenario_.ues)
        topology_.subscribers.emplace(u.id, u.supi);
    build_entities();

    for (const auto &p : scenario_.paging)
    {
        for (Tick t = p.from; t <= p.until && t < scenario_.max_ticks; t += p.every)
        {
            schedule(t, p.amf, TimerEvent{"page:" + p.ue});
            if (p.every == 0)
                break;
        }
    }
}

Simulation::~Simulation() = default;

void Simulation::build_entities()
{
    const auto seed = scenario_.seed;
    auto add = [&](std::unique_ptr<Entity> e) {
        auto id = e->id();
        entities_.emplace(id, std::move(e));
    };
    add(net::make_home(scenario_, seed));
    for (const auto &a : scenario_.amfs)
        add(net::make_amf(scenario_, a, seed));
    for (const auto &g : scenario_.gnbs)
        add(net::make_gnb(scenario_, g, seed));
    for (const auto &u : scenario_.ues)
        add(ue::make_ue(scenario_, u, seed));
    for (const auto &a : scenario_.attackers)
        add(adv::make_attacker(scenario_, a, seed));
}

Entity *Simulation::entity(const EntityId &id)
{
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : it->second.get();
}

void Simulation::trace(const EntityId &entity, const std::string &kind, json payload, bool cleartext)
{
    records_.push_back(TraceRecord{now_, next_record_++, entity, kind, cleartext, std::move(payload)});
}

void Simulation::schedule(Tick at, const EntityId &target, decltype(Event::payload) payload)
{
    queue_.push(Event{at, next_seq_++, target, std::move(payload)});
}

void Simulation::set_timer(const EntityId &entity, Tick delay, std::string token)
{
    schedule(now_ + delay, entity, TimerEvent{std::move(token)});
}

json Simulation::message_record(const EntityId &from, const EntityId &to, const wire::WireMessage &msg,
                                std::optional<std::uint16_t> pci, const char *fate) const
{
    json j{{"from", from}, {"to", to}, {"type", msg.type()}, {"protected", msg.protected_}};
    if (pci)
        j["pci"] = *pci;
    j["fate"] = fate;
    j["msg"] = wire::render(msg);
    return j;
}

void Simulation::send_net(const EntityId &from, const EntityId &to, wire::WireMessage msg)
{
    ++counters_.sent;
    // The backhaul is an assumed-secure channel: nothing on it is cleartext to an observer.
    msg.protected_ = true;
    const bool known = entities_.count(to) > 0;
    trace(from, "net:" + msg.type(), message_record(from, to, msg, std::nullopt, known ? "scheduled" : "dropped"));
    if (!known)
    {
        ++counters_.dropped;
        return;
    }
    if (const auto *req = std::get_if<wire::HandoverRequest>(&msg.body))
        for (const auto &a : scenario_.attackers)
            if (a.mode == AttackMode::FakeBsHandover && a.mim && a.target_pci == req->target_pci &&
                entities_.count(a.id))
            {
                trace(from, "mim_mirror", json{{"attacker", a.id}, {"target_pci", req->target_pci}});
                schedule(now_ + scenario_.timing.net_latency, a.id, Delivery{from, a.id, msg, std::nullopt});
                ++counters_.sent;
                trace(from, "net:" + msg.type(), message_record(from, a.id, msg, std::nullopt, "scheduled"));
            }
    schedule(now_ + scenario_.timing.net_latency, to, Delivery{from, to, std::move(msg), std::nullopt});
}

std::optional<EntityId> Simulation::sync_source(const EntityId &rx, std::uint16_t pci) const
{
    const radio::SsbFrame *best = nullptr;
    double best_power = 0;
    for (const auto &f : frames_)
    {
        if (f.is_overlay || f.pci != pci)
            continue;
        auto p = env_.audible(f.origin, rx);
        if (!p)
            continue;
        if (!best || *p > best_power || (*p == best_power && f.origin < best->origin))
        {
            best = &f;
            best_power = *p;
        }
    }
    if (!best)
        return std::nullopt;
    return best->origin;
}

void Simulation::air_send(const EntityId &from, const EntityId &to, wire::WireMessage msg, std::uint16_t pci,
                          bool uplink)
{
    ++counters_.sent;
    const char *fate = "scheduled";
    auto p = env_.audible(from, to);
    if (!p || !entities_.count(to))
        fate = "dropped_power";
    else if (!uplink)
    {
        // The receiver is locked onto the strongest PSS/SSS source for this
        // PCI; a weaker transmitter using the same cell identity is drowned out.
        if (auto sync = sync_source(to, pci); sync && *sync != from)
            if (*env_.audible(*sync, to) > *p)
                fate = "dropped_capture";
    }
    trace(from, "air:" + msg.type(), message_record(from, to, msg, pci, fate), msg.cleartext());
    const Tick at = now_ + scenario_.timing.air_latency;
    overhear(from, to, msg, pci, uplink, at);
    if (std::string_view(fate) != "scheduled")
    {
        ++counters_.dropped;
        return;
    }
    schedule(at, to, Delivery{from, to, std::move(msg), pci});
}

void Simulation::overhear(const EntityId &from, const EntityId &to, const wire::WireMessage &msg,
                          std::optional<std::uint16_t> pci, bool uplink, Tick at)
{
    for (const auto &[id, e] : entities_)
    {
        if (!e->overhears() || id == from || id == to || !env_.audible(from, id))
            continue;
        Overheard o{from, to, uplink, pci, wire::clear_view(msg), std::nullopt};
        if (msg.cleartext())
            o.content = msg;
        schedule(at, id, OverhearEvent{std::move(o)});
    }
}

void Simulation::send_downlink(const EntityId &from, const EntityId &to, wire::WireMessage msg, std::uint16_t pci)
{
    air_send(from, to, std::move(msg), pci, false);
}

void Simulation::send_uplink(const EntityId &from, std::uint16_t pci, wire::WireMessage msg)
{
    auto target = sync_source(from, pci);
    if (!target)
    {
        ++counters_.sent;
        ++counters_.dropped;
        trace(from, "air:" + msg.type(), message_record(from, "", msg, pci, "dropped_no_cell"), msg.cleartext());
        return;
    }
    air_send(from, *target, std::move(msg), pci, true);
}

void Simulation::broadcast_downlink(const EntityId &from, const wire::WireMessage &msg, std::uint16_t pci)
{
    for (const auto &[id, e] : entities_)
        if (std::string_view(e->role()) == "ue" && env_.audible(from, id))
            air_send(from, id, msg, pci, false);
}

void Simulation::radio_phase()
{
    for (const auto &c : scenario_.radio.changes)
    {
        if (c.at != now_)
            continue;
        env_.set_link(c.link.tx, c.link.rx, c.link.dbm);
        if (c.link.symmetric)
            env_.set_link(c.link.rx, c.link.tx, c.link.dbm);
        trace("engine", "link_change",
              json{{"tx", c.link.tx}, {"rx", c.link.rx}, {"dbm", c.link.dbm}, {"symmetric", c.link.symmetric}});
    }

    frames_.clear();
    for (const auto &[id, e] : entities_)
    {
        for (auto &f : e->transmit_ssb(*this))
        {
            f.origin = id;
            f.validate();
            json j{{"pci", f.pci}, {"beam", f.beam_index}, {"overlay", f.is_overlay}};
            if (f.is_overlay)
            {
                json fields = json::array();
                for (auto fld : f.overlay_fields)
                    fields.push_back(radio::to_string(fld));
                j["fields"] = fields;
            }
            j["mib"] = json{{"sfn", f.mib.sfn},
                            {"cell_barred", f.mib.cell_barred},
                            {"coreset0_locator", f.mib.coreset0_locator}};
            if (f.sib1)
                j["sib1"] = json{{"plmn", f.sib1->plmn_id},
                                 {"tac", f.sib1->tac},
                                 {"cell_id", f.sib1->cell_id},
                                 {"freq", f.sib1->freq},
                                 {"tss_announce", f.sib1->tss_announce}};
            if (f.tss)
                j["tss"] = wire::to_json(*f.tss);
            trace(id, "ssb", std::move(j), true);
            frames_.push_back(std::move(f));
        }
    }

    for (const auto &[id, e] : entities_)
    {
        if (!e->listens_ssb())
            continue;
        auto decoded = radio::deliver_ssb(env_, frames_, id);
        auto measured = radio::measure_cells(env_, frames_, id, now_);
        e->on_ssb(*this, decoded, measured);
    }
}

void Simulation::dispatch(const Event &ev)
{
    Entity *target = entity(ev.target);
    std::visit(
        [&](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Delivery>)
            {
                ++counters_.delivered;
                target->on_message(*this, p);
            }
            else if constexpr (std::is_same_v<T, TimerEvent>)
            {
                if (target)
                    target->on_timer(*this, p.token);
            }
            else
            {
                if (target)
                    target->on_overhear(*this, p.what);
            }
        },
        ev.payload);
}

void Simulation::run()
{
    if (done_)
        throw std::logic_error("simulation already ran");
    trace("engine", "start",
          json{{"scenario", scenario_.name}, {"seed", scenario_.seed}, {"mode", to_string(scenario_.mode)},
               {"max_ticks", scenario_.max_ticks}});
    for (now_ = 0; now_ < scenario_.max_ticks; ++now_)
    {
        radio_phase();
        while (!queue_.empty() && queue_.top().time <= now_)
        {
            Event ev = queue_.top();
            queue_.pop();
            dispatch(ev);
        }
    }
    now_ = scenario_.max_ticks;
    while (!queue_.empty())
    {
        Event ev = queue_.top();
        queue_.pop();
        if (auto *d = std::get_if<Delivery>(&ev.payload))
        {
            ++counters_.expired;
            trace("engine", "expired",
                  json{{"from", d->from}, {"to", d->to}, {"type", d->msg.type()}, {"due", ev.time}});
        }
    }
    for (const auto &[id, e] : entities_)
        e->finish(*this);
    trace("engine", "engine_stats",
          json{{"sent", counters_.sent},
               {"delivered", counters_.delivered},
               {"dropped", counters_.dropped},
               {"expired", counters_.expired}});
    done_ = true;
}

} // namespace nrsec::sim
