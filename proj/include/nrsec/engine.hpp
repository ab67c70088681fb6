#pragma once

// Discrete-event core. Time is an integer tick. Every tick starts with a radio
// phase (link changes, SSB broadcast, per-listener capture and measurement),
// then processes the events due at that tick in (time, seq) order.

#include <nrsec/rng.hpp>
#include <nrsec/scenario.hpp>
#include <nrsec/wire.hpp>

#include <map>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace nrsec::sim
{

using json = nlohmann::ordered_json;

struct TraceRecord
{
    Tick tick = 0;
    std::uint64_t seq = 0;
    EntityId entity;
    std::string kind;
    bool cleartext = false;
    json payload;

    json to_json() const;
    static TraceRecord from_json(const json &j);
    /// One line of the trace file, stable field order.
    std::string line() const;
};

std::string payload_digest(const json &payload);

struct Delivery
{
    EntityId from;
    EntityId to;
    wire::WireMessage msg;
    /// Cell identity the message was transmitted under (air messages only).
    std::optional<std::uint16_t> pci;
};

/// What a passive radio listener picks up from someone else's transmission.
struct Overheard
{
    EntityId from; // radio fingerprint of the transmitter
    EntityId to;
    bool uplink = false;
    std::optional<std::uint16_t> pci;
    json clear_view;
    /// Full message, present only when it was sent in the clear.
    std::optional<wire::WireMessage> content;
};

class Simulation;

/// Static view of the deployed network that network entities consult (which
/// gNB owns a PCI, which AMFs exist). Built from the scenario.
struct Topology
{
    struct Cell
    {
        EntityId entity;
        std::uint32_t gnb_id = 0;
        std::uint16_t pci = 0;
        std::uint32_t freq = 0;
        std::uint32_t tac = 0;
        std::string plmn;
        std::vector<EntityId> amfs;
    };
    std::vector<Cell> cells;
    std::set<EntityId> amfs;
    std::map<EntityId, kh::Supi> subscribers; // UE entity -> SUPI, for scripted stimuli

    const Cell *cell_by_pci(std::uint16_t pci) const;
    const Cell *cell_by_entity(const EntityId &id) const;
};

class Entity
{
  public:
    explicit Entity(EntityId id, std::uint64_t seed) : id_(std::move(id)), rng_(seed, id_) {}
    virtual ~Entity() = default;
    Entity(const Entity &) = delete;
    Entity &operator=(const Entity &) = delete;

    const EntityId &id() const { return id_; }
    Rng &rng() { return rng_; }

    virtual const char *role() const = 0;
    virtual bool listens_ssb() const { return false; }
    virtual bool overhears() const { return false; }

    /// Frames this entity broadcasts at the current tick.
    virtual std::vector<radio::SsbFrame> transmit_ssb(Simulation &) { return {}; }
    virtual void on_ssb(Simulation &, const std::vector<radio::DecodedFrame> &,
                        const std::vector<radio::CellMeasurement> &)
    {
    }
    virtual void on_message(Simulation &, const Delivery &) {}
    virtual void on_timer(Simulation &, const std::string &) {}
    virtual void on_overhear(Simulation &, const Overheard &) {}
    /// Called once after the last tick.
    virtual void finish(Simulation &) {}

  private:
    EntityId id_;
    Rng rng_;
};

struct Counters
{
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t expired = 0;
};

class Simulation
{
  public:
    /// The scenario must already be validated and provisioned.
    explicit Simulation(Scenario scenario);
    ~Simulation();

    void run();

    // ---- services for entities ----
    Tick now() const { return now_; }
    const Scenario &scenario() const { return scenario_; }
    const Topology &topology() const { return topology_; }
    const radio::RadioEnvironment &radio() const { return env_; }
    Mode mode() const { return scenario_.mode; }
    const tss::TssConfig &tss() const { return scenario_.tss; }

    void trace(const EntityId &entity, const std::string &kind, json payload, bool cleartext = false);

    /// Network-side message; arrives after the configured backhaul latency.
    void send_net(const EntityId &from, const EntityId &to, wire::WireMessage msg);
    /// Dedicated downlink transmitted under `pci` toward one receiver.
    void send_downlink(const EntityId &from, const EntityId &to, wire::WireMessage msg, std::uint16_t pci);
    /// Uplink toward a cell: received by whichever transmitter the UE is
    /// synchronized to for that PCI (the strongest PSS/SSS source it hears).
    void send_uplink(const EntityId &from, std::uint16_t pci, wire::WireMessage msg);
    /// Downlink broadcast (paging) to every UE that can decode it.
    void broadcast_downlink(const EntityId &from, const wire::WireMessage &msg, std::uint16_t pci);

    void set_timer(const EntityId &entity, Tick delay, std::string token);

    /// Ground-truth instrumentation: which transmitter currently provides the
    /// strongest PSS/SSS for `pci` at `rx`. Never consulted by protocol logic.
    std::optional<EntityId> sync_source(const EntityId &rx, std::uint16_t pci) const;

    const std::vector<TraceRecord> &records() const { return records_; }
    const Counters &counters() const { return counters_; }
    Entity *entity(const EntityId &id);

    template <typename T>
    T *entity_as(const EntityId &id)
    {
        return dynamic_cast<T *>(entity(id));
    }

  private:
    struct TimerEvent
    {
        std::string token;
    };
    struct OverhearEvent
    {
        Overheard what;
    };
    struct Event
    {
        Tick time = 0;
        std::uint64_t seq = 0;
        EntityId target;
        std::variant<Delivery, TimerEvent, OverhearEvent> payload;
    };
    struct Later
    {
        bool operator()(const Event &a, const Event &b) const
        {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    void build_entities();
    void radio_phase();
    void dispatch(const Event &ev);
    void schedule(Tick at, const EntityId &target, decltype(Event::payload) payload);
    void air_send(const EntityId &from, const EntityId &to, wire::WireMessage msg, std::uint16_t pci, bool uplink);
    void overhear(const EntityId &from, const EntityId &to, const wire::WireMessage &msg,
                  std::optional<std::uint16_t> pci, bool uplink, Tick at);
    json message_record(const EntityId &from, const EntityId &to, const wire::WireMessage &msg,
                        std::optional<std::uint16_t> pci, const char *fate) const;

    Scenario scenario_;
    Topology topology_;
    radio::RadioEnvironment env_;
    std::map<EntityId, std::unique_ptr<Entity>> entities_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::vector<radio::SsbFrame> frames_; // frames on air during the current tick
    std::vector<TraceRecord> records_;
    Counters counters_;
    Tick now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_record_ = 0;
    bool done_ = false;
};

} // namespace nrsec::sim
