#pragma once

// Radio adversaries. One entity type covers the three attack modes; what it
// knows comes from its own SSB decoding (reconnaissance) and from overheard
// transmissions, never from other entities' state.

#include <nrsec/engine.hpp>
#include <nrsec/mitigation.hpp>

namespace nrsec::adv
{

using sim::EntityId;
using sim::Tick;

/// What reconnaissance learned about one cell.
struct ReconEntry
{
    radio::Mib mib;
    radio::Sib1 sib1;
    double power_dbm = 0;
    Tick first_seen = 0;
    /// Tag decoded the first time the cell was seen; replayed verbatim.
    std::optional<tss::TssTag> tag;
};

using ReconMap = std::map<std::uint16_t, ReconEntry>;

/// Folds one tick of decoded frames into the map. Only the first sighting of a
/// cell is recorded, except for the received power which tracks the latest value.
void update_recon(ReconMap &map, const std::vector<radio::DecodedFrame> &decoded, Tick now);

/// MIB-only overlay for `pci` carrying the configured fields.
radio::SsbFrame spoof_ssb(const sim::AttackerSpec &spec, Tick now);

/// Full-frame clone of a reconnoitred cell. `guess` supplies the random tag
/// bytes for the guessing strategy.
radio::SsbFrame clone_ssb(const ReconEntry &cell, std::uint16_t pci, Tick now, sim::TagStrategy strategy,
                          const tss::TssConfig &public_params, Rng &guess);

/// Linkability verdict from the failure cause a probed UE returns.
const char *classify_probe(wire::AuthFailureCause cause);

class AttackerEntity : public sim::Entity
{
  public:
    AttackerEntity(sim::AttackerSpec spec, std::uint64_t seed);

    const char *role() const override { return "attacker"; }
    bool listens_ssb() const override { return true; }
    bool overhears() const override { return true; }

    std::vector<radio::SsbFrame> transmit_ssb(sim::Simulation &sim) override;
    void on_ssb(sim::Simulation &sim, const std::vector<radio::DecodedFrame> &decoded,
                const std::vector<radio::CellMeasurement> &measured) override;
    void on_message(sim::Simulation &sim, const sim::Delivery &d) override;
    void on_overhear(sim::Simulation &sim, const sim::Overheard &o) override;
    void finish(sim::Simulation &sim) override;

    const ReconMap &recon() const { return recon_; }

  private:
    struct Captured
    {
        Rand128 rand;
        kh::Autn autn;
        std::uint8_t ksi = 0;
        bool accepted = false;
    };
    struct Probe
    {
        unsigned sent = 0;
        bool outstanding = false;
    };

    bool active(Tick now) const { return now >= spec_.start && now < spec_.stop; }
    void fake_bs_outcome(sim::Simulation &sim);
    void linkability_overhear(sim::Simulation &sim, const sim::Overheard &o);

    sim::AttackerSpec spec_;
    ReconMap recon_;
    std::optional<Captured> captured_;
    std::map<EntityId, Probe> probes_;
    unsigned probes_total_ = 0;
    unsigned probes_correct_ = 0;
    std::map<std::uint16_t, EntityId> fake_sessions_; // tc-rnti -> radio that used it
    unsigned relayed_ = 0;
    bool mirrored_ = false; // a HandoverRequest toward the cloned cell reached us
};

std::unique_ptr<sim::Entity> make_attacker(const sim::Scenario &s, const sim::AttackerSpec &spec,
                                           std::uint64_t seed);

} // namespace nrsec::adv
