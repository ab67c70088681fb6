#pragma once

// Abstracted broadcast medium. Received powers are declared per directed link;
// there is no path-loss model. What a receiver decodes for a PCI is decided by
// a power-capture rule over all frames carrying that PCI.

#include <nrsec/tss_tag.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace nrsec::radio
{

using EntityId = std::string;
using Tick = std::uint64_t;

constexpr std::uint16_t kMaxPci = 1007;
constexpr std::uint8_t kMaxBeams = 64;

enum class MibField
{
    Sfn,
    CellBarred,
    Coreset0,
};

const char *to_string(MibField f);
MibField mib_field_from_string(const std::string &name);

struct Mib
{
    std::uint32_t sfn = 0;
    bool cell_barred = false;
    std::string coreset0_locator = "cs0";
    bool operator==(const Mib &) const = default;
};

struct RaConfig
{
    std::uint32_t preamble_pool = 64;
    std::uint32_t max_attempts = 4;
    /// RA occasions fall on ticks that are multiples of this period.
    std::uint32_t occasion_period = 2;
    bool operator==(const RaConfig &) const = default;
};

struct Sib1
{
    std::string plmn_id;
    std::uint32_t tac = 0;
    std::uint32_t cell_id = 0; // gNB identity used in AS key derivation
    std::uint32_t freq = 0;    // bearer frequency (ARFCN) used in AS key derivation
    RaConfig ra;
    bool tss_announce = false;
    bool operator==(const Sib1 &) const = default;
};

struct SsbFrame
{
    std::uint16_t pci = 0;
    Mib mib;
    std::uint8_t beam_index = 0;
    EntityId origin;
    bool is_overlay = false;
    /// Fields of `mib` an overlay overwrites; empty for full frames.
    std::set<MibField> overlay_fields;
    /// SIB1 scheduled by this transmitter's CORESET#0; absent on overlays.
    std::optional<Sib1> sib1;
    std::optional<tss::TssTag> tss;

    /// Throws std::invalid_argument when a structural invariant is broken.
    void validate() const;
    bool operator==(const SsbFrame &) const = default;
};

class RadioEnvironment
{
  public:
    double capture_margin_db = 3.0;
    double noise_floor_dbm = -120.0;

    void set_link(const EntityId &tx, const EntityId &rx, double dbm);
    std::optional<double> power(const EntityId &tx, const EntityId &rx) const;
    /// Received power if the link exists and is at or above the noise floor.
    std::optional<double> audible(const EntityId &tx, const EntityId &rx) const;
    double max_link_power() const;
    const std::map<std::pair<EntityId, EntityId>, double> &links() const { return links_; }

  private:
    std::map<std::pair<EntityId, EntityId>, double> links_;
};

struct DecodedFrame
{
    SsbFrame frame; // the base frame with any captured overlay already applied
    double power_dbm = 0;
    bool overlay_captured = false;
};

struct CellMeasurement
{
    std::uint16_t pci = 0;
    double power_dbm = 0;
    Tick measured_at = 0;
    /// Tag carried by the strongest PSS/SSS-bearing frame for this PCI, if any.
    std::optional<tss::TssTag> tss;
    /// Simulation annotation: transmitter of that frame. Never read by UE logic.
    EntityId origin;
};

struct ReportEntry
{
    std::uint16_t pci = 0;
    double power_dbm = 0;
    std::optional<tss::TssTag> tss;
    EntityId origin; // simulation annotation
};

struct MeasurementReport
{
    std::uint16_t serving_pci = 0;
    double serving_power_dbm = 0;
    std::vector<ReportEntry> neighbors;
};

/// One decoded frame per audible PCI, ordered by PCI. The strongest full frame
/// is the base; an overlay for the same PCI replaces its overlay_fields when its
/// received power is at least base + capture margin.
std::vector<DecodedFrame> deliver_ssb(const RadioEnvironment &env, const std::vector<SsbFrame> &frames,
                                      const EntityId &rx);

/// One measurement per audible PCI: the maximum power over full (PSS/SSS
/// bearing) frames for that PCI, whoever transmitted them.
std::vector<CellMeasurement> measure_cells(const RadioEnvironment &env, const std::vector<SsbFrame> &frames,
                                           const EntityId &rx, Tick now);

/// Strongest neighbor at or above serving + margin; ties go to the lowest PCI.
std::optional<std::uint16_t> evaluate_report_trigger(const CellMeasurement &serving,
                                                     const std::vector<CellMeasurement> &neighbors, double margin_db);

} // namespace nrsec::radio
