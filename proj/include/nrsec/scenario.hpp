#pragma once

// Scenario files: loading, validation with key paths, seed-dependent
// provisioning of unspecified secrets, and the normalized echo.

#include <nrsec/key_hierarchy.hpp>
#include <nrsec/radio.hpp>
#include <nrsec/tss_tag.hpp>

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nrsec::sim
{

using EntityId = std::string;
using Tick = std::uint64_t;

constexpr Tick kForever = std::numeric_limits<Tick>::max();

enum class Mode
{
    Baseline,
    Tss,
};
const char *to_string(Mode m);
Mode mode_from_string(const std::string &s);

struct Timing
{
    Tick air_latency = 1;
    Tick net_latency = 1;
    Tick ra_occasion_period = 2;
    /// How long a UE waits for contention resolution after sending a preamble.
    Tick ra_response_window = 6;
    Tick paging_cycle = 32;
    Tick paging_timeout = 48;
    Tick report_interval = 10;
    Tick handover_guard = 40;
    Tick registration_guard = 80;
    Tick registration_backoff = 20;
};

struct LinkSpec
{
    EntityId tx;
    EntityId rx;
    double dbm = 0;
    bool symmetric = true;
};

struct LinkChange
{
    Tick at = 0;
    LinkSpec link;
};

struct RadioSpec
{
    double noise_floor_dbm = -120;
    double capture_margin_db = 3;
    double trigger_margin_db = 3;
    std::vector<LinkSpec> links;
    std::vector<LinkChange> changes;
};

struct HomeSpec
{
    EntityId id = "home";
    std::string plmn;
    std::uint8_t key_id = 1;
    std::optional<std::array<std::uint8_t, 32>> private_key;
};

struct AmfSpec
{
    EntityId id;
    std::string plmn;
    std::string sn_name; // defaults to "5G:mnc<mnc>.mcc<mcc>.3gppnetwork.org"
    bool is_default = false;
};

struct GnbSpec
{
    EntityId id;
    std::uint32_t gnb_id = 0;
    std::uint16_t pci = 0;
    std::uint32_t freq = 0;
    std::uint32_t tac = 0;
    std::string plmn;
    EntityId amf; // default AMF for this gNB
    std::vector<EntityId> amfs;
    std::vector<std::uint16_t> ncl;
    radio::RaConfig ra;
    bool overload = false;
    bool barred = false;
    /// Release idle connected UEs after this many quiet ticks; 0 disables.
    Tick inactivity_release = 0;
};

struct UeSpec
{
    EntityId id;
    kh::Supi supi;
    std::optional<Key256> k;
    std::uint64_t sqn = 1;
    std::vector<std::string> preferred_plmns;
    std::vector<std::string> forbidden_plmns;
    Tick power_on = 0;
    /// Timer-driven re-registration period while idle; 0 disables.
    Tick periodic_registration = 0;
};

enum class AttackMode
{
    SsbSpoof,
    SqnLinkability,
    FakeBsHandover,
};
const char *to_string(AttackMode m);

enum class TagStrategy
{
    Replay, // re-broadcast the tag captured during reconnaissance
    Guess,  // fresh uniformly random tag every frame
    None,
};
const char *to_string(TagStrategy t);

struct AttackerSpec
{
    EntityId id;
    AttackMode mode = AttackMode::SsbSpoof;
    Tick start = 0;
    Tick stop = kForever;
    EntityId victim;
    std::uint16_t target_pci = 0;
    std::optional<std::uint16_t> victim_source_pci;
    // ssb_spoof
    std::optional<bool> overlay_cell_barred;
    std::optional<std::uint32_t> overlay_sfn;
    std::optional<std::string> overlay_coreset0;
    bool full_ssb = false;
    // fake_bs_handover
    bool mim = false;
    TagStrategy tag_strategy = TagStrategy::Replay;
    // sqn_linkability
    std::vector<EntityId> probe_targets;
    unsigned probes_per_target = 1;
};

struct PagingSpec
{
    EntityId ue;
    EntityId amf; // defaults to the default AMF
    Tick from = 0;
    Tick every = 0;
    Tick until = 0;
};

struct Scenario
{
    std::string name = "scenario";
    std::uint64_t seed = 1;
    Tick max_ticks = 200;
    Mode mode = Mode::Baseline;
    bool concealment = true;
    Timing timing;
    RadioSpec radio;
    HomeSpec home;
    std::vector<AmfSpec> amfs;
    std::vector<GnbSpec> gnbs;
    std::vector<UeSpec> ues;
    tss::TssConfig tss;
    bool tss_secret_given = false;
    std::vector<AttackerSpec> attackers;
    std::vector<PagingSpec> paging;

    const AmfSpec &default_amf() const;
    const UeSpec *find_ue(const EntityId &id) const;
    const GnbSpec *find_gnb(const EntityId &id) const;
    const GnbSpec *gnb_by_pci(std::uint16_t pci) const;
};

struct ValidationIssue
{
    std::string path;
    std::string message;
};

class ScenarioError : public std::runtime_error
{
  public:
    explicit ScenarioError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue> &issues() const { return issues_; }
    std::string report() const;

  private:
    std::vector<ValidationIssue> issues_;
};

/// Parses and validates scenario text. Throws ScenarioError listing every
/// problem found, each with the key path it concerns.
Scenario load_scenario(const std::string &text);
Scenario load_scenario_file(const std::string &path);

/// Re-runs the structural checks on an in-memory scenario.
void validate(const Scenario &s);

/// Fills secrets the file left unspecified (UE root keys, home key pair,
/// TSS secret) from seed-derived substreams.
void provision(Scenario &s);

/// Normalized form with every default spelled out.
std::string normalized_yaml(const Scenario &s);

std::string default_sn_name(const std::string &plmn);

} // namespace nrsec::sim
