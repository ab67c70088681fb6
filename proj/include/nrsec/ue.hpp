#pragma once

// UE side: cell selection, tracking-area check, random access, registration,
// the AKA responder and handover execution. The free functions are the pure
// decision steps; UeEntity wires them to the event engine.

#include <nrsec/engine.hpp>
#include <nrsec/mitigation.hpp>

#include <functional>
#include <set>

namespace nrsec::ue
{

using sim::Tick;

struct UsimProfile
{
    kh::Supi supi;
    kh::RootKey k;
    std::string hplmn;
    std::vector<std::string> preferred_plmns;
    std::set<std::string> forbidden_plmns;
    std::uint64_t sqn_ue = 0;

    bool plmn_allowed(const std::string &plmn) const;
};

enum class Mode
{
    Off,
    Scanning,
    Camped,
    Connecting,
    Connected,
    HandoverInProgress,
    Barred,
};

const char *to_string(Mode m);
/// The UE transition relation; every ue_state record in a trace must satisfy it.
bool transition_allowed(Mode from, Mode to);
std::optional<Mode> mode_from_string(const std::string &s);

struct Selection
{
    std::optional<std::uint16_t> pci;
    std::vector<std::uint16_t> barred;   // candidates skipped because decoded cell_barred
    std::vector<std::uint16_t> rejected; // PLMN not allowed, or failed tag verification
};

/// Strongest allowed, non-barred cell; ties to the lowest PCI. `accept` can
/// veto candidates (used by the experimental UE-side tag check).
Selection power_on_and_select(const UsimProfile &profile, const std::vector<radio::DecodedFrame> &decoded,
                              const std::function<bool(const radio::DecodedFrame &)> &accept = {});

/// True when the cell's TAC is outside the tracking-area list.
bool check_tracking_area(const std::vector<std::uint32_t> &tal, const radio::Sib1 &sib1);

/// What the UE knows when it builds a registration request.
struct RegistrationInputs
{
    wire::RegistrationType type = wire::RegistrationType::Initial;
    std::optional<kh::SecurityContext> ctx;
    std::optional<wire::Guti> guti;
    bool concealment = true;
    std::array<std::uint8_t, 32> home_public_key{};
    std::uint8_t home_key_id = 1;
    std::array<std::uint8_t, 32> ephemeral{};
};

/// The NAS request and whether it travels protected. The identity is always
/// a fresh SUCI unless concealment is disabled.
std::pair<wire::RegistrationRequest, bool> build_registration_request(const UsimProfile &profile,
                                                                       const RegistrationInputs &in);

struct ChallengeReply
{
    wire::NasMessage reply; // AuthenticationResponse or AuthenticationFailure
    kh::AuthOutcome outcome;
    std::optional<kh::SecurityContext> ctx;
};

/// AKA responder. On success advances profile.sqn_ue and returns the new context.
ChallengeReply respond_to_challenge(UsimProfile &profile, const Rand128 &rand, const kh::Autn &autn,
                                    std::string_view sn_name, std::uint8_t ksi);

/// Paging occasion: a tick where the UE listens, derived from its TMSI.
bool is_paging_occasion(std::uint32_t tmsi, Tick now, Tick cycle);

struct UeConfig
{
    sim::UeSpec spec;
    UsimProfile profile;
    bool concealment = true;
    std::array<std::uint8_t, 32> home_public_key{};
    std::uint8_t home_key_id = 1;
};

class UeEntity : public sim::Entity
{
  public:
    UeEntity(UeConfig cfg, std::uint64_t seed);

    const char *role() const override { return "ue"; }
    bool listens_ssb() const override { return true; }

    void on_ssb(sim::Simulation &sim, const std::vector<radio::DecodedFrame> &decoded,
                const std::vector<radio::CellMeasurement> &measured) override;
    void on_message(sim::Simulation &sim, const sim::Delivery &d) override;
    void on_timer(sim::Simulation &sim, const std::string &token) override;
    void finish(sim::Simulation &sim) override;

    Mode mode() const { return mode_; }
    std::optional<std::uint16_t> serving_pci() const { return serving_pci_; }
    const std::optional<kh::SecurityContext> &context() const { return ctx_; }
    const std::optional<kh::AsKeys> &as_keys() const { return as_keys_; }
    std::uint64_t sqn() const { return cfg_.profile.sqn_ue; }
    const std::optional<wire::Guti> &guti() const { return guti_; }

  private:
    enum class Purpose
    {
        Registration,
        PageResponse,
        Handover,
    };
    enum class RaPhase
    {
        Idle,
        AwaitOccasion,
        AwaitRar,
        AwaitResolution,
    };
    struct RaState
    {
        Purpose purpose = Purpose::Registration;
        RaPhase phase = RaPhase::Idle;
        std::uint16_t pci = 0;
        std::uint32_t attempt = 0;
        std::uint32_t max_attempts = 4;
        std::uint32_t pool = 64;
        std::uint32_t preamble = 0;
        Tick occasion = 0;
        std::uint16_t tc_rnti = 0;
        std::uint64_t identity = 0;
        std::string cause;
    };

    void set_mode(sim::Simulation &sim, Mode next, const std::string &reason);
    void drop_connection();
    void scan(sim::Simulation &sim, const std::vector<radio::DecodedFrame> &decoded);
    void maybe_register(sim::Simulation &sim);
    void start_connection(sim::Simulation &sim, Purpose purpose, wire::RegistrationType type);
    void schedule_attempt(sim::Simulation &sim);
    void ra_retry(sim::Simulation &sim, const std::string &why);
    void ra_failed(sim::Simulation &sim);
    void ra_succeeded(sim::Simulation &sim, std::uint16_t c_rnti);
    void handle_nas(sim::Simulation &sim, const wire::NasMessage &nas);
    void send_nas(sim::Simulation &sim, wire::NasMessage nas, bool protect);
    void measurement_report(sim::Simulation &sim, const std::vector<radio::CellMeasurement> &measured);
    void registration_ended(sim::Simulation &sim, bool success, const std::string &why);
    void note_sync_source(sim::Simulation &sim);
    std::string sn_name() const;

    UeConfig cfg_;
    Mode mode_ = Mode::Off;
    std::optional<std::uint16_t> serving_pci_;
    std::optional<radio::Sib1> serving_sib1_;
    std::optional<std::uint16_t> c_rnti_;
    std::vector<std::uint32_t> tal_;
    std::optional<kh::SecurityContext> ctx_;
    std::optional<kh::AsKeys> as_keys_;
    std::optional<wire::Guti> guti_;
    RaState ra_;
    std::uint64_t ra_gen_ = 0; // invalidates stale RA timers

    bool registered_ = false;
    bool registration_pending_ = false;
    wire::RegistrationType pending_type_ = wire::RegistrationType::Initial;
    std::uint64_t registration_gen_ = 0;
    Tick backoff_until_ = 0;
    bool periodic_due_ = false;
    std::uint64_t periodic_gen_ = 0;
    bool page_pending_ = false;
    Tick next_report_at_ = 0;

    // Handover in progress
    std::optional<kh::AsKeys> pending_as_keys_;
    std::uint16_t ho_target_pci_ = 0;
    std::uint16_t ho_new_c_rnti_ = 0;

    std::optional<std::pair<std::uint16_t, std::string>> last_sync_;
    std::vector<std::uint16_t> last_barred_;
};

std::unique_ptr<sim::Entity> make_ue(const sim::Scenario &s, const sim::UeSpec &spec, std::uint64_t seed);

} // namespace nrsec::ue
