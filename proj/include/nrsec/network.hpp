#pragma once

// Network side: gNB (random access, RRC, handover), AMF/SEAF (registration,
// authentication orchestration, paging) and the home network
// (AUSF/UDM/ARPF/SIDF collapsed into one entity with role-labelled records).

#include <nrsec/engine.hpp>
#include <nrsec/mitigation.hpp>

namespace nrsec::net
{

using sim::EntityId;
using sim::Tick;

/// Picks the AMF for an initial UE message: the previous AMF when this gNB can
/// reach it, otherwise the gNB's default AMF.
struct Route
{
    EntityId amf;
    bool previous = false;
};
Route forward_initial_ue_message(const std::optional<std::string> &prev_amf, const std::vector<EntityId> &reachable,
                                 const EntityId &default_amf);

enum class RegistrationDecision
{
    ReuseContext,
    ContextTransfer,
    Authenticate,
};
const char *to_string(RegistrationDecision d);

/// `local_context` says whether this AMF holds a context matching the
/// request's GUTI and KSI; `other_amf_reachable` whether the GUTI's AMF exists.
RegistrationDecision amf_handle_registration(const wire::RegistrationRequest &req, const EntityId &self,
                                             bool local_context, bool other_amf_reachable);

/// HRES* / HXRES* gate at the serving network.
bool hres_matches(const Res128 &res_star, const Rand128 &rand, const Res128 &hxres_star);

struct HandoverPolicy
{
    sim::Mode mode = sim::Mode::Baseline;
    double trigger_margin_db = 3;
    std::vector<std::uint16_t> ncl;
    tss::TssConfig tss;
};

struct HandoverPlan
{
    /// Best candidate, also set on rejection; act only when reason == "plan".
    std::optional<std::uint16_t> target_pci;
    /// "plan", "no_trigger", "unprotected", "not_in_ncl" or a TSS verdict name.
    std::string reason;
    std::optional<tss::Verdict> verdict;
};

/// Baseline accepts any report received over the protected link and targets
/// the best reported neighbor if it is in the NCL; TSS mode additionally
/// requires a fresh, correct tag for that neighbor.
HandoverPlan decide_handover(const HandoverPolicy &policy, const radio::MeasurementReport &report,
                             bool protected_channel, Tick now);

// ---------------------------------------------------------------------------

class GnbEntity : public sim::Entity
{
  public:
    GnbEntity(const sim::Scenario &s, sim::GnbSpec spec, std::uint64_t seed);

    const char *role() const override { return "gnb"; }
    std::vector<radio::SsbFrame> transmit_ssb(sim::Simulation &sim) override;
    void on_message(sim::Simulation &sim, const sim::Delivery &d) override;
    void on_timer(sim::Simulation &sim, const std::string &token) override;

    const sim::GnbSpec &spec() const { return spec_; }
    std::optional<kh::AsKeys> session_keys(std::uint16_t c_rnti) const;

  private:
    enum class SessionState
    {
        Setup,           // RRC connected, no AS security yet
        Active,          // AS security established
        HandoverOut,     // source side, waiting for the UE to arrive at the target
        HandoverIn,      // target side, waiting for the UE's random access
    };
    struct Session
    {
        std::uint16_t c_rnti = 0;
        EntityId radio;
        SessionState state = SessionState::Setup;
        std::uint64_t amf_ue_id = 0;
        EntityId amf;
        std::optional<kh::AsKeys> keys;
        std::uint32_t nhcc = 0;
        std::uint64_t gen = 0;
        // source side
        EntityId ho_target;
        std::uint16_t ho_target_pci = 0;
        // target side
        EntityId ho_source;
        std::uint16_t ho_source_ran_ue_id = 0;
    };
    struct RaGroup
    {
        std::vector<EntityId> radios;
        std::optional<std::uint64_t> winner;
    };

    void handle_air(sim::Simulation &sim, const sim::Delivery &d);
    void handle_net(sim::Simulation &sim, const sim::Delivery &d);
    void dispatch_rar(sim::Simulation &sim);
    void msg3(sim::Simulation &sim, const EntityId &radio, const wire::RrcSetupRequest &m);
    void measurement_report(sim::Simulation &sim, Session &s, const wire::WireMessage &msg,
                            const radio::MeasurementReport &report);
    void downlink(sim::Simulation &sim, const Session &s, wire::WireMessage msg);
    void touch(sim::Simulation &sim, Session &s);
    void release(sim::Simulation &sim, std::uint16_t c_rnti, const std::string &cause, bool notify_amf);
    std::uint16_t allocate_rnti();
    Session *session_by_radio(const EntityId &radio, std::uint16_t c_rnti);

    sim::GnbSpec spec_;
    std::map<std::uint16_t, Session> sessions_;
    std::map<std::pair<Tick, std::uint32_t>, std::vector<EntityId>> preambles_; // this tick's arrivals
    std::map<std::uint16_t, RaGroup> ra_groups_;                                  // by TC-RNTI
    std::uint16_t next_rnti_ = 0x4601;
    std::uint64_t next_gen_ = 0;
};

// ---------------------------------------------------------------------------

class AmfEntity : public sim::Entity
{
  public:
    AmfEntity(const sim::Scenario &s, sim::AmfSpec spec, std::uint64_t seed);

    const char *role() const override { return "amf"; }
    void on_message(sim::Simulation &sim, const sim::Delivery &d) override;
    void on_timer(sim::Simulation &sim, const std::string &token) override;

    /// Stored context for a subscriber, if registered here.
    std::optional<kh::SecurityContext> context_for(const kh::Supi &supi) const;

  private:
    struct PendingAuth
    {
        Rand128 rand;
        Res128 hxres_star;
        Key256 k_seaf;
        std::uint8_t ksi = 0;
    };
    struct UeRecord
    {
        std::uint64_t amf_ue_id = 0;
        EntityId gnb;
        std::uint16_t ran_ue_id = 0;
        wire::RegistrationRequest request;
        std::optional<kh::Supi> supi;
        std::optional<PendingAuth> pending;
        bool connected = true;
    };
    struct Stored
    {
        kh::Supi supi;
        kh::SecurityContext ctx;
        wire::Guti guti;
        std::uint64_t amf_ue_id = 0; // current UE record, 0 when none
    };
    struct PendingPage
    {
        EntityId ue;
        std::string supi;
        Tick issued = 0;
    };

    void initial_ue_message(sim::Simulation &sim, const sim::Delivery &d, const wire::InitialUeMessage &m);
    void uplink_nas(sim::Simulation &sim, UeRecord &rec, const wire::NasMessage &nas);
    void start_authentication(sim::Simulation &sim, UeRecord &rec);
    void complete_registration(sim::Simulation &sim, UeRecord &rec, kh::SecurityContext ctx, const char *how);
    void fail_registration(sim::Simulation &sim, UeRecord &rec, const std::string &reason);
    void page(sim::Simulation &sim, const EntityId &ue);
    UeRecord *record(std::uint64_t amf_ue_id);
    UeRecord *record_by_ran(const EntityId &gnb, std::uint16_t ran_ue_id);
    Stored *stored_by_tmsi(std::uint32_t tmsi);
    std::vector<std::uint32_t> tracking_area_list(const sim::Simulation &sim) const;

    sim::AmfSpec spec_;
    std::map<std::uint64_t, UeRecord> records_;
    std::map<std::string, Stored> contexts_; // by SUPI text
    std::map<std::uint64_t, PendingPage> pages_;
    std::uint64_t next_amf_ue_id_ = 1;
    std::uint64_t next_page_ = 1;
    unsigned next_ksi_ = 0;
};

// ---------------------------------------------------------------------------

class HomeEntity : public sim::Entity
{
  public:
    HomeEntity(const sim::Scenario &s, std::uint64_t seed);

    const char *role() const override { return "home"; }
    void on_message(sim::Simulation &sim, const sim::Delivery &d) override;

    std::uint64_t sqn_hn(const kh::Supi &supi) const;

  private:
    struct Subscriber
    {
        kh::Supi supi;
        kh::RootKey k;
        std::uint64_t sqn_hn = 0;
    };
    struct AusfPending
    {
        Res128 xres_star;
        kh::Supi supi;
    };

    std::map<std::string, Subscriber> arpf_; // by SUPI text
    kh::HomeKeyPair keys_;
    std::map<std::pair<EntityId, std::uint64_t>, AusfPending> ausf_pending_;
};

std::unique_ptr<sim::Entity> make_gnb(const sim::Scenario &s, const sim::GnbSpec &spec, std::uint64_t seed);
std::unique_ptr<sim::Entity> make_amf(const sim::Scenario &s, const sim::AmfSpec &spec, std::uint64_t seed);
std::unique_ptr<sim::Entity> make_home(const sim::Scenario &s, std::uint64_t seed);

} // namespace nrsec::net
