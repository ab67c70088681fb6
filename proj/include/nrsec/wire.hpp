#pragma once

// Every over-the-air and network-side message, as one tagged variant with an
// explicit protection marking. Rendering to JSON is what the trace records;
// `clear_view` is what a passive radio listener can read.

#include <nrsec/key_hierarchy.hpp>
#include <nrsec/radio.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nrsec::wire
{

using json = nlohmann::ordered_json;
using Tick = std::uint64_t;

struct Guti
{
    std::string amf_id;
    std::uint32_t tmsi = 0;
    bool operator==(const Guti &) const = default;
};

enum class RegistrationType
{
    Initial,
    Mobility,
    Periodic,
    Service,
};
const char *to_string(RegistrationType t);

using Identity = std::variant<kh::Suci, kh::Supi>;

// ---- NAS ----

struct RegistrationRequest
{
    RegistrationType type = RegistrationType::Initial;
    Identity identity;
    std::uint8_t ksi = kh::kKsiNoContext;
    std::optional<Guti> guti;
    std::optional<std::string> prev_amf;
};

struct AuthenticationRequest
{
    Rand128 rand;
    kh::Autn autn;
    std::uint8_t ksi = 0;
};

struct AuthenticationResponse
{
    Res128 res_star;
};

enum class AuthFailureCause
{
    MacFailure,
    SyncFailure,
};
const char *to_string(AuthFailureCause c);

struct AuthenticationFailure
{
    AuthFailureCause cause = AuthFailureCause::MacFailure;
};

struct RegistrationAccept
{
    Guti guti;
    std::vector<std::uint32_t> tal;
};

struct RegistrationReject
{
    std::string cause;
};

struct RegistrationComplete
{
};

using NasMessage = std::variant<RegistrationRequest, AuthenticationRequest, AuthenticationResponse,
                                AuthenticationFailure, RegistrationAccept, RegistrationReject, RegistrationComplete>;

// ---- air interface ----

struct RaPreamble
{
    std::uint32_t preamble = 0;
    Tick occasion = 0;
};

struct RandomAccessResponse
{
    std::uint32_t preamble = 0;
    Tick occasion = 0;
    std::uint16_t tc_rnti = 0;
};

/// msg3. `ue_identity` is the 40-bit contention identity, or the target-assigned
/// C-RNTI during handover.
struct RrcSetupRequest
{
    std::uint16_t tc_rnti = 0;
    std::uint64_t ue_identity = 0;
    std::string cause;
};

/// msg4: RRC Setup when `setup`, RRC Reject otherwise.
struct ContentionResolution
{
    std::uint16_t tc_rnti = 0;
    std::uint64_t ue_identity = 0;
    bool setup = true;
};

struct RrcSetupComplete
{
    std::uint16_t c_rnti = 0;
    NasMessage nas;
};

struct RrcSecurityModeCommand
{
    std::uint16_t c_rnti = 0;
};

struct DlInformationTransfer
{
    std::uint16_t c_rnti = 0;
    NasMessage nas;
};

struct UlInformationTransfer
{
    std::uint16_t c_rnti = 0;
    NasMessage nas;
};

struct MeasurementReportMsg
{
    std::uint16_t c_rnti = 0;
    radio::MeasurementReport report;
};

struct RrcReconfiguration
{
    std::uint16_t c_rnti = 0;
    std::uint16_t target_pci = 0;
    std::uint32_t target_gnb_id = 0;
    std::uint32_t target_freq = 0;
    std::uint16_t new_c_rnti = 0;
};

struct RrcReconfigurationComplete
{
    std::uint16_t c_rnti = 0;
};

struct RrcRelease
{
    std::uint16_t c_rnti = 0;
};

struct Paging
{
    std::uint32_t tmsi = 0;
};

/// Opaque relay payload used by the man-in-the-middle variant.
struct UserData
{
    std::uint16_t c_rnti = 0;
    std::string payload;
};

// ---- network side ----

struct InitialUeMessage
{
    std::string gnb;
    std::uint16_t ran_ue_id = 0;
    NasMessage nas;
};

struct DownlinkNasTransport
{
    std::uint64_t amf_ue_id = 0;
    std::uint16_t ran_ue_id = 0;
    NasMessage nas;
};

struct UplinkNasTransport
{
    std::uint64_t amf_ue_id = 0;
    std::uint16_t ran_ue_id = 0;
    NasMessage nas;
};

struct InitialContextSetupRequest
{
    std::uint64_t amf_ue_id = 0;
    std::uint16_t ran_ue_id = 0;
    Key256 k_gnb;
    std::uint32_t nhcc = 0;
    NasMessage nas;
};

struct UeContextReleaseCommand
{
    std::uint64_t amf_ue_id = 0;
    std::uint16_t ran_ue_id = 0;
    std::string cause;
};

struct UeContextReleaseRequest
{
    std::uint64_t amf_ue_id = 0;
    std::uint16_t ran_ue_id = 0;
    std::string cause;
};

struct AuthVectorRequest
{
    std::uint64_t req_id = 0;
    Identity identity;
    std::string sn_name;
};

struct AuthVectorResponse
{
    std::uint64_t req_id = 0;
    Rand128 rand;
    kh::Autn autn;
    Res128 hxres_star;
    Key256 k_seaf;
};

struct AuthVectorFailure
{
    std::uint64_t req_id = 0;
    std::string reason;
};

struct AuthConfirmRequest
{
    std::uint64_t req_id = 0;
    Res128 res_star;
};

struct AuthConfirmResponse
{
    std::uint64_t req_id = 0;
    bool success = false;
    std::optional<kh::Supi> supi;
    std::string reason;
};

struct UeContextTransferRequest
{
    std::uint64_t req_id = 0;
    Guti guti;
    std::uint8_t ksi = 0;
};

struct UeContextTransferResponse
{
    std::uint64_t req_id = 0;
    std::optional<kh::Supi> supi;
    std::optional<kh::SecurityContext> context;
};

struct HandoverRequest
{
    std::string source_gnb;
    std::uint16_t source_ran_ue_id = 0;
    std::uint64_t amf_ue_id = 0;
    std::string amf;
    std::uint16_t target_pci = 0;
    Key256 k_gnb_star;
    std::uint32_t nhcc = 0;
};

struct HandoverRequestAck
{
    std::uint16_t source_ran_ue_id = 0;
    std::uint16_t new_c_rnti = 0;
};

struct HandoverPreparationFailure
{
    std::uint16_t source_ran_ue_id = 0;
    std::string cause;
};

/// Target to source once the UE has arrived; the source drops its session.
struct HandoverNotify
{
    std::uint16_t source_ran_ue_id = 0;
};

struct PathSwitchRequest
{
    std::uint64_t amf_ue_id = 0;
    std::string gnb;
    std::uint16_t ran_ue_id = 0;
    std::uint32_t nhcc = 0;
};

struct PagingRequest
{
    std::uint32_t tmsi = 0;
};

using Body = std::variant<
    // air
    RaPreamble, RandomAccessResponse, RrcSetupRequest, ContentionResolution, RrcSetupComplete, RrcSecurityModeCommand,
    DlInformationTransfer, UlInformationTransfer, MeasurementReportMsg, RrcReconfiguration, RrcReconfigurationComplete,
    RrcRelease, Paging, UserData,
    // network
    InitialUeMessage, DownlinkNasTransport, UplinkNasTransport, InitialContextSetupRequest, UeContextReleaseCommand,
    UeContextReleaseRequest, AuthVectorRequest, AuthVectorResponse, AuthVectorFailure, AuthConfirmRequest,
    AuthConfirmResponse, UeContextTransferRequest, UeContextTransferResponse, HandoverRequest, HandoverRequestAck,
    HandoverPreparationFailure, HandoverNotify, PathSwitchRequest, PagingRequest>;

enum class Channel
{
    Air,
    Network,
};

struct WireMessage
{
    Body body;
    bool protected_ = false;

    bool cleartext() const { return !protected_; }
    Channel channel() const;
    std::string type() const;
};

WireMessage clear(Body b);
WireMessage secured(Body b);

const char *nas_type(const NasMessage &m);
bool nas_cleartext_by_default(const NasMessage &m);

/// Full content, as recorded in the trace (simulation instrumentation).
json render(const WireMessage &m);
json render(const NasMessage &m);
/// What a passive listener can read: everything for cleartext messages,
/// only the explicitly unprotected fields for protected ones.
json clear_view(const WireMessage &m);

json to_json(const kh::Suci &s);
json to_json(const kh::Autn &a);
json to_json(const radio::MeasurementReport &r);
json to_json(const tss::TssTag &t);

} // namespace nrsec::wire
