#include <nrsec/wire.hpp>

#include <type_traits>

namespace nrsec::wire
{

namespace
{

template <typename T>
constexpr const char *body_name()
{
    if constexpr (std::is_same_v<T, RaPreamble>)
        return "RaPreamble";
    else if constexpr (std::is_same_v<T, RandomAccessResponse>)
        return "RandomAccessResponse";
    else if constexpr (std::is_same_v<T, RrcSetupRequest>)
        return "RrcSetupRequest";
    else if constexpr (std::is_same_v<T, ContentionResolution>)
        return "ContentionResolution";
    else if constexpr (std::is_same_v<T, RrcSetupComplete>)
        return "RrcSetupComplete";
    else if constexpr (std::is_same_v<T, RrcSecurityModeCommand>)
        return "RrcSecurityModeCommand";
    else if constexpr (std::is_same_v<T, DlInformationTransfer>)
        return "DlInformationTransfer";
    else if constexpr (std::is_same_v<T, UlInformationTransfer>)
        return "UlInformationTransfer";
    else if constexpr (std::is_same_v<T, MeasurementReportMsg>)
        return "MeasurementReport";
    else if constexpr (std::is_same_v<T, RrcReconfiguration>)
        return "RrcReconfiguration";
    else if constexpr (std::is_same_v<T, RrcReconfigurationComplete>)
        return "RrcReconfigurationComplete";
    else if constexpr (std::is_same_v<T, RrcRelease>)
        return "RrcRelease";
    else if constexpr (std::is_same_v<T, Paging>)
        return "Paging";
    else if constexpr (std::is_same_v<T, UserData>)
        return "UserData";
    else if constexpr (std::is_same_v<T, InitialUeMessage>)
        return "InitialUeMessage";
    else if constexpr (std::is_same_v<T, DownlinkNasTransport>)
        return "DownlinkNasTransport";
    else if constexpr (std::is_same_v<T, UplinkNasTransport>)
        return "UplinkNasTransport";
    else if constexpr (std::is_same_v<T, InitialContextSetupRequest>)
        return "InitialContextSetupRequest";
    else if constexpr (std::is_same_v<T, UeContextReleaseCommand>)
        return "UeContextReleaseCommand";
    else if constexpr (std::is_same_v<T, UeContextReleaseRequest>)
        return "UeContextReleaseRequest";
    else if constexpr (std::is_same_v<T, AuthVectorRequest>)
        return "AuthVectorRequest";
    else if constexpr (std::is_same_v<T, AuthVectorResponse>)
        return "AuthVectorResponse";
    else if constexpr (std::is_same_v<T, AuthVectorFailure>)
        return "AuthVectorFailure";
    else if constexpr (std::is_same_v<T, AuthConfirmRequest>)
        return "AuthConfirmRequest";
    else if constexpr (std::is_same_v<T, AuthConfirmResponse>)
        return "AuthConfirmResponse";
    else if constexpr (std::is_same_v<T, UeContextTransferRequest>)
        return "UeContextTransferRequest";
    else if constexpr (std::is_same_v<T, UeContextTransferResponse>)
        return "UeContextTransferResponse";
    else if constexpr (std::is_same_v<T, HandoverRequest>)
        return "HandoverRequest";
    else if constexpr (std::is_same_v<T, HandoverRequestAck>)
        return "HandoverRequestAck";
    else if constexpr (std::is_same_v<T, HandoverPreparationFailure>)
        return "HandoverPreparationFailure";
    else if constexpr (std::is_same_v<T, HandoverNotify>)
        return "HandoverNotify";
    else if constexpr (std::is_same_v<T, PathSwitchRequest>)
        return "PathSwitchRequest";
    else if constexpr (std::is_same_v<T, PagingRequest>)
        return "PagingRequest";
    else
        static_assert(sizeof(T) == 0, "unnamed message body");
}

constexpr std::size_t kFirstNetworkIndex = std::variant_size_v<Body> - 19;
static_assert(std::is_same_v<std::variant_alternative_t<kFirstNetworkIndex, Body>, InitialUeMessage>);

json identity_json(const Identity &id)
{
    if (auto *suci = std::get_if<kh::Suci>(&id))
        return json{{"suci", to_json(*suci)}};
    return json{{"supi", std::get<kh::Supi>(id).str()}};
}

json guti_json(const Guti &g)
{
    return json{{"amf", g.amf_id}, {"tmsi", g.tmsi}};
}

json context_json(const kh::SecurityContext &c)
{
    return json{{"ksi", c.ksi},         {"k_amf", to_hex(c.k_amf)}, {"k_seaf", to_hex(c.k_seaf)},
                {"sqn", c.sqn},         {"nhcc", c.nhcc}};
}

json body_json(const Body &body)
{
    return std::visit(
        [](const auto &m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RaPreamble>)
                return {{"preamble", m.preamble}, {"occasion", m.occasion}};
            else if constexpr (std::is_same_v<T, RandomAccessResponse>)
                return {{"preamble", m.preamble}, {"occasion", m.occasion}, {"tc_rnti", m.tc_rnti}};
            else if constexpr (std::is_same_v<T, RrcSetupRequest>)
                return {{"tc_rnti", m.tc_rnti}, {"ue_identity", m.ue_identity}, {"cause", m.cause}};
            else if constexpr (std::is_same_v<T, ContentionResolution>)
                return {{"tc_rnti", m.tc_rnti}, {"ue_identity", m.ue_identity}, {"setup", m.setup}};
            else if constexpr (std::is_same_v<T, RrcSetupComplete>)
                return {{"c_rnti", m.c_rnti}, {"nas", render(m.nas)}};
            else if constexpr (std::is_same_v<T, RrcSecurityModeCommand>)
                return {{"c_rnti", m.c_rnti}};
            else if constexpr (std::is_same_v<T, DlInformationTransfer> || std::is_same_v<T, UlInformationTransfer>)
                return {{"c_rnti", m.c_rnti}, {"nas", render(m.nas)}};
            else if constexpr (std::is_same_v<T, MeasurementReportMsg>)
                return {{"c_rnti", m.c_rnti}, {"report", to_json(m.report)}};
            else if constexpr (std::is_same_v<T, RrcReconfiguration>)
                return {{"c_rnti", m.c_rnti},
                        {"target_pci", m.target_pci},
                        {"target_gnb_id", m.target_gnb_id},
                        {"target_freq", m.target_freq},
                        {"new_c_rnti", m.new_c_rnti}};
            else if constexpr (std::is_same_v<T, RrcReconfigurationComplete> || std::is_same_v<T, RrcRelease>)
                return {{"c_rnti", m.c_rnti}};
            else if constexpr (std::is_same_v<T, Paging> || std::is_same_v<T, PagingRequest>)
                return {{"tmsi", m.tmsi}};
            else if constexpr (std::is_same_v<T, UserData>)
                return {{"c_rnti", m.c_rnti}, {"payload", m.payload}};
            else if constexpr (std::is_same_v<T, InitialUeMessage>)
                return {{"gnb", m.gnb}, {"ran_ue_id", m.ran_ue_id}, {"nas", render(m.nas)}};
            else if constexpr (std::is_same_v<T, DownlinkNasTransport> || std::is_same_v<T, UplinkNasTransport>)
                return {{"amf_ue_id", m.amf_ue_id}, {"ran_ue_id", m.ran_ue_id}, {"nas", render(m.nas)}};
            else if constexpr (std::is_same_v<T, InitialContextSetupRequest>)
                return {{"amf_ue_id", m.amf_ue_id},
                        {"ran_ue_id", m.ran_ue_id},
                        {"k_gnb", to_hex(m.k_gnb)},
                        {"nhcc", m.nhcc},
                        {"nas", render(m.nas)}};
            else if constexpr (std::is_same_v<T, UeContextReleaseCommand> || std::is_same_v<T, UeContextReleaseRequest>)
                return {{"amf_ue_id", m.amf_ue_id}, {"ran_ue_id", m.ran_ue_id}, {"cause", m.cause}};
            else if constexpr (std::is_same_v<T, AuthVectorRequest>)
            {
                json j{{"req_id", m.req_id}};
                j.update(identity_json(m.identity));
                j["sn_name"] = m.sn_name;
                return j;
            }
            else if constexpr (std::is_same_v<T, AuthVectorResponse>)
                return {{"req_id", m.req_id},
                        {"rand", to_hex(m.rand)},
                        {"autn", to_json(m.autn)},
                        {"hxres_star", to_hex(m.hxres_star)},
                        {"k_seaf", to_hex(m.k_seaf)}};
            else if constexpr (std::is_same_v<T, AuthVectorFailure>)
                return {{"req_id", m.req_id}, {"reason", m.reason}};
            else if constexpr (std::is_same_v<T, AuthConfirmRequest>)
                return {{"req_id", m.req_id}, {"res_star", to_hex(m.res_star)}};
            else if constexpr (std::is_same_v<T, AuthConfirmResponse>)
                return {{"req_id", m.req_id},
                        {"success", m.success},
                        {"supi", m.supi ? json(m.supi->str()) : json(nullptr)},
                        {"reason", m.reason}};
            else if constexpr (std::is_same_v<T, UeContextTransferRequest>)
                return {{"req_id", m.req_id}, {"guti", guti_json(m.guti)}, {"ksi", m.ksi}};
            else if constexpr (std::is_same_v<T, UeContextTransferResponse>)
                return {{"req_id", m.req_id},
                        {"supi", m.supi ? json(m.supi->str()) : json(nullptr)},
                        {"context", m.context ? context_json(*m.context) : json(nullptr)}};
            else if constexpr (std::is_same_v<T, HandoverRequest>)
                return {{"source_gnb", m.source_gnb}, {"source_ran_ue_id", m.source_ran_ue_id},
                        {"amf_ue_id", m.amf_ue_id},   {"amf", m.amf},
                        {"target_pci", m.target_pci}, {"k_gnb_star", to_hex(m.k_gnb_star)},
                        {"nhcc", m.nhcc}};
            else if constexpr (std::is_same_v<T, HandoverRequestAck>)
                return {{"source_ran_ue_id", m.source_ran_ue_id}, {"new_c_rnti", m.new_c_rnti}};
            else if constexpr (std::is_same_v<T, HandoverPreparationFailure>)
                return {{"source_ran_ue_id", m.source_ran_ue_id}, {"cause", m.cause}};
            else if constexpr (std::is_same_v<T, HandoverNotify>)
                return {{"source_ran_ue_id", m.source_ran_ue_id}};
            else if constexpr (std::is_same_v<T, PathSwitchRequest>)
                return {{"amf_ue_id", m.amf_ue_id}, {"gnb", m.gnb}, {"ran_ue_id", m.ran_ue_id}, {"nhcc", m.nhcc}};
            else
                static_assert(sizeof(T) == 0, "unrendered message body");
        },
        body);
}

} // namespace

const char *to_string(RegistrationType t)
{
    switch (t)
    {
    case RegistrationType::Initial:
        return "initial";
    case RegistrationType::Mobility:
        return "mobility";
    case RegistrationType::Periodic:
        return "periodic";
    case RegistrationType::Service:
        return "service";
    }
    return "?";
}

const char *to_string(AuthFailureCause c)
{
    return c == AuthFailureCause::MacFailure ? "mac_failure" : "sync_failure";
}

Channel WireMessage::channel() const
{
    return body.index() < kFirstNetworkIndex ? Channel::Air : Channel::Network;
}

std::string WireMessage::type() const
{
    return std::visit([](const auto &m) { return std::string(body_name<std::decay_t<decltype(m)>>()); }, body);
}

WireMessage clear(Body b)
{
    return WireMessage{std::move(b), false};
}

WireMessage secured(Body b)
{
    return WireMessage{std::move(b), true};
}

const char *nas_type(const NasMessage &m)
{
    static constexpr const char *names[] = {"RegistrationRequest",   "AuthenticationRequest", "AuthenticationResponse",
                                            "AuthenticationFailure", "RegistrationAccept",    "RegistrationReject",
                                            "RegistrationComplete"};
    return names[m.index()];
}

bool nas_cleartext_by_default(const NasMessage &m)
{
    return !std::holds_alternative<RegistrationAccept>(m) && !std::holds_alternative<RegistrationComplete>(m);
}

json render(const NasMessage &m)
{
    json j{{"type", nas_type(m)}};
    std::visit(
        [&](const auto &n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, RegistrationRequest>)
            {
                j["reg_type"] = to_string(n.type);
                j.update(identity_json(n.identity));
                j["ksi"] = n.ksi;
                j["guti"] = n.guti ? guti_json(*n.guti) : json(nullptr);
                j["prev_amf"] = n.prev_amf ? json(*n.prev_amf) : json(nullptr);
            }
            else if constexpr (std::is_same_v<T, AuthenticationRequest>)
            {
                j["rand"] = to_hex(n.rand);
                j["autn"] = to_json(n.autn);
                j["ksi"] = n.ksi;
            }
            else if constexpr (std::is_same_v<T, AuthenticationResponse>)
                j["res_star"] = to_hex(n.res_star);
            else if constexpr (std::is_same_v<T, AuthenticationFailure>)
                j["cause"] = to_string(n.cause);
            else if constexpr (std::is_same_v<T, RegistrationAccept>)
            {
                j["guti"] = guti_json(n.guti);
                j["tal"] = n.tal;
            }
            else if constexpr (std::is_same_v<T, RegistrationReject>)
                j["cause"] = n.cause;
        },
        m);
    return j;
}

json render(const WireMessage &m)
{
    return body_json(m.body);
}

json clear_view(const WireMessage &m)
{
    if (m.cleartext())
        return render(m);
    // Protected: the message type is visible, plus the NAS fields that stay in
    // the clear for AMF selection (KSI, previous AMF).
    json j{{"type", m.type()}};
    // The RNTI travels in the MAC header, outside PDCP protection.
    std::visit(
        [&](const auto &b) {
            if constexpr (requires { b.c_rnti; })
                j["c_rnti"] = b.c_rnti;
        },
        m.body);
    auto clear_nas = [&](const NasMessage &nas) {
        if (auto *req = std::get_if<RegistrationRequest>(&nas))
        {
            j["nas"] = json{{"type", nas_type(nas)},
                            {"ksi", req->ksi},
                            {"prev_amf", req->prev_amf ? json(*req->prev_amf) : json(nullptr)}};
        }
    };
    if (auto *sc = std::get_if<RrcSetupComplete>(&m.body))
        clear_nas(sc->nas);
    else if (auto *ul = std::get_if<UlInformationTransfer>(&m.body))
        clear_nas(ul->nas);
    return j;
}

json to_json(const kh::Suci &s)
{
    return json{{"plmn", s.plmn_id}, {"key_id", s.home_key_id}, {"ciphertext", to_hex(s.ciphertext)}};
}

json to_json(const kh::Autn &a)
{
    return json{{"concealed_sqn", a.concealed_sqn}, {"amf", a.amf_field}, {"mac", to_hex(a.mac)}};
}

json to_json(const tss::TssTag &t)
{
    return json{{"pci", t.pci}, {"slot", t.slot}, {"tag", to_hex(t.tag)}};
}

json to_json(const radio::MeasurementReport &r)
{
    json entries = json::array();
    for (const auto &e : r.neighbors)
        entries.push_back(json{{"pci", e.pci},
                               {"power_dbm", e.power_dbm},
                               {"tss", e.tss ? to_json(*e.tss) : json(nullptr)},
                               {"origin", e.origin}});
    return json{{"serving_pci", r.serving_pci}, {"serving_power_dbm", r.serving_power_dbm}, {"neighbors", entries}};
}

} // namespace nrsec::wire
