#include <nrsec/key_hierarchy.hpp>
#include <nrsec/rng.hpp>
#include <nrsec/tss_tag.hpp>
#include <nrsec/vectors.hpp>

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nrsec::vectors
{

using json = nlohmann::ordered_json;

std::vector<SeedLine> parse_seed_file(const std::string &text)
{
    std::vector<SeedLine> out;
    std::istringstream in(text);
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n)
    {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string seed, count, extra;
        if (!(fields >> seed))
            continue;
        fields >> count >> extra;
        auto number = [&](const std::string &s) {
            if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 19)
                throw std::invalid_argument("seed file line " + std::to_string(n) + ": expected '<seed> [count]'");
            return std::stoull(s);
        };
        if (!extra.empty())
            throw std::invalid_argument("seed file line " + std::to_string(n) + ": expected '<seed> [count]'");
        SeedLine s{number(seed), 1000};
        if (!count.empty())
            s.count = number(count);
        out.push_back(s);
    }
    return out;
}

namespace
{

std::string digits(Rng &rng, std::size_t n)
{
    std::string s;
    for (std::size_t i = 0; i < n; ++i)
        s.push_back(static_cast<char>('0' + rng.below(10)));
    return s;
}

template <std::size_t N>
std::array<std::uint8_t, N> raw(Rng &rng)
{
    std::array<std::uint8_t, N> a{};
    rng.fill(a);
    return a;
}

std::string hex(const std::array<std::uint8_t, 32> &a)
{
    return to_hex(ByteView{a.data(), a.size()});
}

} // namespace

json make_vector(std::uint64_t seed, std::size_t index)
{
    Rng rng(seed, "vectors/" + std::to_string(index));

    const kh::RootKey k{rng.octets<Key256>()};
    const auto rand = rng.octets<Rand128>();
    const std::uint64_t sqn = 1 + rng.below(kh::kSqnMax - 1);
    const auto amf_field = static_cast<std::uint16_t>(rng.bits(16));
    const std::string mcc = digits(rng, 3), mnc = digits(rng, 2);
    const kh::Supi supi{mcc + mnc, digits(rng, 10)};
    const std::string sn_name = "5G:mnc0" + mnc + ".mcc" + mcc + ".3gppnetwork.org";
    const auto gnb_id = static_cast<std::uint32_t>(rng.bits(32));
    const auto freq = static_cast<std::uint32_t>(rng.bits(32));
    const auto target_gnb_id = static_cast<std::uint32_t>(rng.bits(32));
    const auto nhcc = static_cast<std::uint32_t>(rng.bits(16));
    const auto home_private = raw<32>(rng);
    const auto ephemeral = raw<32>(rng);
    tss::TssConfig tss_cfg;
    tss_cfg.network_secret = rng.octets<Key256>();
    tss_cfg.tag_bits = static_cast<unsigned>(16 + rng.below(241));
    tss_cfg.enabled = true;
    const auto pci = static_cast<std::uint16_t>(rng.below(1008));
    const std::uint64_t slot = rng.bits(40);

    json in{{"k", to_hex(k.k)},
            {"rand", to_hex(rand)},
            {"sqn", sqn},
            {"amf_field", amf_field},
            {"sn_name", sn_name},
            {"supi_plmn", supi.plmn_id},
            {"supi_msin", supi.msin},
            {"gnb_id", gnb_id},
            {"freq", freq},
            {"target_gnb_id", target_gnb_id},
            {"nhcc", nhcc},
            {"home_private", hex(home_private)},
            {"home_key_id", 1},
            {"ephemeral", hex(ephemeral)},
            {"tss_secret", to_hex(tss_cfg.network_secret)},
            {"pci", pci},
            {"slot", slot},
            {"tag_bits", tss_cfg.tag_bits}};

    const auto av = kh::generate_auth_vector(k, sqn, rand, sn_name, amf_field);
    const auto fresh = kh::verify_autn(k, sqn - 1, rand, av.autn);
    const auto &ok = std::get<kh::AkaSuccess>(fresh);
    auto tampered = av.autn;
    tampered.mac[0] ^= 0x01;

    const auto res_star = kh::compute_res_star(ok.res, ok.ck, ok.ik, sn_name);
    const auto k_ausf = kh::derive_k_ausf(ok.ck, ok.ik, sn_name);
    const auto serving = kh::derive_serving_keys(k_ausf, sn_name, supi);
    const auto nas = kh::derive_nas_keys(serving.k_amf);
    const auto as = kh::derive_k_gnb(serving.k_amf, gnb_id, freq);
    const auto k_star = kh::derive_k_gnb_star(as.k_gnb, target_gnb_id, nhcc);
    const auto as_star = kh::derive_as_keys(k_star);
    const auto home = kh::HomeKeyPair::from_private(1, home_private);
    const auto suci = kh::conceal_supi(supi, home.public_key, home.key_id, ephemeral);
    const auto back = kh::deconceal_suci(suci, home);
    const auto tag = tss::generate_tss(tss_cfg, pci, slot);

    json out{{"ak", to_hex(be_bytes(kh::anonymity_key(k, rand), 6))},
             {"autn", to_hex(av.autn.encode())},
             {"res", to_hex(ok.res)},
             {"ck", to_hex(ok.ck)},
             {"ik", to_hex(ok.ik)},
             {"xres_star", to_hex(av.xres_star)},
             {"res_star", to_hex(res_star)},
             {"hxres_star", to_hex(kh::hash_response(av.xres_star, rand))},
             {"k_ausf", to_hex(k_ausf)},
             {"k_seaf", to_hex(serving.k_seaf)},
             {"k_amf", to_hex(serving.k_amf)},
             {"nas_enc", to_hex(nas.cipher)},
             {"nas_int", to_hex(nas.integrity)},
             {"k_gnb", to_hex(as.k_gnb)},
             {"rrc_enc", to_hex(as.rrc_cipher)},
             {"rrc_int", to_hex(as.rrc_integrity)},
             {"k_gnb_star", to_hex(k_star)},
             {"rrc_enc_star", to_hex(as_star.rrc_cipher)},
             {"rrc_int_star", to_hex(as_star.rrc_integrity)},
             {"home_public", hex(home.public_key)},
             {"suci", to_hex(suci.ciphertext)},
             {"suci_roundtrip", back == supi},
             {"verify_fresh", kh::outcome_name(fresh)},
             {"verify_replay", kh::outcome_name(kh::verify_autn(k, sqn, rand, av.autn))},
             {"verify_tampered", kh::outcome_name(kh::verify_autn(k, sqn - 1, rand, tampered))},
             {"tss_tag", to_hex(tag.tag)}};

    return json{{"seed", seed}, {"index", index}, {"input", in}, {"output", out}};
}

void emit(const std::vector<SeedLine> &seeds, std::ostream &out)
{
    for (const auto &s : seeds)
        for (std::size_t i = 0; i < s.count; ++i)
            out << make_vector(s.seed, i).dump() << '\n';
}

} // namespace nrsec::vectors
