#include <nrsec/crypto.hpp>
#include <nrsec/key_hierarchy.hpp>

namespace nrsec::kh
{

using crypto::prf;

namespace
{

template <typename T>
T truncate(const crypto::Digest &d)
{
    static_assert(T::size <= 32);
    return octets_from<T>(ByteView{d.data(), T::size});
}

Key256 full(const crypto::Digest &d)
{
    return octets_from<Key256>(ByteView{d.data(), d.size()});
}

Bytes ck_ik(const Key128 &ck, const Key128 &ik)
{
    Bytes k(ck.v.begin(), ck.v.end());
    k.insert(k.end(), ik.v.begin(), ik.v.end());
    return k;
}

std::array<std::uint8_t, 8> compute_mac(const RootKey &k, std::uint64_t sqn, const Rand128 &rand,
                                        std::uint16_t amf_field)
{
    auto d = prf(k.k.view(), "MAC", {be_bytes(sqn, 6), rand.view(), be_bytes(amf_field, 2)});
    std::array<std::uint8_t, 8> mac{};
    std::copy_n(d.begin(), mac.size(), mac.begin());
    return mac;
}

Res128 compute_res(const RootKey &k, const Rand128 &rand)
{
    return truncate<Res128>(prf(k.k.view(), "RES", {rand.view()}));
}

Key128 compute_ck(const RootKey &k, const Rand128 &rand)
{
    return truncate<Key128>(prf(k.k.view(), "CK", {rand.view()}));
}

Key128 compute_ik(const RootKey &k, const Rand128 &rand)
{
    return truncate<Key128>(prf(k.k.view(), "IK", {rand.view()}));
}

constexpr std::size_t kSuciPubLen = 32;
constexpr std::size_t kSuciTagLen = 8;

Bytes suci_keystream(const std::array<std::uint8_t, 32> &shared, ByteView eph_pub, std::size_t len)
{
    Bytes ks;
    for (std::uint32_t ctr = 0; ks.size() < len; ++ctr)
    {
        auto block = prf(shared, "SUCI-ENC", {eph_pub, be_bytes(ctr, 4)});
        ks.insert(ks.end(), block.begin(), block.end());
    }
    ks.resize(len);
    return ks;
}

std::array<std::uint8_t, kSuciTagLen> suci_tag(const std::array<std::uint8_t, 32> &shared, std::string_view plmn,
                                               ByteView eph_pub, ByteView ct)
{
    auto d = prf(shared, "SUCI-MAC", {as_bytes(plmn), eph_pub, ct});
    std::array<std::uint8_t, kSuciTagLen> tag{};
    std::copy_n(d.begin(), tag.size(), tag.begin());
    return tag;
}

} // namespace

const char *outcome_name(const AuthOutcome &o)
{
    if (std::holds_alternative<AkaSuccess>(o))
        return "ok";
    if (std::holds_alternative<MacFailure>(o))
        return "mac_failure";
    return "sync_failure";
}

HomeKeyPair HomeKeyPair::from_private(std::uint8_t key_id, const std::array<std::uint8_t, 32> &private_key)
{
    auto kp = crypto::x25519_from_private(private_key);
    return HomeKeyPair{key_id, kp.private_key, kp.public_key};
}

Bytes Autn::encode() const
{
    Bytes out = be_bytes(concealed_sqn, 6);
    auto amf = be_bytes(amf_field, 2);
    out.insert(out.end(), amf.begin(), amf.end());
    out.insert(out.end(), mac.begin(), mac.end());
    return out;
}

Autn Autn::decode(ByteView wire)
{
    if (wire.size() != 16)
        throw std::invalid_argument("AUTN must be 16 bytes");
    Autn a;
    a.concealed_sqn = be_value(wire.subspan(0, 6));
    a.amf_field = static_cast<std::uint16_t>(be_value(wire.subspan(6, 2)));
    std::copy_n(wire.begin() + 8, 8, a.mac.begin());
    return a;
}

SecurityContext SecurityContext::establish(std::uint8_t ksi, const ServingKeys &keys, std::uint64_t sqn)
{
    if (ksi >= kKsiNoContext)
        throw std::invalid_argument("KSI value is reserved or out of range");
    SecurityContext ctx;
    ctx.ksi = ksi;
    ctx.k_seaf = keys.k_seaf;
    ctx.k_amf = keys.k_amf;
    auto nas = derive_nas_keys(keys.k_amf);
    ctx.nas_cipher_key = nas.cipher;
    ctx.nas_integrity_key = nas.integrity;
    ctx.sqn = sqn;
    ctx.nhcc = 0;
    return ctx;
}

std::uint64_t anonymity_key(const RootKey &k, const Rand128 &rand)
{
    auto d = prf(k.k.view(), "AK", {rand.view()});
    return be_value(ByteView{d.data(), 6});
}

AuthVector generate_auth_vector(const RootKey &k, std::uint64_t sqn_hn, const Rand128 &rand,
                                std::string_view sn_name, std::uint16_t amf_field)
{
    if (sqn_hn >= kSqnMax)
        throw CounterExhausted{};

    AuthVector av;
    av.rand = rand;
    av.autn.concealed_sqn = (sqn_hn ^ anonymity_key(k, rand)) & kSqnMax;
    av.autn.amf_field = amf_field;
    av.autn.mac = compute_mac(k, sqn_hn, rand, amf_field);

    auto ck = compute_ck(k, rand);
    auto ik = compute_ik(k, rand);
    av.xres_star = compute_res_star(compute_res(k, rand), ck, ik, sn_name);
    av.k_ausf = derive_k_ausf(ck, ik, sn_name);
    return av;
}

AuthOutcome verify_autn(const RootKey &k, std::uint64_t sqn_ue, const Rand128 &rand, const Autn &autn,
                        std::uint64_t window)
{
    const std::uint64_t sqn = (autn.concealed_sqn ^ anonymity_key(k, rand)) & kSqnMax;
    auto expected = compute_mac(k, sqn, rand, autn.amf_field);
    if (!crypto::equal_ct(expected, autn.mac))
        return MacFailure{};

    if (!(sqn > sqn_ue && sqn - sqn_ue <= window))
        return SyncFailure{sqn};

    return AkaSuccess{compute_res(k, rand), compute_ck(k, rand), compute_ik(k, rand), sqn};
}

Res128 compute_res_star(const Res128 &res, const Key128 &ck, const Key128 &ik, std::string_view sn_name)
{
    return truncate<Res128>(prf(ck_ik(ck, ik), "RES*", {as_bytes(sn_name), res.view()}));
}

Res128 hash_response(const Res128 &r, const Rand128 &rand)
{
    auto d = crypto::sha256(crypto::encode_prf_input("HRES*", {rand.view(), r.view()}));
    return truncate<Res128>(d);
}

Key256 derive_k_ausf(const Key128 &ck, const Key128 &ik, std::string_view sn_name)
{
    return full(prf(ck_ik(ck, ik), "K_AUSF", {as_bytes(sn_name)}));
}

Key256 derive_k_seaf(const Key256 &k_ausf, std::string_view sn_name)
{
    return full(prf(k_ausf.view(), "K_SEAF", {as_bytes(sn_name)}));
}

Key256 derive_k_amf(const Key256 &k_seaf, const Supi &supi)
{
    return full(prf(k_seaf.view(), "K_AMF", {as_bytes(supi.str())}));
}

ServingKeys derive_serving_keys(const Key256 &k_ausf, std::string_view sn_name, const Supi &supi)
{
    ServingKeys keys;
    keys.k_seaf = derive_k_seaf(k_ausf, sn_name);
    keys.k_amf = derive_k_amf(keys.k_seaf, supi);
    return keys;
}

NasKeys derive_nas_keys(const Key256 &k_amf)
{
    return NasKeys{truncate<Key128>(prf(k_amf.view(), "NAS-ENC", {})),
                   truncate<Key128>(prf(k_amf.view(), "NAS-INT", {}))};
}

AsKeys derive_as_keys(const Key256 &k_gnb)
{
    return AsKeys{k_gnb, truncate<Key128>(prf(k_gnb.view(), "RRC-ENC", {})),
                  truncate<Key128>(prf(k_gnb.view(), "RRC-INT", {}))};
}

AsKeys derive_k_gnb(const Key256 &k_amf, GnbId gnb_id, Frequency freq)
{
    return derive_as_keys(full(prf(k_amf.view(), "K_GNB", {be_bytes(gnb_id, 4), be_bytes(freq, 4)})));
}

Key256 derive_k_gnb_star(const Key256 &k_gnb, GnbId target_gnb_id, std::uint32_t nhcc)
{
    return full(prf(k_gnb.view(), "K_GNB*", {be_bytes(target_gnb_id, 4), be_bytes(nhcc, 4)}));
}

Suci conceal_supi(const Supi &supi, const std::array<std::uint8_t, 32> &home_public_key, std::uint8_t home_key_id,
                  const std::array<std::uint8_t, 32> &ephemeral)
{
    auto eph = crypto::x25519_from_private(ephemeral);
    auto shared = crypto::x25519_shared(eph.private_key, home_public_key);

    auto msin = as_bytes(supi.msin);
    auto ks = suci_keystream(shared, eph.public_key, msin.size());
    Bytes ct(msin.size());
    for (std::size_t i = 0; i < ct.size(); ++i)
        ct[i] = msin[i] ^ ks[i];
    auto tag = suci_tag(shared, supi.plmn_id, eph.public_key, ct);

    Suci suci;
    suci.plmn_id = supi.plmn_id;
    suci.home_key_id = home_key_id;
    suci.ciphertext.assign(eph.public_key.begin(), eph.public_key.end());
    suci.ciphertext.insert(suci.ciphertext.end(), ct.begin(), ct.end());
    suci.ciphertext.insert(suci.ciphertext.end(), tag.begin(), tag.end());
    return suci;
}

Supi deconceal_suci(const Suci &suci, const HomeKeyPair &home)
{
    if (suci.home_key_id != home.key_id)
        throw DeconcealFailure("unknown home network key id " + std::to_string(suci.home_key_id));
    if (suci.ciphertext.size() < kSuciPubLen + kSuciTagLen)
        throw DeconcealFailure("SUCI ciphertext too short");

    ByteView all{suci.ciphertext};
    std::array<std::uint8_t, 32> eph_pub{};
    std::copy_n(all.begin(), kSuciPubLen, eph_pub.begin());
    auto ct = all.subspan(kSuciPubLen, all.size() - kSuciPubLen - kSuciTagLen);
    auto tag = all.subspan(all.size() - kSuciTagLen);

    std::array<std::uint8_t, 32> shared{};
    try
    {
        shared = crypto::x25519_shared(home.private_key, eph_pub);
    }
    catch (const std::runtime_error &e)
    {
        throw DeconcealFailure(std::string("SUCI key agreement failed: ") + e.what());
    }
    auto expected = suci_tag(shared, suci.plmn_id, eph_pub, ct);
    if (!crypto::equal_ct(expected, tag))
        throw DeconcealFailure("SUCI integrity check failed");

    auto ks = suci_keystream(shared, eph_pub, ct.size());
    std::string msin(ct.size(), '\0');
    for (std::size_t i = 0; i < ct.size(); ++i)
        msin[i] = static_cast<char>(ct[i] ^ ks[i]);
    return Supi{suci.plmn_id, msin};
}

} // namespace nrsec::kh
