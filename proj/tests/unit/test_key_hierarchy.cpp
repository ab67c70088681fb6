#include <doctest.h>

#include <nrsec/key_hierarchy.hpp>
#include <nrsec/tss_tag.hpp>

#include <set>

using namespace nrsec;
using namespace nrsec::kh;

namespace
{

// Inputs shared with `key_hierarchy_oracle.py fixed`; expected values below are its output.
RootKey test_key()
{
    RootKey k;
    for (std::size_t i = 0; i < 32; ++i)
        k.k.v[i] = static_cast<std::uint8_t>(i);
    return k;
}

Rand128 test_rand()
{
    Rand128 r;
    for (std::size_t i = 0; i < 16; ++i)
        r.v[i] = static_cast<std::uint8_t>(0xa0 + i);
    return r;
}

const Supi kSupi{"00101", "0000000001"};

struct Chain
{
    AkaSuccess ok;
    Key256 k_ausf;
    ServingKeys serving;
};

Chain run_chain(const RootKey &k, const Rand128 &rand, std::string_view sn, const Supi &supi)
{
    auto av = generate_auth_vector(k, 7, rand, sn);
    auto ok = std::get<AkaSuccess>(verify_autn(k, 6, rand, av.autn));
    auto k_ausf = derive_k_ausf(ok.ck, ok.ik, sn);
    return {ok, k_ausf, derive_serving_keys(k_ausf, sn, supi)};
}

} // namespace

TEST_CASE("auth vector at SQN 7 matches the oracle")
{
    auto av = generate_auth_vector(test_key(), 7, test_rand(), "testnet");
    CHECK(to_hex(av.autn.encode()) == "6697e73091b58000f41ce8261d7b9687");
    CHECK(to_hex(av.xres_star) == "c3e3f123a391c661c2cb6f16ee8a8b21");
    CHECK(to_hex(av.k_ausf) == "c166509a32bf0e3cf02f7ea39fda88aaff427914f89fec902795797d49598657");
    CHECK(Autn::decode(av.autn.encode()) == av.autn);
}

TEST_CASE("verify_autn returns RES and the deconcealed SQN")
{
    auto k = test_key();
    auto av = generate_auth_vector(k, 7, test_rand(), "testnet");
    auto out = verify_autn(k, 6, test_rand(), av.autn);
    REQUIRE(std::holds_alternative<AkaSuccess>(out));
    const auto &ok = std::get<AkaSuccess>(out);
    CHECK(ok.sqn == 7);
    CHECK(to_hex(ok.res) == "66aaea53958874fb8eb78677c1fa724c");
    CHECK(compute_res_star(ok.res, ok.ck, ok.ik, "testnet") == av.xres_star);
}

TEST_CASE("round trip at SQN 1 and the 1 -> 2 advance")
{
    RootKey zero;
    auto av = generate_auth_vector(zero, 1, test_rand(), "testnet");
    CHECK((av.autn.concealed_sqn ^ anonymity_key(zero, test_rand())) == 1);
    auto out = verify_autn(zero, 0, test_rand(), av.autn);
    REQUIRE(std::holds_alternative<AkaSuccess>(out));
    CHECK(std::get<AkaSuccess>(out).sqn == 1);
}

TEST_CASE("verify_autn outcomes")
{
    auto k = test_key();
    auto rand = test_rand();
    auto av = generate_auth_vector(k, 7, rand, "testnet");

    SUBCASE("wrong key")
    {
        RootKey other = k;
        other.k.v[0] ^= 1;
        CHECK(std::holds_alternative<MacFailure>(verify_autn(other, 6, rand, av.autn)));
    }
    SUBCASE("replay after acceptance")
    {
        CHECK(std::holds_alternative<SyncFailure>(verify_autn(k, 7, rand, av.autn)));
    }
    SUBCASE("tampered MAC")
    {
        auto t = av.autn;
        t.mac[3] ^= 0x80;
        CHECK(std::holds_alternative<MacFailure>(verify_autn(k, 6, rand, t)));
    }
    SUBCASE("tampered amf field")
    {
        auto t = av.autn;
        t.amf_field ^= 1;
        CHECK(std::holds_alternative<MacFailure>(verify_autn(k, 6, rand, t)));
    }
    SUBCASE("window edges")
    {
        auto far = generate_auth_vector(k, 1 + kDefaultSqnWindow, rand, "testnet");
        CHECK(std::holds_alternative<AkaSuccess>(verify_autn(k, 1, rand, far.autn)));
        auto beyond = generate_auth_vector(k, 2 + kDefaultSqnWindow, rand, "testnet");
        CHECK(std::holds_alternative<SyncFailure>(verify_autn(k, 1, rand, beyond.autn)));
    }
}

TEST_CASE("counter exhaustion")
{
    CHECK_THROWS_AS(generate_auth_vector(test_key(), kSqnMax, test_rand(), "testnet"), CounterExhausted);
    CHECK_NOTHROW(generate_auth_vector(test_key(), kSqnMax - 1, test_rand(), "testnet"));
}

TEST_CASE("regeneration is bit-identical")
{
    CHECK(generate_auth_vector(test_key(), 9, test_rand(), "n") == generate_auth_vector(test_key(), 9, test_rand(), "n"));
}

TEST_CASE("serving network binding")
{
    auto k = test_key();
    auto av = generate_auth_vector(k, 7, test_rand(), "netA");
    auto ok = std::get<AkaSuccess>(verify_autn(k, 6, test_rand(), av.autn));
    CHECK(compute_res_star(ok.res, ok.ck, ok.ik, "netA") == av.xres_star);
    CHECK(compute_res_star(ok.res, ok.ck, ok.ik, "netB") != av.xres_star);
}

TEST_CASE("hash_response")
{
    auto av = generate_auth_vector(test_key(), 7, test_rand(), "testnet");
    CHECK(to_hex(hash_response(av.xres_star, test_rand())) == "1e87ab6728696dd6fa9c4dec70f68f03");
    auto flipped = av.xres_star;
    flipped.v[15] ^= 0x01;
    CHECK(to_hex(hash_response(flipped, test_rand())) == "e3b26ba709fa18a960a920286650b315");
}

TEST_CASE("serving keys and AS keys match the oracle")
{
    auto c = run_chain(test_key(), test_rand(), "testnet", kSupi);
    CHECK(to_hex(c.k_ausf) == "c166509a32bf0e3cf02f7ea39fda88aaff427914f89fec902795797d49598657");
    CHECK(to_hex(c.serving.k_seaf) == "0c2fac21ef911c81d0a37dabf940c94ddc0429bcbd4c094bcbdd13dc87d521c2");
    CHECK(to_hex(c.serving.k_amf) == "f33b1fbdf6a61d6324c94db3d5c3106e223627ded7fb3fc4c4cc8a349bc2dafa");

    auto other = derive_serving_keys(c.k_ausf, "testnet", Supi{"00101", "0000000002"});
    CHECK(to_hex(other.k_amf) == "f24e18f8afe495a40cf1186a895b4bea0eb65247339e0fd5eff6f7043fc840de");

    auto as = derive_k_gnb(c.serving.k_amf, 0x1001, 632628);
    CHECK(to_hex(as.k_gnb) == "cdc39e977c10d3a05997a89dffaacc0c293d250950cc1e476614bcbb0628e456");
    CHECK(to_hex(derive_k_gnb(c.serving.k_amf, 0x1002, 632628).k_gnb) ==
          "9808f0b3a4525e7d56ab2ff530eb361f4a26e2427e27a2a7d01faee7db261027");
    CHECK(to_hex(derive_k_gnb(c.serving.k_amf, 0x1001, 632640).k_gnb) ==
          "2e94ac677d4b617beca64374cb51c7685bb72eb7559a5b8cc9ec988483bc2e7e");
    CHECK(derive_k_gnb(c.serving.k_amf, 0x1001, 632628) == as);

    CHECK(to_hex(derive_k_gnb_star(as.k_gnb, 0x1002, 0)) ==
          "5f98131ce55db9fb41b7f60678c46ef5a35de86df4e75aa9b6f875ef2694b621");
    CHECK(to_hex(derive_k_gnb_star(as.k_gnb, 0x1002, 1)) ==
          "0c648fb2868aa08544d73fc2638778ddd2fd5f24fe6172a9ab5f63659edd0fb1");
}

TEST_CASE("AS keys stay distinct along a 64-hop handover chain")
{
    auto c = run_chain(test_key(), test_rand(), "testnet", kSupi);
    auto k = derive_k_gnb(c.serving.k_amf, 1, 632628).k_gnb;
    std::set<Key256> seen{k};
    for (std::uint32_t hop = 0; hop < 64; ++hop)
    {
        k = derive_k_gnb_star(k, hop % 2 ? 1 : 2, hop);
        seen.insert(k);
    }
    CHECK(seen.size() == 65);
}

TEST_CASE("security context rejects the reserved KSI")
{
    auto c = run_chain(test_key(), test_rand(), "testnet", kSupi);
    CHECK_THROWS(SecurityContext::establish(kKsiNoContext, c.serving, 2));
    auto ctx = SecurityContext::establish(3, c.serving, 2);
    CHECK(ctx.valid());
    CHECK(ctx.k_amf == c.serving.k_amf);
    CHECK(SecurityContext{}.valid() == false);
}

TEST_CASE("SUCI concealment")
{
    std::array<std::uint8_t, 32> home_priv{}, eph{}, eph2{};
    home_priv.fill(0x11);
    eph.fill(0x22);
    eph2.fill(0x23);
    auto home = HomeKeyPair::from_private(1, home_priv);
    auto suci = conceal_supi(kSupi, home.public_key, 1, eph);

    CHECK(to_hex(suci.ciphertext) == "0faa684ed28867b97f4a6a2dee5df8ce974e76b7018e3f22a1c4cf2678570f202114e7001d0c751c"
                                     "994dad70b4fb449257b2");
    CHECK(deconceal_suci(suci, home) == kSupi);

    auto again = conceal_supi(kSupi, home.public_key, 1, eph2);
    CHECK(again.ciphertext != suci.ciphertext);
    CHECK(deconceal_suci(again, home) == kSupi);

    SUBCASE("tampered byte")
    {
        auto t = suci;
        t.ciphertext[34] ^= 0x01;
        CHECK_THROWS_AS(deconceal_suci(t, home), DeconcealFailure);
    }
    SUBCASE("wrong key pair")
    {
        std::array<std::uint8_t, 32> other{};
        other.fill(0x44);
        CHECK_THROWS_AS(deconceal_suci(suci, HomeKeyPair::from_private(1, other)), DeconcealFailure);
    }
    SUBCASE("key id mismatch")
    {
        auto t = suci;
        t.home_key_id = 2;
        CHECK_THROWS_AS(deconceal_suci(t, home), DeconcealFailure);
    }
    SUBCASE("truncated")
    {
        auto t = suci;
        t.ciphertext.resize(20);
        CHECK_THROWS_AS(deconceal_suci(t, home), DeconcealFailure);
    }
    SUBCASE("no plaintext identity in the ciphertext")
    {
        auto text = to_hex(suci.ciphertext);
        CHECK(text.find(to_hex(as_bytes(kSupi.msin))) == std::string::npos);
    }
}

TEST_CASE("TSS tag generation matches the oracle")
{
    tss::TssConfig cfg;
    cfg.network_secret.v.fill(0x33);
    cfg.enabled = true;
    cfg.tag_bits = 64;
    CHECK(to_hex(tss::generate_tss(cfg, 101, 5).tag) == "c55c6117e426048c");
    cfg.tag_bits = 20;
    auto t = tss::generate_tss(cfg, 101, 5);
    CHECK(to_hex(t.tag) == "c55c60");
    CHECK(t.pci == 101);
    CHECK(t.slot == 5);
}

TEST_CASE("TSS config validation and slots")
{
    tss::TssConfig cfg;
    cfg.tag_bits = 8;
    CHECK_THROWS(cfg.validate());
    cfg.tag_bits = 257;
    CHECK_THROWS(cfg.validate());
    cfg.tag_bits = 64;
    cfg.slot_length = 0;
    CHECK_THROWS(cfg.validate());
    cfg.slot_length = 10;
    CHECK_NOTHROW(cfg.validate());
    CHECK(tss::slot_of(cfg, 0) == 0);
    CHECK(tss::slot_of(cfg, 19) == 1);
    CHECK(tss::slot_of(cfg, 20) == 2);
}
