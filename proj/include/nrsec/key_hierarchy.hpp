#pragma once

// Authentication vectors, AUTN verification and the key derivation chain
//   K -> (CK, IK) -> K_AUSF -> K_SEAF -> K_AMF -> K_gNB -> K_gNB*
// plus identifier concealment. Every function here is pure.
//
// All derivations go through crypto::prf (HMAC-SHA256) with one label per
// step; the labels and input layouts below are the contract the test-vector
// oracle re-implements.

#include <nrsec/bytes.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace nrsec::kh
{

constexpr std::uint64_t kSqnMax = (std::uint64_t{1} << 48) - 1;
constexpr std::uint64_t kDefaultSqnWindow = std::uint64_t{1} << 28;
constexpr std::uint16_t kDefaultAmfField = 0x8000;
/// NAS key set identifier value meaning "no security context".
constexpr std::uint8_t kKsiNoContext = 0x0f;

using GnbId = std::uint32_t;
using Frequency = std::uint32_t;

struct RootKey
{
    Key256 k;
    auto operator<=>(const RootKey &) const = default;
};

struct Supi
{
    std::string plmn_id;
    std::string msin;

    /// Canonical text form, e.g. "imsi-001010000000001".
    std::string str() const { return "imsi-" + plmn_id + msin; }
    auto operator<=>(const Supi &) const = default;
};

/// Concealed identifier. The PLMN stays in the clear so the serving network
/// can route to the right home network; the MSIN is encrypted.
struct Suci
{
    std::string plmn_id;
    std::uint8_t home_key_id = 0;
    /// ephemeral public key (32) | encrypted MSIN | tag (8)
    Bytes ciphertext;
    bool operator==(const Suci &) const = default;
};

struct HomeKeyPair
{
    std::uint8_t key_id = 1;
    std::array<std::uint8_t, 32> private_key{};
    std::array<std::uint8_t, 32> public_key{};

    static HomeKeyPair from_private(std::uint8_t key_id, const std::array<std::uint8_t, 32> &private_key);
};

struct Autn
{
    std::uint64_t concealed_sqn = 0; // 48 bits: SQN xor AK
    std::uint16_t amf_field = kDefaultAmfField;
    std::array<std::uint8_t, 8> mac{};

    /// 16-byte wire form: concealed SQN (6) | AMF (2) | MAC (8)
    Bytes encode() const;
    static Autn decode(ByteView wire);
    bool operator==(const Autn &) const = default;
};

struct AuthVector
{
    Rand128 rand;
    Autn autn;
    Res128 xres_star;
    Key256 k_ausf;
    bool operator==(const AuthVector &) const = default;
};

struct AkaSuccess
{
    Res128 res;
    Key128 ck;
    Key128 ik;
    std::uint64_t sqn = 0; // deconcealed SQN; the caller adopts it as SQN_UE
};
struct MacFailure
{
};
struct SyncFailure
{
    std::uint64_t sqn = 0; // the stale or out-of-window SQN that was rejected
};
using AuthOutcome = std::variant<AkaSuccess, MacFailure, SyncFailure>;

const char *outcome_name(const AuthOutcome &o);

struct ServingKeys
{
    Key256 k_seaf;
    Key256 k_amf;
};

struct NasKeys
{
    Key128 cipher;
    Key128 integrity;
};

struct AsKeys
{
    Key256 k_gnb;
    Key128 rrc_cipher;
    Key128 rrc_integrity;
    bool operator==(const AsKeys &) const = default;
};

/// Per-UE security state. `sqn` is SQN_UE on the UE side and SQN_HN on the ARPF side.
struct SecurityContext
{
    std::uint8_t ksi = kKsiNoContext;
    Key256 k_seaf;
    Key256 k_amf;
    Key128 nas_cipher_key;
    Key128 nas_integrity_key;
    std::uint64_t sqn = 0;
    std::uint32_t nhcc = 0;

    bool valid() const { return ksi != kKsiNoContext; }

    /// Builds a populated context; rejects the reserved KSI.
    static SecurityContext establish(std::uint8_t ksi, const ServingKeys &keys, std::uint64_t sqn);
};

class CounterExhausted : public std::runtime_error
{
  public:
    CounterExhausted() : std::runtime_error("SQN_HN exhausted") {}
};

class DeconcealFailure : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Anonymity key: first 6 bytes of PRF(K, "AK", RAND), as a 48-bit value.
std::uint64_t anonymity_key(const RootKey &k, const Rand128 &rand);

AuthVector generate_auth_vector(const RootKey &k, std::uint64_t sqn_hn, const Rand128 &rand,
                                std::string_view sn_name, std::uint16_t amf_field = kDefaultAmfField);

/// ok iff the MAC verifies and sqn_ue < SQN <= sqn_ue + window.
AuthOutcome verify_autn(const RootKey &k, std::uint64_t sqn_ue, const Rand128 &rand, const Autn &autn,
                        std::uint64_t window = kDefaultSqnWindow);

Res128 compute_res_star(const Res128 &res, const Key128 &ck, const Key128 &ik, std::string_view sn_name);
Res128 hash_response(const Res128 &r, const Rand128 &rand);

Key256 derive_k_ausf(const Key128 &ck, const Key128 &ik, std::string_view sn_name);
Key256 derive_k_seaf(const Key256 &k_ausf, std::string_view sn_name);
Key256 derive_k_amf(const Key256 &k_seaf, const Supi &supi);
ServingKeys derive_serving_keys(const Key256 &k_ausf, std::string_view sn_name, const Supi &supi);
NasKeys derive_nas_keys(const Key256 &k_amf);

AsKeys derive_as_keys(const Key256 &k_gnb);
AsKeys derive_k_gnb(const Key256 &k_amf, GnbId gnb_id, Frequency freq);
Key256 derive_k_gnb_star(const Key256 &k_gnb, GnbId target_gnb_id, std::uint32_t nhcc);

/// Conceals the MSIN under the home network public key. `ephemeral` is the
/// sender's one-time X25519 private scalar, supplied by the caller's RNG.
Suci conceal_supi(const Supi &supi, const std::array<std::uint8_t, 32> &home_public_key, std::uint8_t home_key_id,
                  const std::array<std::uint8_t, 32> &ephemeral);

/// Throws DeconcealFailure on a key-id mismatch, malformed or tampered ciphertext.
Supi deconceal_suci(const Suci &suci, const HomeKeyPair &home);

} // namespace nrsec::kh
