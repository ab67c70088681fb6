#pragma once

// Thin wrappers over OpenSSL. Everything above this header speaks in terms of
// the labelled PRF; nothing else should reach for EVP directly.

#include <nrsec/bytes.hpp>

#include <initializer_list>
#include <string_view>

namespace nrsec::crypto
{

using Digest = std::array<std::uint8_t, 32>;

Digest hmac_sha256(ByteView key, ByteView data);
Digest sha256(ByteView data);

/// Domain-separated input encoding shared by every derivation:
///   u8 len(label) | label | { u16be len(part) | part }*
Bytes encode_prf_input(std::string_view label, std::initializer_list<ByteView> parts);

/// HMAC-SHA256 keyed PRF with a derivation label.
Digest prf(ByteView key, std::string_view label, std::initializer_list<ByteView> parts);

/// X25519 scalar multiplication helpers, used by the identifier concealment scheme.
struct X25519KeyPair
{
    std::array<std::uint8_t, 32> private_key{};
    std::array<std::uint8_t, 32> public_key{};
};

X25519KeyPair x25519_from_private(const std::array<std::uint8_t, 32> &private_key);
std::array<std::uint8_t, 32> x25519_shared(const std::array<std::uint8_t, 32> &private_key,
                                           const std::array<std::uint8_t, 32> &peer_public);

/// Constant-time comparison of equal-length buffers.
bool equal_ct(ByteView a, ByteView b);

} // namespace nrsec::crypto
