#include <nrsec/crypto.hpp>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <memory>
#include <stdexcept>

namespace nrsec
{

std::string to_hex(ByteView data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data)
    {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex)
{
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9')
            return c - '0';
        if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
        if (c >= 'A' && c <= 'F')
            return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0)
        throw std::invalid_argument("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Bytes be_bytes(std::uint64_t value, std::size_t width)
{
    Bytes out(width);
    for (std::size_t i = 0; i < width; ++i)
        out[width - 1 - i] = static_cast<std::uint8_t>((value >> (8 * i)) & 0xff);
    return out;
}

std::uint64_t be_value(ByteView data)
{
    std::uint64_t v = 0;
    for (auto b : data)
        v = (v << 8) | b;
    return v;
}

} // namespace nrsec

namespace nrsec::crypto
{

namespace
{

struct PkeyDeleter
{
    void operator()(EVP_PKEY *p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter
{
    void operator()(EVP_PKEY_CTX *p) const { EVP_PKEY_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

} // namespace

Digest hmac_sha256(ByteView key, ByteView data)
{
    Digest out{};
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) ||
        len != out.size())
        throw std::runtime_error("HMAC-SHA256 failed");
    return out;
}

Digest sha256(ByteView data)
{
    Digest out{};
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Bytes encode_prf_input(std::string_view label, std::initializer_list<ByteView> parts)
{
    if (label.size() > 0xff)
        throw std::invalid_argument("PRF label too long");
    Bytes msg;
    msg.push_back(static_cast<std::uint8_t>(label.size()));
    msg.insert(msg.end(), label.begin(), label.end());
    for (auto part : parts)
    {
        if (part.size() > 0xffff)
            throw std::invalid_argument("PRF input part too long");
        msg.push_back(static_cast<std::uint8_t>(part.size() >> 8));
        msg.push_back(static_cast<std::uint8_t>(part.size() & 0xff));
        msg.insert(msg.end(), part.begin(), part.end());
    }
    return msg;
}

Digest prf(ByteView key, std::string_view label, std::initializer_list<ByteView> parts)
{
    return hmac_sha256(key, encode_prf_input(label, parts));
}

X25519KeyPair x25519_from_private(const std::array<std::uint8_t, 32> &private_key)
{
    PkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, private_key.data(), private_key.size()));
    if (!pkey)
        throw std::runtime_error("X25519: cannot load private key");
    X25519KeyPair kp;
    kp.private_key = private_key;
    std::size_t len = kp.public_key.size();
    if (EVP_PKEY_get_raw_public_key(pkey.get(), kp.public_key.data(), &len) <= 0 || len != kp.public_key.size())
        throw std::runtime_error("X25519: cannot export public key");
    return kp;
}

std::array<std::uint8_t, 32> x25519_shared(const std::array<std::uint8_t, 32> &private_key,
                                           const std::array<std::uint8_t, 32> &peer_public)
{
    PkeyPtr priv(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, private_key.data(), private_key.size()));
    PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), peer_public.size()));
    if (!priv || !peer)
        throw std::runtime_error("X25519: cannot load keys");
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(priv.get(), nullptr));
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) <= 0)
        throw std::runtime_error("X25519: derive init failed");
    std::array<std::uint8_t, 32> shared{};
    std::size_t len = shared.size();
    if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) <= 0 || len != shared.size())
        throw std::runtime_error("X25519: derive failed");
    return shared;
}

bool equal_ct(ByteView a, ByteView b)
{
    return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

} // namespace nrsec::crypto
