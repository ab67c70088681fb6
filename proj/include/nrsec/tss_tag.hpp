#pragma once

#include <nrsec/bytes.hpp>

#include <cstdint>

namespace nrsec::tss
{

using Tick = std::uint64_t;

/// Network-side configuration of the synchronization-signal authentication tag.
struct TssConfig
{
    Key256 network_secret;
    unsigned tag_bits = 64;
    Tick slot_length = 10;
    bool enabled = false;
    /// Experimental: camped UEs check tags at acquisition with a pre-shared secret.
    bool ue_verify = false;

    void validate() const;
};

struct TssTag
{
    std::uint16_t pci = 0;
    std::uint64_t slot = 0;
    Bytes tag; // ceil(bits/8) bytes, unused trailing bits zero

    bool operator==(const TssTag &) const = default;
};

std::uint64_t slot_of(const TssConfig &cfg, Tick now);

/// tag = PRF(secret, pci | slot) truncated to cfg.tag_bits.
TssTag generate_tss(const TssConfig &cfg, std::uint16_t pci, std::uint64_t slot);

/// Truncates a byte string to `bits`, masking the trailing bits of the last byte.
Bytes truncate_bits(ByteView full, unsigned bits);

} // namespace nrsec::tss
