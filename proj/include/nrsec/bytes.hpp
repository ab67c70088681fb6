#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nrsec
{

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Fixed-width opaque value. Distinct Tag types keep keys, nonces and tags
/// from being mixed up even when they share a width.
template <std::size_t N, typename Tag>
struct Octets
{
    static constexpr std::size_t size = N;
    std::array<std::uint8_t, N> v{};

    ByteView view() const { return {v.data(), N}; }
    auto operator<=>(const Octets &) const = default;
};

struct Key256Tag;
struct Key128Tag;
struct RandTag;
struct ResTag;

using Key256 = Octets<32, Key256Tag>;
using Key128 = Octets<16, Key128Tag>;
using Rand128 = Octets<16, RandTag>;
using Res128 = Octets<16, ResTag>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

template <std::size_t N, typename Tag>
std::string to_hex(const Octets<N, Tag> &o)
{
    return to_hex(o.view());
}

template <typename T>
T octets_from_hex(std::string_view hex)
{
    Bytes raw = from_hex(hex);
    if (raw.size() != T::size)
        throw std::invalid_argument("hex value has " + std::to_string(raw.size()) + " bytes, expected " +
                                    std::to_string(T::size));
    T out;
    std::copy(raw.begin(), raw.end(), out.v.begin());
    return out;
}

template <typename T>
T octets_from(ByteView src)
{
    T out;
    for (std::size_t i = 0; i < T::size && i < src.size(); ++i)
        out.v[i] = src[i];
    return out;
}

/// Big-endian encoding of the low `width` bytes of `value`.
Bytes be_bytes(std::uint64_t value, std::size_t width);
std::uint64_t be_value(ByteView data);

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t *>(s.data()), s.size()};
}

} // namespace nrsec
