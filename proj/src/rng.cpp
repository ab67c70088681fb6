#include <nrsec/rng.hpp>

#include <stdexcept>

namespace nrsec
{

namespace
{

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded(seed, 0)) {}

Rng::Rng(std::uint64_t seed, std::string_view stream) : engine_(seeded(seed, fnv1a(stream))) {}

std::uint64_t Rng::below(std::uint64_t bound)
{
    if (bound == 0)
        throw std::invalid_argument("Rng::below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do
        x = engine_();
    while (x >= limit);
    return x % bound;
}

std::uint64_t Rng::bits(unsigned n)
{
    if (n >= 64)
        return engine_();
    return engine_() & ((std::uint64_t{1} << n) - 1);
}

void Rng::fill(std::span<std::uint8_t> out)
{
    std::size_t i = 0;
    while (i < out.size())
    {
        std::uint64_t x = engine_();
        for (int b = 0; b < 8 && i < out.size(); ++b, ++i)
            out[i] = static_cast<std::uint8_t>(x >> (8 * b));
    }
}

} // namespace nrsec
