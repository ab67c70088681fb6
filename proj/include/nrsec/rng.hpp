#pragma once

#include <nrsec/bytes.hpp>

#include <random>
#include <string_view>

namespace nrsec
{

/// Seeded generator with per-entity substreams. Each substream is seeded from
/// (run seed, entity id) only, so adding an entity never perturbs the draws of
/// the others. Bounded draws use rejection sampling on raw 64-bit output so
/// results do not depend on the standard library's distribution classes.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view stream);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform over the low `bits` bits.
    std::uint64_t bits(unsigned bits);
    void fill(std::span<std::uint8_t> out);

    template <typename T>
    T octets()
    {
        T out;
        fill(out.v);
        return out;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace nrsec
