#pragma once

// Deterministic input/output tuples for every key-hierarchy operation, for
// cross-checking against an independent implementation.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nrsec::vectors
{

struct SeedLine
{
    std::uint64_t seed = 0;
    std::size_t count = 1000;
};

/// One "<seed> [count]" entry per line; blank lines and '#' comments ignored.
/// Throws std::invalid_argument naming the offending line.
std::vector<SeedLine> parse_seed_file(const std::string &text);

/// Sample `index` of the stream for `seed`.
nlohmann::ordered_json make_vector(std::uint64_t seed, std::size_t index);

/// Writes one JSON line per sample, in seed-file order.
void emit(const std::vector<SeedLine> &seeds, std::ostream &out);

} // namespace nrsec::vectors
