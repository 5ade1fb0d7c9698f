#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stylist {

using Rng = std::mt19937_64;

/// Independent generator for one named consumer of a run seed. Adding a new
/// purpose never shifts the draws seen by existing ones.
Rng substream(std::uint64_t seed, std::string_view purpose);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace stylist
