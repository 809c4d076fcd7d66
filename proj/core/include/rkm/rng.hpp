#pragma once

#include <cstdint>
#include <random>

namespace rkm {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based sub-seed: a pure function of (master, stream, index), so
// sub-streams can be generated in any order with identical results.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

inline Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return Rng(derive_seed(master, stream, index));
}

// Stream identifiers keep unrelated consumers of one master seed apart.
namespace streams {
inline constexpr std::uint64_t kColumns = 0x636f6c;
inline constexpr std::uint64_t kMoments = 0x6d6f6d;
inline constexpr std::uint64_t kXi = 0x7869;
inline constexpr std::uint64_t kTrials = 0x747269;
inline constexpr std::uint64_t kPairs = 0x706169;
}  // namespace streams

}  // namespace rkm
