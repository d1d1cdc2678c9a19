#pragma once

#include <cstdint>
#include <random>

namespace ams {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed for (stream, tag) from a master seed, so that
/// consuming one stream never shifts another.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t tag = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ (tag * 0x632be59bd9b4e019ULL));
}

// Well-known stream tags.
namespace stream {
inline constexpr std::uint64_t kPool = 1;
inline constexpr std::uint64_t kTaskDraw = 2;
inline constexpr std::uint64_t kEvalTasks = 3;
inline constexpr std::uint64_t kModelInit = 4;
inline constexpr std::uint64_t kPolicyInit = 5;
inline constexpr std::uint64_t kSelection = 6;
}  // namespace stream

}  // namespace ams
