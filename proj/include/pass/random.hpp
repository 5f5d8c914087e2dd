#pragma once

// Seed discipline: every random stream is derived from a master seed and a
// chain of indices (replicate, purpose, partition, ...), so results do not
// depend on execution order or thread count.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pass {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  for (auto i : path) base = derive_seed(base, i);
  return base;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Stream purposes below a replicate.
namespace stream {
inline constexpr std::uint64_t data = 0;
inline constexpr std::uint64_t pass_splits = 1;
inline constexpr std::uint64_t kfold = 2;
}  // namespace stream

}  // namespace pass
