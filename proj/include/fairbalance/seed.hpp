#pragma once

#include <cstdint>

namespace fairbalance {

/// SplitMix64 finalizer. A bijection on 64-bit integers.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `master`:
///
///     derive_seed(m, k) = mix64(mix64(m) + k)   (mod 2^64)
///
/// For a fixed master the map k -> seed is injective, and for a fixed k the
/// map m -> seed is injective, because mix64 is a bijection.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::uint64_t index) noexcept {
  return mix64(mix64(master) + index);
}

}  // namespace fairbalance
