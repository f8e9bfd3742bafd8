#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace semisar {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for an independent stream, e.g. derive_seed(master, {rep, kStreamSplit}).
/// The result depends only on the arguments, never on call order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

enum StreamTag : std::uint64_t {
  kStreamSites = 1,
  kStreamCovariates = 2,
  kStreamResponse = 3,
  kStreamSplit = 4,
  kStreamFolds = 5,
};

}  // namespace semisar
