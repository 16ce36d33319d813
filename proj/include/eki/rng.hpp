#pragma once

#include <cstdint>
#include <random>

namespace eki {

/// Independent purposes drawn from the same root seed.
enum class StreamPurpose : std::uint64_t {
  kObservations = 0x6f6273,
  kEnsemble = 0x656e73,
  kProbe = 0x707262,
};

namespace detail {

// splitmix64 finaliser
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed for the stream identified by (root seed, purpose, replicate, slot).
/// `slot` separates e.g. different sample sizes of one study.
constexpr std::uint64_t stream_seed(std::uint64_t root, StreamPurpose purpose, std::uint64_t replicate = 0,
                                    std::uint64_t slot = 0) {
  std::uint64_t h = detail::mix64(root);
  h = detail::mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = detail::mix64(h ^ replicate);
  return detail::mix64(h ^ (slot * 0x2545f4914f6cdd1dULL));
}

inline std::mt19937_64 make_stream(std::uint64_t root, StreamPurpose purpose, std::uint64_t replicate = 0,
                                   std::uint64_t slot = 0) {
  return std::mt19937_64(stream_seed(root, purpose, replicate, slot));
}

}  // namespace eki
