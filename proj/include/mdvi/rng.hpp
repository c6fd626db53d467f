#pragma once

#include <cstdint>
#include <string_view>

namespace mdvi {

// Counter-based uniform draws. Every value is a pure function of
// (seed, tag, counter), so generators stay bit-reproducible no matter
// in which order entries are produced:
//
//   key   = splitmix64(seed ^ fnv1a64(tag))
//   u_i   = top53(splitmix64(key + i * 0x9e3779b97f4a7c15)) * 2^-53
//
// where splitmix64(z) is the standard finalizer applied to z + golden.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class UniformStream {
 public:
  constexpr UniformStream(std::uint64_t seed, std::string_view tag) noexcept
      : key_(splitmix64(seed ^ fnv1a64(tag))) {}

  /// Value in [0, 1) at position `counter`.
  constexpr double at(std::uint64_t counter) const noexcept {
    return to_unit_interval(splitmix64(key_ + counter * kGoldenGamma));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace mdvi
