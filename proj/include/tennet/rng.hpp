#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace tennet {

// Deterministic random source. Every random choice in the library flows
// through this class so that one seed pins down results exactly. The
// [0,1) mapping and the shuffle are spelled out here because the standard
// library leaves std::uniform_real_distribution and std::shuffle
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  // Unbiased integer in [0, n), n >= 1. Rejection keeps it exact.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (~std::uint64_t{0} / n) * n;
    std::uint64_t r = eng_();
    while (r >= threshold) r = eng_();
    return r % n;
  }

  // Fisher-Yates, high-to-low.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// Stable per-purpose seed derivation (splitmix64 of base ^ salt).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base ^ (salt + 0x9e3779b97f4a7c15ULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tennet
