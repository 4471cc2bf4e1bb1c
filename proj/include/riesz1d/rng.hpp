#pragma once

#include <cstdint>

namespace riesz {

// Deterministic counter-style generator (SplitMix64).  Every random choice in
// the library flows through one of these, seeded from a single 64-bit value,
// so identical seeds give identical streams regardless of platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0.  Simple rejection-free scaling is fine
  // for the modest n used here; determinism matters more than bias at 2^-53.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  // Derive an independent stream (e.g. per trial index) from this seed.
  Rng fork(std::uint64_t stream) const {
    Rng r(state_ ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace riesz
