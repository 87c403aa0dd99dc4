#pragma once

// Seeded generator with a portable uniform draw. std::uniform_real_distribution
// is implementation-defined, so draws are built from raw 64-bit outputs to keep
// constructions bit-identical across standard libraries.

#include <cstdint>
#include <random>

namespace hypertuple {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). Modulo bias is negligible for small bounds.
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

  /// The "arbitrary positive value" of the construction: uniform in [0.5, 2].
  double positive() { return uniform(0.5, 2.0); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hypertuple
