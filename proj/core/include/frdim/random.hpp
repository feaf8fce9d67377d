#pragma once

// Seeded random source with fixed, platform-independent transformations.
// The engine is std::mt19937_64 (its output sequence is pinned by the
// standard); uniform, normal and gamma variates are derived here rather
// than through <random> distributions, whose algorithms vary by library.

#include <cstdint>
#include <random>

namespace frdim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Gamma(shape, 1) by Marsaglia-Tsang; shapes below 1 use the boost
  /// G(a) = G(a + 1) U^(1/a).
  double gamma(double shape);
  /// log of a Gamma(shape, 1) draw. Stays finite for tiny shapes where
  /// the draw itself underflows to zero.
  double log_gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace frdim
