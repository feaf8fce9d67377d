#include "frdim/random.hpp"

#include <cmath>

#include "frdim/error.hpp"

namespace frdim {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  for (;;) {
    const double u = uniform();
    if (u > 0.0) return u;
  }
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("Rng::below needs n > 0");
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      const double f = std::sqrt(-2.0 * std::log(s) / s);
      spare_normal_ = v * f;
      has_spare_ = true;
      return u * f;
    }
  }
}

namespace {

// Marsaglia & Tsang (2000) for shape >= 1, returned in log space.
double log_gamma_ge1(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d) + std::log(v);
    }
  }
}

}  // namespace

double Rng::log_gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidArgument("gamma shape must be > 0");
  if (shape >= 1.0) return log_gamma_ge1(*this, shape);
  const double boosted = log_gamma_ge1(*this, shape + 1.0);
  return boosted + std::log(uniform_open()) / shape;
}

double Rng::gamma(double shape) { return std::exp(log_gamma(shape)); }

}  // namespace frdim
