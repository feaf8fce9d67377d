#include "frdim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "frdim/error.hpp"

namespace frdim {

namespace {

void require_same_dim(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()));
  }
}

}  // namespace

std::string_view to_string(Metric m) noexcept {
  return m == Metric::kFisherRao ? "fisher-rao" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "fisher-rao" || name == "fr") return Metric::kFisherRao;
  if (name == "euclidean" || name == "l2") return Metric::kEuclidean;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

namespace detail {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

double fisher_rao_from_chord(double chord) noexcept {
  return 4.0 * std::asin(std::clamp(0.5 * chord, 0.0, 1.0));
}

}  // namespace detail

double bhattacharyya_coeff(const ProbVector& p, const ProbVector& q) {
  require_same_dim(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
  return std::clamp(s, 0.0, 1.0);
}

double fisher_rao(const ProbVector& p, const ProbVector& q) {
  require_same_dim(p, q);
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    sq += d * d;
  }
  return detail::fisher_rao_from_chord(std::sqrt(sq));
}

double euclidean(const ProbVector& p, const ProbVector& q) {
  require_same_dim(p, q);
  return std::sqrt(detail::squared_distance(p.values().data(), q.values().data(), p.size()));
}

SqrtEmbedding::SqrtEmbedding(const StateSequence& seq)
    : n_(seq.size()), dim_(seq.dim()), data_(seq.flat().size()) {
  const auto src = seq.flat();
  std::transform(src.begin(), src.end(), data_.begin(),
                 [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

double SqrtEmbedding::dot(std::size_t i, std::size_t j) const noexcept {
  return detail::dot(row_ptr(i), row_ptr(j), dim_);
}

double SqrtEmbedding::distance(std::size_t i, std::size_t j) const noexcept {
  return detail::fisher_rao_from_chord(
      std::sqrt(detail::squared_distance(row_ptr(i), row_ptr(j), dim_)));
}

SqrtEmbedding sqrt_embed(const StateSequence& seq) { return SqrtEmbedding(seq); }

}  // namespace frdim
