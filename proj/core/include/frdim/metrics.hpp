#pragma once

// Distances between points of the probability simplex.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "frdim/prob.hpp"

namespace frdim {

enum class Metric { kFisherRao, kEuclidean };

std::string_view to_string(Metric m) noexcept;
/// Accepts "fisher-rao" and "euclidean"; throws InvalidArgument otherwise.
Metric parse_metric(std::string_view name);

/// Sum of sqrt(p_w q_w), clamped into [0, 1].
double bhattacharyya_coeff(const ProbVector& p, const ProbVector& q);

/// Geodesic distance on the simplex under the Fisher information metric:
/// 2 arccos of the Bhattacharyya coefficient, in radians, within [0, pi].
double fisher_rao(const ProbVector& p, const ProbVector& q);

double euclidean(const ProbVector& p, const ProbVector& q);

namespace detail {

// Unchecked kernels on raw rows of equal length. Accumulation order is
// fixed (four interleaved partial sums, combined pairwise) so every caller
// gets bit-identical results for the same pair of rows.
double dot(const double* a, const double* b, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;

/// Fisher-Rao distance from the chord length between two unit vectors in
/// square-root coordinates: d = 4 asin(chord / 2). Agrees with
/// 2 acos(<a,b>) mathematically but keeps full precision near zero.
double fisher_rao_from_chord(double chord) noexcept;

}  // namespace detail

/// Square-root coordinates of a sequence: row t holds sqrt(p_t). Rows lie
/// on the unit sphere and the dot product of two rows is the Bhattacharyya
/// coefficient of the corresponding distributions.
class SqrtEmbedding {
 public:
  explicit SqrtEmbedding(const StateSequence& seq);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const double* row_ptr(std::size_t i) const noexcept { return data_.data() + i * dim_; }

  /// Bhattacharyya coefficient of rows i and j, unclamped.
  double dot(std::size_t i, std::size_t j) const noexcept;
  /// Fisher-Rao distance of rows i and j.
  double distance(std::size_t i, std::size_t j) const noexcept;

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

SqrtEmbedding sqrt_embed(const StateSequence& seq);

}  // namespace frdim
