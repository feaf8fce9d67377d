#pragma once

// Grassberger-Procaccia correlation-dimension estimator over a sequence of
// probability vectors: streaming pair-distance histogram, correlation
// integral C(eps), and a log-log scaling-region fit.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <string_view>
#include <vector>

#include "frdim/metrics.hpp"
#include "frdim/prob.hpp"

namespace frdim {

/// Strictly increasing, positive bin edges. Bin i covers
/// [edges[i], edges[i+1]); distances below edges[0] are underflow and
/// distances at or above edges.back() are overflow.
class EpsilonGrid {
 public:
  explicit EpsilonGrid(std::vector<double> edges);

  /// n_edges log-spaced edges from lo to hi inclusive (n_edges >= 2).
  static EpsilonGrid log_spaced(double lo, double hi, std::size_t n_edges);

  std::span<const double> edges() const noexcept { return edges_; }
  std::size_t n_bins() const noexcept { return edges_.size() - 1; }

  /// Bin index, or -1 for underflow, or n_bins() for overflow.
  std::ptrdiff_t locate(double d) const noexcept;

 private:
  std::vector<double> edges_;
};

struct DistanceHistogram {
  EpsilonGrid grid;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  std::size_t n_points = 0;

  std::uint64_t n_pairs_total() const noexcept {
    return static_cast<std::uint64_t>(n_points) * (n_points - 1) / 2;
  }
  std::uint64_t n_pairs_binned() const noexcept;
};

struct CorrelationCurve {
  std::vector<double> epsilons;
  std::vector<double> c_values;
  /// Normalization used for c_values: N(N-1)/2.
  std::uint64_t n_pairs = 0;

  std::size_t size() const noexcept { return epsilons.size(); }
};

struct DimensionEstimate {
  double nu_hat = 0.0;
  double intercept = 0.0;  // natural-log units: log C = intercept + nu log eps
  double r_squared = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  std::size_t n_curve_points_used = 0;
  /// True when no admissible window of the requested length existed and the
  /// fit fell back to the best-R^2 window over all points.
  bool fallback_region = false;
};

/// Histogram of all unordered off-diagonal pair distances of a sequence in
/// square-root coordinates (Fisher-Rao). Work is split into row-block tiles
/// with private counters, so counts do not depend on the thread count.
/// threads == 0 uses the hardware concurrency. Throws InvalidArgument for
/// fewer than two points.
DistanceHistogram pairwise_histogram(const SqrtEmbedding& emb, const EpsilonGrid& grid,
                                     unsigned threads = 0);

/// Same for a raw sequence under either metric.
DistanceHistogram pairwise_histogram(const StateSequence& seq, Metric metric,
                                     const EpsilonGrid& grid, unsigned threads = 0);

/// Log-spaced grid from the smallest nonzero to the largest pair distance.
/// Both are estimated from an evenly strided subsample of at most
/// `sample_size` points; the lower end also considers every pair of
/// consecutive points.
EpsilonGrid auto_grid(const StateSequence& seq, Metric metric, std::size_t n_edges = 64,
                      std::size_t sample_size = 1000);
EpsilonGrid auto_grid(const SqrtEmbedding& emb, std::size_t n_edges = 64,
                      std::size_t sample_size = 1000);

/// C at every upper bin edge: (underflow + counts up to that bin) / N(N-1)/2.
/// Points with C == 0 are dropped.
CorrelationCurve correlation_curve(const DistanceHistogram& hist);

enum class FitRule {
  /// Among windows of `window_points` consecutive admissible curve points,
  /// the one whose local slopes vary least (coefficient of variation).
  /// Local slopes are OLS slopes over +-slope_halfwidth neighbours.
  kFlattest,
  /// The widest window of at least `window_points` admissible points with
  /// OLS R^2 >= min_r_squared; ties go to the higher R^2.
  kWidestR2,
};

std::string_view to_string(FitRule r) noexcept;
/// Accepts "flattest" and "widest-r2"; throws InvalidArgument otherwise.
FitRule parse_fit_rule(std::string_view name);

struct FitOptions {
  FitRule rule = FitRule::kFlattest;
  std::size_t window_points = 10;
  std::size_t slope_halfwidth = 2;
  double min_r_squared = 0.98;
  /// Admissible points have C >= min_pair_count / n_pairs and C <= max_c.
  double min_pair_count = 10.0;
  double max_c = 0.5;
  /// kFlattest also requires eps <= max_eps_fraction * (largest curve eps),
  /// unless no window satisfies it.
  double max_eps_fraction = 0.5;
};

/// Minimum number of curve points any fit uses.
inline constexpr std::size_t kMinFitPoints = 5;

/// Ordinary least squares of log C on log eps. With `region` the fit uses
/// every point with lo <= eps <= hi; otherwise the scaling region is chosen
/// automatically. Throws InvalidArgument if fewer than kMinFitPoints
/// points are usable.
DimensionEstimate fit_dimension(const CorrelationCurve& curve,
                                std::optional<std::pair<double, double>> region = std::nullopt,
                                const FitOptions& options = {});

struct EstimateConfig {
  /// Row filter applied first; nullopt keeps every row.
  std::optional<FilterSpec> filter = FilterSpec{};
  /// Modulo reduction applied after filtering; nullopt (or M >= K) skips it.
  std::optional<std::size_t> m_groups = 1000;
  Metric metric = Metric::kFisherRao;
  std::size_t grid_edges = 64;
  std::optional<std::pair<double, double>> region;
  FitOptions fit;
  /// Smallest post-filter sequence the estimator accepts.
  std::size_t min_points = 100;
  unsigned threads = 0;
  /// Also estimate on the first half of the retained points.
  bool convergence_check = false;
};

struct EstimateResult {
  DimensionEstimate estimate;
  CorrelationCurve curve;
  DistanceHistogram histogram;
  std::size_t n_input = 0;
  std::size_t n_retained = 0;
  /// Effective reduction (0 when none was applied).
  std::size_t m_groups = 0;
  /// nu_hat on the first half of the retained points when requested.
  std::optional<double> half_nu_hat;
};

/// Full pipeline: filter -> modulo reduction -> metric -> histogram ->
/// correlation integral -> scaling-region fit. Throws DataError when the
/// filter retains fewer than config.min_points rows.
EstimateResult estimate(const StateSequence& seq, const EstimateConfig& config);

}  // namespace frdim
