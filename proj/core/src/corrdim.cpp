#include "frdim/corrdim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include <Eigen/Dense>

#include "frdim/error.hpp"
#include "frdim/reduce.hpp"

namespace frdim {

// ---------------------------------------------------------------- grid

EpsilonGrid::EpsilonGrid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw InvalidArgument("epsilon grid needs at least two edges");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!(edges_[i] > 0.0) || !std::isfinite(edges_[i])) {
      throw InvalidArgument("epsilon grid edges must be positive and finite");
    }
    if (i > 0 && !(edges_[i] > edges_[i - 1])) {
      throw InvalidArgument("epsilon grid edges must be strictly increasing");
    }
  }
}

EpsilonGrid EpsilonGrid::log_spaced(double lo, double hi, std::size_t n_edges) {
  if (n_edges < 2) throw InvalidArgument("epsilon grid needs at least two edges");
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("log grid needs 0 < lo < hi");
  std::vector<double> e(n_edges);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n_edges; ++i) {
    e[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n_edges - 1));
  }
  e.front() = lo;
  e.back() = hi;
  return EpsilonGrid(std::move(e));
}

std::ptrdiff_t EpsilonGrid::locate(double d) const noexcept {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), d);
  return static_cast<std::ptrdiff_t>(it - edges_.begin()) - 1;
}

std::uint64_t DistanceHistogram::n_pairs_binned() const noexcept {
  std::uint64_t s = underflow + overflow;
  for (auto c : counts) s += c;
  return s;
}

// ----------------------------------------------------------- histogram

namespace {

constexpr std::size_t kTileRows = 256;

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Counts every unordered pair (i < j) of rows in `data` (n x dim, row-major).
// `to_distance` maps the squared Euclidean distance of two rows to the
// metric distance.
//
// Tiles of kTileRows x kTileRows pairs get their dot products from one
// matrix product, and squared distances follow as |a|^2 + |b|^2 - 2 a.b.
// Where that difference cancels badly (near-coincident rows) the distance
// is recomputed directly. Tile shapes do not depend on the thread count,
// so neither do the counts.
template <typename ToDistance>
DistanceHistogram histogram_impl(const double* data, std::size_t n, std::size_t dim,
                                 const EpsilonGrid& grid, unsigned threads,
                                 ToDistance to_distance) {
  if (n < 2) throw InvalidArgument("pairwise histogram needs at least two points");

  const std::size_t bins = grid.n_bins();
  const std::size_t n_blocks = (n + kTileRows - 1) / kTileRows;
  // Upper-triangular tiles (bi <= bj), enumerated row-major.
  const std::size_t n_tiles = n_blocks * (n_blocks + 1) / 2;
  const auto edges = grid.edges();
  const Eigen::Map<const RowMatrix> x(data, static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(dim));
  std::vector<double> norm2(n);
  for (std::size_t i = 0; i < n; ++i) norm2[i] = detail::dot(data + i * dim, data + i * dim, dim);

  // Column support [first, last) of each row block. A tile's dot products
  // only need the overlap of its two blocks' supports, which keeps sparse
  // rows (unreduced growth processes) cheap.
  std::vector<std::size_t> col_lo(n_blocks, dim), col_hi(n_blocks, 0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t i = b * kTileRows; i < std::min(n, (b + 1) * kTileRows); ++i) {
      const double* r = data + i * dim;
      std::size_t f = 0;
      while (f < dim && r[f] == 0.0) ++f;
      if (f == dim) continue;
      std::size_t l = dim;
      while (r[l - 1] == 0.0) --l;
      col_lo[b] = std::min(col_lo[b], f);
      col_hi[b] = std::max(col_hi[b], l);
    }
  }

  // slot 0 = underflow, 1..bins = bins, bins + 1 = overflow
  auto run = [&](std::atomic<std::size_t>& next, std::vector<std::uint64_t>& local) {
    RowMatrix dots;
    std::size_t bi = 0, row_start = 0;  // incremental tile -> (bi, bj) decoding
    for (;;) {
      const std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= n_tiles) break;
      while (t >= row_start + (n_blocks - bi)) {
        row_start += n_blocks - bi;
        ++bi;
      }
      const std::size_t bj = bi + (t - row_start);
      const std::size_t i0 = bi * kTileRows, i1 = std::min(n, i0 + kTileRows);
      const std::size_t j0 = bj * kTileRows, j1 = std::min(n, j0 + kTileRows);
      const auto ri = static_cast<Eigen::Index>(i1 - i0);
      const auto rj = static_cast<Eigen::Index>(j1 - j0);
      const std::size_t c0 = std::max(col_lo[bi], col_lo[bj]);
      const std::size_t c1 = std::min(col_hi[bi], col_hi[bj]);
      if (c1 > c0) {
        const auto c = static_cast<Eigen::Index>(c0);
        const auto w = static_cast<Eigen::Index>(c1 - c0);
        dots.resize(ri, rj);
        dots.noalias() = x.block(static_cast<Eigen::Index>(i0), c, ri, w) *
                         x.block(static_cast<Eigen::Index>(j0), c, rj, w).transpose();
      } else {
        dots.setZero(ri, rj);
      }
      for (std::size_t i = i0; i < i1; ++i) {
        const double* g = dots.data() + (i - i0) * static_cast<std::size_t>(rj);
        for (std::size_t j = (bi == bj ? i + 1 : j0); j < j1; ++j) {
          const double scale = norm2[i] + norm2[j];
          double sq = scale - 2.0 * g[j - j0];
          if (sq < 1e-6 * scale) sq = detail::squared_distance(data + i * dim, data + j * dim, dim);
          const double d = to_distance(std::max(sq, 0.0));
          const auto k = std::upper_bound(edges.begin(), edges.end(), d) - edges.begin();
          ++local[static_cast<std::size_t>(k)];
        }
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n_tiles));
  std::vector<std::vector<std::uint64_t>> partial(n_threads,
                                                  std::vector<std::uint64_t>(bins + 2, 0));
  // Each worker claims tiles in increasing order, so its decoding cursor
  // only moves forward.
  std::atomic<std::size_t> next{0};
  if (n_threads == 1) {
    run(next, partial[0]);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] { run(next, partial[w]); });
    }
  }

  DistanceHistogram h{grid, std::vector<std::uint64_t>(bins, 0), 0, 0, n};
  for (const auto& p : partial) {
    h.underflow += p[0];
    for (std::size_t b = 0; b < bins; ++b) h.counts[b] += p[b + 1];
    h.overflow += p[bins + 1];
  }
  return h;
}

struct FisherRaoFromSquared {
  double operator()(double sq) const noexcept {
    return detail::fisher_rao_from_chord(std::sqrt(sq));
  }
};

struct EuclideanFromSquared {
  double operator()(double sq) const noexcept { return std::sqrt(sq); }
};

std::pair<double, double> sample_extent(const double* data, std::size_t n, std::size_t dim,
                                        std::size_t sample_size, bool fisher_rao) {
  const std::size_t s = std::min(n, std::max<std::size_t>(sample_size, 2));
  std::vector<std::size_t> idx(s);
  for (std::size_t i = 0; i < s; ++i) idx[i] = i * n / s;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a + 1; b < s; ++b) {
      const double sq = detail::squared_distance(data + idx[a] * dim, data + idx[b] * dim, dim);
      const double d = fisher_rao ? FisherRaoFromSquared{}(sq) : EuclideanFromSquared{}(sq);
      if (d > 0.0) lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  // Trajectories are often closest to themselves one step later, and a
  // strided sample never contains such pairs.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double sq = detail::squared_distance(data + i * dim, data + (i + 1) * dim, dim);
    const double d = fisher_rao ? FisherRaoFromSquared{}(sq) : EuclideanFromSquared{}(sq);
    if (d > 0.0) lo = std::min(lo, d);
  }
  return {lo, hi};
}

EpsilonGrid grid_from_extent(std::pair<double, double> extent, std::size_t n_edges,
                             double metric_max) {
  auto [lo, hi] = extent;
  if (!std::isfinite(lo) || !(hi > 0.0)) {
    // All sampled points coincide: nothing to scale against.
    lo = 1e-12;
    hi = metric_max;
  }
  if (!(hi > lo)) hi = lo * 2.0;
  return EpsilonGrid::log_spaced(lo, hi, n_edges);
}

}  // namespace

DistanceHistogram pairwise_histogram(const SqrtEmbedding& emb, const EpsilonGrid& grid,
                                     unsigned threads) {
  return histogram_impl(emb.row_ptr(0), emb.size(), emb.dim(), grid, threads,
                        FisherRaoFromSquared{});
}

DistanceHistogram pairwise_histogram(const StateSequence& seq, Metric metric,
                                     const EpsilonGrid& grid, unsigned threads) {
  if (metric == Metric::kFisherRao) return pairwise_histogram(SqrtEmbedding(seq), grid, threads);
  return histogram_impl(seq.flat().data(), seq.size(), seq.dim(), grid, threads,
                        EuclideanFromSquared{});
}

EpsilonGrid auto_grid(const SqrtEmbedding& emb, std::size_t n_edges, std::size_t sample_size) {
  return grid_from_extent(sample_extent(emb.row_ptr(0), emb.size(), emb.dim(), sample_size, true),
                          n_edges, std::numbers::pi);
}

EpsilonGrid auto_grid(const StateSequence& seq, Metric metric, std::size_t n_edges,
                      std::size_t sample_size) {
  if (metric == Metric::kFisherRao) return auto_grid(SqrtEmbedding(seq), n_edges, sample_size);
  return grid_from_extent(
      sample_extent(seq.flat().data(), seq.size(), seq.dim(), sample_size, false), n_edges,
      std::numbers::sqrt2);
}

// --------------------------------------------------------------- curve

CorrelationCurve correlation_curve(const DistanceHistogram& hist) {
  CorrelationCurve c;
  c.n_pairs = hist.n_pairs_total();
  if (c.n_pairs == 0) return c;
  const auto edges = hist.grid.edges();
  std::uint64_t cum = hist.underflow;
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    cum += hist.counts[b];
    if (cum == 0) continue;
    c.epsilons.push_back(edges[b + 1]);
    c.c_values.push_back(static_cast<double>(cum) / static_cast<double>(c.n_pairs));
  }
  return c;
}

// ----------------------------------------------------------------- fit

std::string_view to_string(FitRule r) noexcept {
  return r == FitRule::kFlattest ? "flattest" : "widest-r2";
}

FitRule parse_fit_rule(std::string_view name) {
  if (name == "flattest") return FitRule::kFlattest;
  if (name == "widest-r2") return FitRule::kWidestR2;
  throw InvalidArgument("unknown fit rule '" + std::string(name) +
                        "' (expected flattest or widest-r2)");
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit ols(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit f;
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // A flat segment carries no scaling information; report R^2 = 0.
  f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
  return f;
}

DimensionEstimate make_estimate(const LineFit& f, std::span<const double> eps, std::size_t a,
                                std::size_t b) {
  DimensionEstimate e;
  e.nu_hat = std::max(f.slope, 0.0);
  e.intercept = f.intercept;
  e.r_squared = f.r_squared;
  e.fit_lo = eps[a];
  e.fit_hi = eps[b - 1];
  e.n_curve_points_used = b - a;
  return e;
}

}  // namespace

DimensionEstimate fit_dimension(const CorrelationCurve& curve,
                                std::optional<std::pair<double, double>> region,
                                const FitOptions& options) {
  std::vector<double> lx, ly, eps;
  std::vector<double> cv;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!(curve.c_values[i] > 0.0)) continue;
    if (region && (curve.epsilons[i] < region->first || curve.epsilons[i] > region->second)) {
      continue;
    }
    eps.push_back(curve.epsilons[i]);
    cv.push_back(curve.c_values[i]);
    lx.push_back(std::log(curve.epsilons[i]));
    ly.push_back(std::log(curve.c_values[i]));
  }

  if (region) {
    if (eps.size() < kMinFitPoints) {
      throw InvalidArgument("fit region holds " + std::to_string(eps.size()) +
                            " curve points; at least " + std::to_string(kMinFitPoints) +
                            " are required");
    }
    return make_estimate(ols(lx, ly), eps, 0, eps.size());
  }

  // Admissible points: away from shot noise at the bottom and saturation
  // at the top.
  const double c_floor =
      curve.n_pairs > 0 ? options.min_pair_count / static_cast<double>(curve.n_pairs) : 0.0;
  const std::size_t n = eps.size();
  std::vector<char> ok(n);
  for (std::size_t i = 0; i < n; ++i) ok[i] = cv[i] >= c_floor && cv[i] <= options.max_c;

  if (options.rule == FitRule::kWidestR2) {
    const std::size_t min_pts = std::max(options.window_points, kMinFitPoints);
    std::size_t ba = 0, bb = 0;
    LineFit bf;
    for (std::size_t a = 0; a < n; ++a) {
      if (!ok[a]) continue;
      for (std::size_t b = a + min_pts; b <= n; ++b) {
        if (!ok[b - 1]) break;
        const auto f = ols(std::span(lx).subspan(a, b - a), std::span(ly).subspan(a, b - a));
        if (!(f.slope > 0.0) || f.r_squared < options.min_r_squared) continue;
        if (b - a > bb - ba || (b - a == bb - ba && f.r_squared > bf.r_squared)) {
          ba = a;
          bb = b;
          bf = f;
        }
      }
    }
    if (bb > ba) return make_estimate(bf, eps, ba, bb);
  } else {
    const std::size_t h = options.slope_halfwidth;
    std::vector<double> slope(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= h ? i - h : 0;
      const std::size_t hi = std::min(n, i + h + 1);
      slope[i] =
          ols(std::span(lx).subspan(lo, hi - lo), std::span(ly).subspan(lo, hi - lo)).slope;
    }
    const std::size_t len = std::max(options.window_points, kMinFitPoints);
    auto flattest = [&](double eps_cap) -> std::optional<DimensionEstimate> {
      double best_score = std::numeric_limits<double>::infinity();
      std::size_t best_a = n;
      for (std::size_t a = 0; a + len <= n; ++a) {
        double s1 = 0.0, s2 = 0.0;
        bool usable = true;
        for (std::size_t i = a; i < a + len && usable; ++i) {
          usable = ok[i] && eps[i] <= eps_cap && slope[i] > 0.0;
          s1 += slope[i];
          s2 += slope[i] * slope[i];
        }
        if (!usable) continue;
        const double mean = s1 / static_cast<double>(len);
        const double var = std::max(s2 / static_cast<double>(len) - mean * mean, 0.0);
        const double score = std::sqrt(var) / mean;
        if (score < best_score) {
          best_score = score;
          best_a = a;
        }
      }
      if (best_a == n) return std::nullopt;
      const auto f = ols(std::span(lx).subspan(best_a, len), std::span(ly).subspan(best_a, len));
      return make_estimate(f, eps, best_a, best_a + len);
    };
    // Concentrated clouds (high-dimensional noise) keep every distance near
    // the maximum; the eps cap then admits nothing and is dropped.
    if (!eps.empty()) {
      if (auto e = flattest(options.max_eps_fraction * eps.back())) return *e;
      if (auto e = flattest(std::numeric_limits<double>::infinity())) return *e;
    }
  }

  bool found = false;
  std::size_t fa = 0, fb = 0;
  LineFit fit;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + kMinFitPoints; b <= n; ++b) {
      const auto f = ols(std::span(lx).subspan(a, b - a), std::span(ly).subspan(a, b - a));
      if (!(f.slope > 0.0)) continue;
      if (!found || f.r_squared > fit.r_squared) {
        found = true;
        fa = a;
        fb = b;
        fit = f;
      }
    }
  }
  if (found) {
    auto e = make_estimate(fit, eps, fa, fb);
    e.fallback_region = true;
    return e;
  }
  throw InvalidArgument("correlation curve has fewer than " + std::to_string(kMinFitPoints) +
                        " usable points for a scaling fit");
}

// ------------------------------------------------------------ pipeline

namespace {

EstimateResult estimate_retained(const StateSequence& rows, const EstimateConfig& config) {
  const bool reduce = config.m_groups && *config.m_groups < rows.dim();
  auto histogram = [&] {
    std::optional<StateSequence> reduced;
    if (reduce) reduced = project_sequence(rows, ReductionSpec(*config.m_groups, rows.dim()));
    const StateSequence& points = reduced ? *reduced : rows;
    if (config.metric == Metric::kFisherRao) {
      const SqrtEmbedding emb(points);
      reduced.reset();
      return pairwise_histogram(emb, auto_grid(emb, config.grid_edges), config.threads);
    }
    return pairwise_histogram(points, Metric::kEuclidean,
                              auto_grid(points, Metric::kEuclidean, config.grid_edges),
                              config.threads);
  }();
  auto curve = correlation_curve(histogram);
  auto fit = fit_dimension(curve, config.region, config.fit);
  return EstimateResult{fit,           std::move(curve), std::move(histogram), 0, rows.size(),
                        reduce ? *config.m_groups : 0, std::nullopt};
}

}  // namespace

EstimateResult estimate(const StateSequence& seq, const EstimateConfig& config) {
  std::optional<StateSequence> filtered;
  if (config.filter) filtered = apply_filter(seq, *config.filter).rows;
  const StateSequence& retained = filtered ? *filtered : seq;
  const std::size_t floor = std::max<std::size_t>(config.min_points, 2);
  if (retained.size() < floor) {
    std::string why = "filter retained " + std::to_string(retained.size()) + " of " +
                      std::to_string(seq.size()) + " points; at least " +
                      std::to_string(floor) + " are required";
    if (config.filter) {
      why += " (eta=" + std::to_string(config.filter->eta) +
             (config.filter->argmax_word ? ", argmax mode" : "") +
             "; relax the filter or supply a longer sequence)";
    }
    throw DataError(why);
  }

  auto result = estimate_retained(retained, config);
  result.n_input = seq.size();

  if (config.convergence_check && retained.size() / 2 >= 2) {
    const std::size_t half = retained.size() / 2;
    StateSequence first(retained.dim(),
                        std::vector<double>(retained.flat().begin(),
                                            retained.flat().begin() +
                                                static_cast<std::ptrdiff_t>(half * retained.dim())));
    try {
      result.half_nu_hat = estimate_retained(first, config).estimate.nu_hat;
    } catch (const InvalidArgument&) {
      // Too few curve points on the half sequence; leave the diagnostic unset.
    }
  }
  return result;
}

}  // namespace frdim
