#include "frdim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <tuple>

#include "frdim/error.hpp"

namespace frdim::theory {

namespace {

constexpr double kStochasticTol = 1e-9;

bool is_stochastic_vector(const Eigen::VectorXd& v) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) return false;
    sum += v[i];
  }
  return std::abs(sum - 1.0) <= kStochasticTol;
}

void check_absorbing(const Eigen::MatrixXd& m, double rho, const char* name) {
  const Eigen::Index k = m.rows();
  const Eigen::Index end = k - 1;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!is_stochastic_vector(m.row(i).transpose())) {
      throw InvalidArgument(std::string(name) + " row " + std::to_string(i) +
                            " is not a distribution");
    }
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (m(end, j) != (j == end ? 1.0 : 0.0)) {
      throw InvalidArgument(std::string(name) + ": end token must be absorbing");
    }
  }
  for (Eigen::Index i = 0; i < end; ++i) {
    if (std::abs(m(i, end) - rho) > kStochasticTol) {
      throw InvalidArgument(std::string(name) + " row " + std::to_string(i) +
                            " does not exit with probability rho");
    }
  }
}

double fr_angle(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return angle_distance((p.array() * q.array()).sqrt().sum());
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

AbsorbingMarkovPair::AbsorbingMarkovPair(Eigen::MatrixXd a, Eigen::MatrixXd b, double rho,
                                         Eigen::VectorXd init_a, Eigen::VectorXd init_b)
    : a_(std::move(a)),
      b_(std::move(b)),
      rho_(rho),
      init_a_(std::move(init_a)),
      init_b_(std::move(init_b)) {
  if (a_.rows() < 2 || a_.rows() != a_.cols()) throw InvalidArgument("A must be square, K >= 2");
  if (b_.rows() != a_.rows() || b_.cols() != a_.cols()) {
    throw InvalidArgument("A and B must have the same shape");
  }
  if (!(rho_ > 0.0 && rho_ < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
  if (init_a_.size() != a_.rows() || init_b_.size() != a_.rows()) {
    throw InvalidArgument("initial distributions must have length K");
  }
  if (!is_stochastic_vector(init_a_) || !is_stochastic_vector(init_b_)) {
    throw InvalidArgument("initial vectors must be distributions");
  }
  check_absorbing(a_, rho_, "A");
  check_absorbing(b_, rho_, "B");
}

double angle_distance(double bhattacharyya) {
  return 2.0 * std::acos(std::clamp(bhattacharyya, 0.0, 1.0));
}

double cos_half_dfr_x(const AbsorbingMarkovPair& pair) {
  const auto n = static_cast<Eigen::Index>(pair.vocab() - 1);
  const auto end = n;
  const Eigen::MatrixXd g =
      (pair.a().topLeftCorner(n, n).array() * pair.b().topLeftCorner(n, n).array()).sqrt();
  const Eigen::VectorXd u =
      (pair.init_a().head(n).array() * pair.init_b().head(n).array()).sqrt();
  const Eigen::VectorXd e =
      (pair.a().col(end).head(n).array() * pair.b().col(end).head(n).array()).sqrt();
  const double h1 = std::sqrt(pair.init_a()[end] * pair.init_b()[end]);

  const Eigen::MatrixXd i_minus_g = Eigen::MatrixXd::Identity(n, n) - g;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_g);
  if (!lu.isInvertible()) throw NumericalError("I - G is singular");
  const Eigen::VectorXd y = lu.solve(e);
  const double value = h1 + u.dot(y);
  if (!std::isfinite(value)) throw NumericalError("resolvent value is not finite");
  return value;
}

EnumerationResult enumerate_closed_texts(const AbsorbingMarkovPair& pair, std::size_t max_words,
                                         std::uint64_t max_texts) {
  const std::size_t k = pair.vocab();
  const std::size_t end = pair.end_token();
  const auto& a = pair.a();
  const auto& b = pair.b();
  EnumerationResult out;
  out.tail_bound = std::pow(1.0 - pair.rho(), static_cast<double>(max_words));

  auto count = [&] {
    if (++out.texts > max_texts) throw NumericalError("closed-text enumeration budget exceeded");
  };
  // Neumaier summation: tens of thousands of tiny terms land on an O(1)
  // total, and plain accumulation drifts by more than small tail bounds.
  double comp = 0.0;
  auto add = [&](double v) {
    const double t = out.partial_sum + v;
    comp += std::abs(out.partial_sum) >= std::abs(v) ? (out.partial_sum - t) + v
                                                     : (v - t) + out.partial_sum;
    out.partial_sum = t;
  };

  // The empty text.
  count();
  add(std::sqrt(pair.init_a()[end] * pair.init_b()[end]));

  // x_a and x_b are probabilities of the prefix ending in `last`; each text
  // is closed by appending the end token.
  std::function<void(std::size_t, double, double, std::size_t)> walk =
      [&](std::size_t last, double xa, double xb, std::size_t words) {
        count();
        const auto l = static_cast<Eigen::Index>(last);
        const auto e = static_cast<Eigen::Index>(end);
        add(std::sqrt((xa * a(l, e)) * (xb * b(l, e))));
        if (words == max_words) return;
        for (std::size_t w = 0; w < end; ++w) {
          const auto c = static_cast<Eigen::Index>(w);
          walk(w, xa * a(l, c), xb * b(l, c), words + 1);
        }
      };
  if (max_words > 0) {
    for (std::size_t w = 0; w + 1 < k; ++w) {
      const auto c = static_cast<Eigen::Index>(w);
      walk(w, pair.init_a()[c], pair.init_b()[c], 1);
    }
  }
  out.partial_sum += comp;
  return out;
}

double row_distance(const AbsorbingMarkovPair& pair, std::size_t w) {
  const auto r = static_cast<Eigen::Index>(w);
  return fr_angle(pair.a().row(r).transpose(), pair.b().row(r).transpose());
}

DistortionReport distortion_rate(const AbsorbingMarkovPair& pair) {
  DistortionReport rep;
  rep.d_p = fr_angle(pair.init_a(), pair.init_b());
  if (!(rep.d_p > 0.0)) throw NumericalError("initial distributions coincide: ratio undefined");
  rep.d_x = angle_distance(cos_half_dfr_x(pair));
  rep.ratio = rep.d_x / rep.d_p;
  rep.bound = 1.0 / std::sqrt(pair.rho());
  for (std::size_t w = 0; w < pair.end_token(); ++w) {
    rep.max_row_distance = std::max(rep.max_row_distance, row_distance(pair, w));
  }
  rep.row_condition_holds = rep.max_row_distance <= rep.d_p;
  return rep;
}

// ------------------------------------------------------ random pairs

Eigen::VectorXd random_distribution(std::size_t vocab, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vocab));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.gamma(1.0);
  return v / v.sum();
}

Eigen::MatrixXd random_absorbing_matrix(std::size_t vocab, double rho, Rng& rng) {
  const auto k = static_cast<Eigen::Index>(vocab);
  const Eigen::Index end = k - 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < end; ++i) {
    m.row(i).head(end) = (1.0 - rho) * random_distribution(vocab - 1, rng).transpose();
    m(i, end) = rho;
  }
  m(end, end) = 1.0;
  return m;
}

AbsorbingMarkovPair random_pair(std::size_t vocab, double rho, bool same_matrix, Rng& rng) {
  Eigen::MatrixXd a = random_absorbing_matrix(vocab, rho, rng);
  Eigen::MatrixXd b = same_matrix ? a : random_absorbing_matrix(vocab, rho, rng);
  Eigen::VectorXd pa = random_distribution(vocab, rng);
  Eigen::VectorXd pb = random_distribution(vocab, rng);
  return AbsorbingMarkovPair(std::move(a), std::move(b), rho, std::move(pa), std::move(pb));
}

// ---------------------------------------------------- limit probing

LimitProbe probe_distortion_limit(std::size_t vocab, double rho, std::size_t halvings,
                                  std::uint64_t seed, double delta0) {
  if (vocab < 3) throw InvalidArgument("limit probe needs at least two ordinary words");
  if (!(delta0 > 0.0 && delta0 <= 1.0)) throw InvalidArgument("delta0 must lie in (0, 1]");
  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(vocab);
  const Eigen::Index end = k - 1;

  const Eigen::MatrixXd a = random_absorbing_matrix(vocab, rho, rng);
  const Eigen::MatrixXd q = random_absorbing_matrix(vocab, rho, rng);
  auto next_word_state = [&] {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
    p.head(end) = (1.0 - rho) * random_distribution(vocab - 1, rng);
    p[end] = rho;
    return p;
  };
  const Eigen::VectorXd p = next_word_state();
  const Eigen::VectorXd p_target = next_word_state();

  LimitProbe probe;
  probe.rho = rho;
  probe.bound = 1.0 / std::sqrt(rho);
  double delta = delta0;
  for (std::size_t step = 0; step <= halvings; ++step, delta /= 2.0) {
    const Eigen::VectorXd pb = (1.0 - delta) * p + delta * p_target;
    const double d_p = fr_angle(p, pb);

    // Largest row mix s in [0, 1] with max_w Delta_w(s) <= d_p. Distance
    // from A_w grows monotonically along the segment towards Q_w.
    auto max_row = [&](double s) {
      double worst = 0.0;
      for (Eigen::Index w = 0; w < end; ++w) {
        const Eigen::VectorXd bw = (1.0 - s) * a.row(w).transpose() + s * q.row(w).transpose();
        worst = std::max(worst, fr_angle(a.row(w).transpose(), bw));
      }
      return worst;
    };
    double s = 1.0;
    if (max_row(1.0) > d_p) {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (max_row(mid) <= d_p ? lo : hi) = mid;
      }
      s = lo;
    }
    Eigen::MatrixXd b = (1.0 - s) * a + s * q;
    // Keep the exact structural entries the pair validation checks.
    for (Eigen::Index w = 0; w < end; ++w) b(w, end) = rho;
    b.row(end).setZero();
    b(end, end) = 1.0;

    const AbsorbingMarkovPair pair(a, b, rho, p, pb);
    const DistortionReport rep = distortion_rate(pair);
    probe.deltas.push_back(delta);
    probe.d_p.push_back(rep.d_p);
    probe.ratios.push_back(rep.ratio);
    probe.row_condition_held = probe.row_condition_held && rep.row_condition_holds;
  }

  // Monotone over the last four steps (either direction).
  const std::size_t n = probe.ratios.size();
  if (n >= 3) {
    const std::size_t from = n > 4 ? n - 4 : 0;
    bool up = true, down = true;
    for (std::size_t i = from + 1; i < n; ++i) {
      up = up && probe.ratios[i] >= probe.ratios[i - 1];
      down = down && probe.ratios[i] <= probe.ratios[i - 1];
    }
    probe.monotone_tail = up || down;
  }
  return probe;
}

// --------------------------------------------------- marginal map

ClosedTextDistribution enumerate_text_distribution(const Eigen::MatrixXd& transition,
                                                   const Eigen::VectorXd& initial,
                                                   std::size_t max_words) {
  const auto k = static_cast<std::size_t>(transition.rows());
  if (k < 2 || transition.cols() != transition.rows() ||
      initial.size() != transition.rows()) {
    throw InvalidArgument("transition must be K x K and initial of length K");
  }
  const std::size_t end = k - 1;
  ClosedTextDistribution out;
  out.vocab = k;
  std::vector<std::size_t> prefix;
  std::function<void(double)> walk = [&](double x) {
    const auto l = static_cast<Eigen::Index>(prefix.back());
    std::vector<std::size_t> text = prefix;
    text.push_back(end);
    out.texts.push_back(std::move(text));
    out.mass.push_back(x * transition(l, static_cast<Eigen::Index>(end)));
    if (prefix.size() == max_words) return;
    for (std::size_t w = 0; w < end; ++w) {
      prefix.push_back(w);
      walk(x * transition(l, static_cast<Eigen::Index>(w)));
      prefix.pop_back();
    }
  };
  out.texts.push_back({end});
  out.mass.push_back(initial[static_cast<Eigen::Index>(end)]);
  if (max_words > 0) {
    for (std::size_t w = 0; w < end; ++w) {
      prefix.assign(1, w);
      walk(initial[static_cast<Eigen::Index>(w)]);
    }
  }
  return out;
}

std::vector<double> first_word_marginal(const ClosedTextDistribution& x) {
  std::vector<double> phi(x.vocab, 0.0);
  for (std::size_t i = 0; i < x.texts.size(); ++i) phi[x.texts[i].front()] += x.mass[i];
  return phi;
}

double phi_linearity_check(const ClosedTextDistribution& x1, const ClosedTextDistribution& x2,
                           double alpha) {
  if (x1.vocab != x2.vocab || x1.texts != x2.texts) {
    throw InvalidArgument("distributions must list the same texts");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  ClosedTextDistribution mix = x1;
  for (std::size_t i = 0; i < mix.mass.size(); ++i) {
    mix.mass[i] = alpha * x1.mass[i] + (1.0 - alpha) * x2.mass[i];
  }
  const auto lhs = first_word_marginal(mix);
  const auto p1 = first_word_marginal(x1);
  const auto p2 = first_word_marginal(x2);
  double worst = 0.0;
  for (std::size_t w = 0; w < lhs.size(); ++w) {
    worst = std::max(worst, std::abs(lhs[w] - (alpha * p1[w] + (1.0 - alpha) * p2[w])));
  }
  return worst;
}

// ------------------------------------------- variance-mean exponent

GammaExperiment gamma_merge_experiment(double gamma_in, double beta, std::size_t n_contexts,
                                       double mean_lo, double mean_hi, std::size_t n_levels,
                                       std::uint64_t seed) {
  if (n_contexts < 2 || n_contexts % 2 != 0) throw InvalidArgument("n_contexts must be even");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (!(mean_lo > 0.0 && mean_hi > mean_lo && mean_hi < 1.0)) {
    throw InvalidArgument("mean range must satisfy 0 < lo < hi < 1");
  }
  if (n_levels < 2) throw InvalidArgument("need at least two mean levels");

  Rng rng(seed);
  GammaExperiment ex;
  ex.n_contexts = n_contexts;
  ex.gamma_in = gamma_in;
  std::vector<double> f(n_contexts);
  std::vector<double> lx, ly_before, ly_after;
  for (std::size_t lev = 0; lev < n_levels; ++lev) {
    const double t = static_cast<double>(lev) / static_cast<double>(n_levels - 1);
    const double mu = mean_lo * std::pow(mean_hi / mean_lo, t);
    // Gamma(shape, scale) with shape * scale = mu and shape * scale^2 =
    // beta mu^gamma.
    const double shape = std::pow(mu, 2.0 - gamma_in) / beta;
    const double scale = beta * std::pow(mu, gamma_in - 1.0);
    for (auto& v : f) {
      v = rng.gamma(shape) * scale;
      if (v > 1.0) {
        v = 1.0;
        ++ex.clipped;
      }
    }
    auto moments = [](const std::vector<double>& xs) {
      double m = 0.0;
      for (double x : xs) m += x;
      m /= static_cast<double>(xs.size());
      double v = 0.0;
      for (double x : xs) v += (x - m) * (x - m);
      return std::pair{m, v / static_cast<double>(xs.size())};
    };
    std::vector<double> merged(n_contexts / 2);
    for (std::size_t l = 0; l < merged.size(); ++l) merged[l] = 0.5 * (f[2 * l] + f[2 * l + 1]);

    GammaLevel level;
    std::tie(level.mean, level.variance) = moments(f);
    std::tie(level.merged_mean, level.merged_variance) = moments(merged);
    ex.levels.push_back(level);
    lx.push_back(std::log(level.mean));
    ly_before.push_back(std::log(level.variance));
    ly_after.push_back(std::log(level.merged_variance));
  }
  ex.gamma_before = ols_slope(lx, ly_before);
  // Merged means equal the unmerged ones, so both fits share the abscissa.
  ex.gamma_after = ols_slope(lx, ly_after);
  return ex;
}

// ------------------------------------------------------------ suite

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<TheoremCheck> run_verification_suite(std::uint64_t seed) {
  std::vector<TheoremCheck> out;
  Rng rng(seed);
  auto random_rho = [&] { return 0.05 + 0.9 * rng.uniform(); };

  {
    // Marginal map is linear on mixtures of closed-text distributions.
    const double rho = random_rho();
    const auto x1 = enumerate_text_distribution(random_absorbing_matrix(4, rho, rng),
                                                random_distribution(4, rng), 6);
    const auto x2 = enumerate_text_distribution(random_absorbing_matrix(4, rho, rng),
                                                random_distribution(4, rng), 6);
    double worst = 0.0;
    for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
      worst = std::max(worst, phi_linearity_check(x1, x2, alpha));
    }
    out.push_back({"phi-linearity", worst < 1e-12, worst, 0.0, 1e-12,
                   "alpha in {0, 0.3, 0.7, 1}, K=4, L=6"});
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto k = static_cast<std::size_t>(2 + rng.below(7));
      worst = std::max(worst, std::abs(distortion_rate(random_pair(k, random_rho(), true, rng))
                                            .ratio -
                                        1.0));
    }
    out.push_back({"same-matrix ratio", worst < 1e-9, worst, 0.0, 1e-9,
                   "100 pairs, K <= 8, max |r - 1|"});
  }
  {
    double lowest = 1e300;
    for (int i = 0; i < 1000; ++i) {
      const auto k = static_cast<std::size_t>(2 + rng.below(7));
      lowest = std::min(lowest, distortion_rate(random_pair(k, random_rho(), false, rng)).ratio);
    }
    out.push_back({"ratio lower bound", lowest >= 1.0 - 1e-9, lowest, 1.0, 1e-9,
                   "1000 pairs, K <= 8, min r"});
  }
  {
    double worst_excess = -1e300;
    std::size_t ok = 0;
    for (int i = 0; i < 100; ++i) {
      const auto k = static_cast<std::size_t>(2 + rng.below(3));
      const auto pair = random_pair(k, random_rho(), false, rng);
      const auto en = enumerate_closed_texts(pair, 10);
      const double excess = std::abs(cos_half_dfr_x(pair) - en.partial_sum) - en.tail_bound;
      worst_excess = std::max(worst_excess, excess);
      if (excess <= 0.0) ++ok;
    }
    out.push_back({"resolvent vs enumeration", ok == 100, worst_excess, 0.0, 0.0,
                   std::to_string(ok) + "/100 pairs within tail bound, K <= 4, L = 10"});
  }
  for (double rho : {0.25, 0.5}) {
    const auto probe = probe_distortion_limit(6, rho, 8, rng.next_u64());
    const bool pass = probe.row_condition_held && probe.final_ratio() <= probe.bound + 0.05;
    out.push_back({"small-distance ratio, rho=" + fmt(rho), pass, probe.final_ratio(), probe.bound,
                   0.05,
                   std::string("delta halved 8 times; row condition ") +
                       (probe.row_condition_held ? "held" : "violated") +
                       (probe.monotone_tail ? "; monotone tail" : "; non-monotone tail")});
  }
  for (double g : {0.8, 1.0, 1.5}) {
    const double beta = std::pow(1e-4, 2.0 - g) / 10.0;
    const auto ex = gamma_merge_experiment(g, beta, 20000, 1e-4, 1e-1, 10, rng.next_u64());
    const double dev = std::abs(ex.gamma_after - g);
    out.push_back({"gamma invariance, gamma=" + fmt(g), dev <= 0.05, ex.gamma_after, g, 0.05,
                   "gamma_before=" + fmt(ex.gamma_before) + ", clipped=" +
                       std::to_string(ex.clipped)});
  }
  {
    const auto ex = gamma_merge_experiment(2.0, 0.1, 20000, 1e-4, 1e-1, 10, rng.next_u64());
    double worst_ratio = 0.0, worst_mean = 0.0;
    for (const auto& lv : ex.levels) {
      worst_ratio = std::max(worst_ratio, std::abs(lv.merged_variance / lv.variance - 0.5));
      worst_mean = std::max(worst_mean, std::abs(lv.merged_mean - lv.mean) / lv.mean);
    }
    const bool pass = worst_ratio <= 0.05 && worst_mean <= 1e-12;
    out.push_back({"merged variance halves", pass, worst_ratio, 0.0, 0.05,
                   "max |var_merged/var - 0.5| over 10 levels; max relative mean shift " +
                       fmt(worst_mean)});
  }
  return out;
}

}  // namespace frdim::theory
