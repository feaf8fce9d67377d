#include "frdim/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "frdim/error.hpp"

namespace frdim {

namespace {

// Index drawn from a discrete distribution by inverse CDF; rounding that
// leaves u beyond the cumulative sum falls back to the last positive entry.
std::size_t draw_index(Rng& rng, std::span<const double> p) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    cum += p[j];
    last_positive = j;
    if (u < cum) return j;
  }
  return last_positive;
}

}  // namespace

// ------------------------------------------------------------- Markov

MarkovChain::MarkovChain(Eigen::MatrixXd transition, ProbVector initial)
    : transition_(std::move(transition)), initial_(std::move(initial)) {
  if (transition_.rows() != transition_.cols()) {
    throw InvalidArgument("transition matrix must be square");
  }
  if (static_cast<std::size_t>(transition_.rows()) != initial_.size()) {
    throw InvalidArgument("initial distribution length does not match the transition matrix");
  }
  for (Eigen::Index i = 0; i < transition_.rows(); ++i) {
    const Eigen::VectorXd r = transition_.row(i);
    if (!is_distribution(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())),
                         kSumToleranceF64)) {
      throw InvalidArgument("transition row " + std::to_string(i) + " is not a distribution");
    }
  }
}

MarkovSample gen_markov(const MarkovChain& chain, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = chain.dim();
  // Row-major copy so each transition row is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a =
      chain.transition();
  MarkovSample out{StateSequence(k), {}};
  out.rows.reserve(n);
  out.words.reserve(n);
  std::size_t word = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t == 0) {
      word = draw_index(rng, chain.initial().values());
    } else {
      word = draw_index(rng, std::span<const double>(a.data() + out.words.back() * k, k));
    }
    out.words.push_back(word);
    out.rows.push_back(std::span<const double>(a.data() + word * k, k));
  }
  return out;
}

// ---------------------------------------------------------- Dirichlet

DirichletSpec::DirichletSpec(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.empty()) throw InvalidArgument("Dirichlet needs at least one concentration");
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw InvalidArgument("Dirichlet concentrations must be positive and finite");
    }
  }
}

DirichletSpec DirichletSpec::symmetric(std::size_t k, double each) {
  return DirichletSpec(std::vector<double>(k, each));
}

DirichletSampler::DirichletSampler(DirichletSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed), logs_(spec_.dim()) {}

void DirichletSampler::next(std::span<double> out) {
  const auto alpha = spec_.alpha();
  for (;;) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      logs_[k] = rng_.log_gamma(alpha[k]);
      top = std::max(top, logs_[k]);
    }
    // Normalizing relative to the largest log-gamma keeps at least one
    // coordinate at exp(0) = 1 before division, so the row cannot vanish.
    double sum = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      out[k] = std::exp(logs_[k] - top);
      sum += out[k];
    }
    if (std::isfinite(sum) && sum > 0.0) {
      for (auto& v : out) v /= sum;
      return;
    }
    ++resampled_;
  }
}

StateSequence gen_dirichlet_iid(const DirichletSpec& spec, std::size_t n, std::uint64_t seed) {
  DirichletSampler sampler(spec, seed);
  return stream_rows(sampler, n);
}

// ------------------------------------------------------- sphere noise

SphereNoiseSampler::SphereNoiseSampler(std::size_t k, std::uint64_t seed) : k_(k), rng_(seed) {
  if (k_ < 2) throw InvalidArgument("sphere noise needs K >= 2");
}

void SphereNoiseSampler::next(std::span<double> out) {
  for (;;) {
    double norm2 = 0.0;
    for (auto& v : out) {
      const double g = rng_.normal();
      v = g * g;
      norm2 += v;
    }
    if (norm2 > 0.0) {
      for (auto& v : out) v /= norm2;
      return;
    }
  }
}

StateSequence gen_uniform_sphere_noise(std::size_t k, std::size_t n, std::uint64_t seed) {
  SphereNoiseSampler sampler(k, seed);
  return stream_rows(sampler, n);
}

// ------------------------------------------------------- growth nets

void GrowthNetConfig::check() const {
  if (m0 < 1) throw InvalidArgument("growth process needs m0 >= 1");
  if (m < 1) throw InvalidArgument("growth process needs m >= 1");
  if (kappa && !(*kappa > 0.0 && *kappa <= 1.0)) {
    throw InvalidArgument("kappa must lie in (0, 1]");
  }
  if (effective_total_nodes() < m0 + n_steps) {
    throw InvalidArgument("total_nodes must be at least m0 + n_steps");
  }
}

GrowthNet::GrowthNet(const GrowthNetConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed), total_(config.effective_total_nodes()) {
  config_.check();
  degree_.assign(total_, 0);
  born_ = config_.m0;
  for (std::size_t i = 0; i < born_; ++i) by_degree_.emplace(0, i);
  // Seed wiring: nothing for a single node, one edge for two, a ring
  // otherwise.
  if (born_ == 2) {
    add_edge(0, 1);
  } else if (born_ > 2) {
    for (std::size_t i = 0; i < born_; ++i) add_edge(i, (i + 1) % born_);
  }
  initial_edges_ = edges_;
}

void GrowthNet::add_edge(std::size_t a, std::size_t b) {
  for (std::size_t v : {a, b}) {
    if (v < born_) by_degree_.erase({degree_[v], v});
    ++degree_[v];
    if (v < born_) by_degree_.emplace(degree_[v], v);
  }
  ++edges_;
}

std::size_t GrowthNet::admissible_size() const noexcept {
  if (!config_.kappa) return born_;
  // The small offset keeps products like 0.005 * 200 from rounding up past
  // an exact integer.
  const double raw = *config_.kappa * static_cast<double>(born_);
  const auto size = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(size, 1, born_);
}

void GrowthNet::next(std::span<double> out) {
  if (out.size() != total_) throw InvalidArgument("output row has the wrong length");
  if (done()) throw InvalidArgument("growth process already ran all steps");

  admissible_.clear();
  if (config_.kappa) {
    const std::size_t size = admissible_size();
    auto it = by_degree_.begin();
    for (std::size_t i = 0; i < size; ++i, ++it) admissible_.push_back(it->second);
    std::sort(admissible_.begin(), admissible_.end());
  } else {
    admissible_.resize(born_);
    std::iota(admissible_.begin(), admissible_.end(), std::size_t{0});
  }

  weight_.resize(admissible_.size());
  std::uint64_t total_weight = 0;
  for (std::size_t i = 0; i < admissible_.size(); ++i) {
    weight_[i] = degree_[admissible_[i]];
    total_weight += weight_[i];
  }
  // Zero total degree (e.g. a lone seed node): uniform over the admissible set.
  if (total_weight == 0) {
    std::fill(weight_.begin(), weight_.end(), 1);
    total_weight = weight_.size();
  }

  std::fill(out.begin(), out.end(), 0.0);
  const double inv = 1.0 / static_cast<double>(total_weight);
  for (std::size_t i = 0; i < admissible_.size(); ++i) {
    out[admissible_[i]] = static_cast<double>(weight_[i]) * inv;
  }

  // Draw up to m distinct targets; integer weights keep the draw exact.
  const std::size_t new_node = born_;
  std::vector<std::size_t> targets;
  std::uint64_t remaining = total_weight;
  while (targets.size() < config_.m && remaining > 0) {
    std::uint64_t r = rng_.below(remaining);
    std::size_t pick = 0;
    for (; pick < weight_.size(); ++pick) {
      if (r < weight_[pick]) break;
      r -= weight_[pick];
    }
    targets.push_back(admissible_[pick]);
    remaining -= weight_[pick];
    weight_[pick] = 0;
  }

  ++born_;
  by_degree_.emplace(0, new_node);
  for (std::size_t t : targets) add_edge(new_node, t);
  ++steps_;
}

StateSequence gen_growth_net(const GrowthNetConfig& config, std::uint64_t seed) {
  GrowthNet net(config, seed);
  return stream_rows(net, config.n_steps);
}

}  // namespace frdim
