#pragma once

// Seeded generators of probability-vector trajectories: Markov chains,
// i.i.d. Dirichlet draws, uniform noise on the simplex, and the
// Barabasi-Albert / fractional anti-preferential attachment growth
// processes. Every generator owns its Rng; equal seeds give bit-identical
// output.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "frdim/prob.hpp"
#include "frdim/random.hpp"
#include "frdim/reduce.hpp"

namespace frdim {

// ------------------------------------------------------------- Markov

/// Row-stochastic transition matrix (A(i, j) = P(next = j | current = i))
/// and initial distribution. Validated on construction.
class MarkovChain {
 public:
  MarkovChain(Eigen::MatrixXd transition, ProbVector initial);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(transition_.rows()); }
  const Eigen::MatrixXd& transition() const noexcept { return transition_; }
  const ProbVector& initial() const noexcept { return initial_; }

 private:
  Eigen::MatrixXd transition_;
  ProbVector initial_;
};

struct MarkovSample {
  /// Row t is the exact next-word distribution after word t, i.e. row
  /// words[t] of the transition matrix.
  StateSequence rows;
  std::vector<std::size_t> words;
};

/// Draws words[0] from the initial distribution and words[t + 1] from the
/// transition row of words[t].
MarkovSample gen_markov(const MarkovChain& chain, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------- Dirichlet

class DirichletSpec {
 public:
  explicit DirichletSpec(std::vector<double> alpha);
  /// All K concentrations equal to `each`.
  static DirichletSpec symmetric(std::size_t k, double each);

  std::size_t dim() const noexcept { return alpha_.size(); }
  std::span<const double> alpha() const noexcept { return alpha_; }

 private:
  std::vector<double> alpha_;
};

/// Gamma-normalization sampler working in log space, so concentrations as
/// small as 1e-5 do not underflow every coordinate to zero.
class DirichletSampler {
 public:
  DirichletSampler(DirichletSpec spec, std::uint64_t seed);

  std::size_t dim() const noexcept { return spec_.dim(); }
  void next(std::span<double> out);
  /// Draws rejected because the normalized row was not a distribution.
  std::size_t resampled() const noexcept { return resampled_; }

 private:
  DirichletSpec spec_;
  Rng rng_;
  std::vector<double> logs_;
  std::size_t resampled_ = 0;
};

StateSequence gen_dirichlet_iid(const DirichletSpec& spec, std::size_t n, std::uint64_t seed);

// ------------------------------------------------------- sphere noise

/// Uniform points on the positive orthant of the unit sphere in sqrt
/// coordinates: s = |g| / ||g|| for standard normal g, p = s^2.
class SphereNoiseSampler {
 public:
  SphereNoiseSampler(std::size_t k, std::uint64_t seed);

  std::size_t dim() const noexcept { return k_; }
  void next(std::span<double> out);

 private:
  std::size_t k_;
  Rng rng_;
};

StateSequence gen_uniform_sphere_noise(std::size_t k, std::size_t n, std::uint64_t seed);

// ------------------------------------------------------- growth nets

struct GrowthNetConfig {
  std::size_t n_steps = 10000;
  std::size_t m0 = 1;
  std::size_t m = 1;
  /// Truncation ratio of fractional anti-preferential attachment; nullopt
  /// runs the standard Barabasi-Albert process.
  std::optional<double> kappa;
  /// Node slots in every emitted row; 0 means m0 + n_steps.
  std::size_t total_nodes = 0;

  std::size_t effective_total_nodes() const noexcept {
    return total_nodes != 0 ? total_nodes : m0 + n_steps;
  }
  void check() const;
};

/// Step-by-step growth process. Each call to next() emits the current
/// connection distribution over all node slots, then connects a new node
/// to up to m distinct nodes drawn from it (without replacement).
class GrowthNet {
 public:
  GrowthNet(const GrowthNetConfig& config, std::uint64_t seed);

  std::size_t dim() const noexcept { return total_; }
  std::size_t born() const noexcept { return born_; }
  std::size_t steps_done() const noexcept { return steps_; }
  std::uint64_t edges() const noexcept { return edges_; }
  std::uint64_t initial_edges() const noexcept { return initial_edges_; }
  const std::vector<std::uint64_t>& degrees() const noexcept { return degree_; }
  bool done() const noexcept { return steps_ >= config_.n_steps; }

  /// Size of the admissible set at the current step: every born node for
  /// BA, the ceil(kappa * born) lowest-degree nodes (at least 1) for FAPA.
  std::size_t admissible_size() const noexcept;

  void next(std::span<double> out);

 private:
  void add_edge(std::size_t a, std::size_t b);

  GrowthNetConfig config_;
  Rng rng_;
  std::size_t total_;
  std::size_t born_ = 0;
  std::size_t steps_ = 0;
  std::uint64_t edges_ = 0;
  std::uint64_t initial_edges_ = 0;
  std::vector<std::uint64_t> degree_;
  // (degree, index) of born nodes; begin() is the lowest-degree node with
  // ties broken by the smaller index.
  std::set<std::pair<std::uint64_t, std::size_t>> by_degree_;
  std::vector<std::size_t> admissible_;
  std::vector<std::uint64_t> weight_;
};

StateSequence gen_growth_net(const GrowthNetConfig& config, std::uint64_t seed);

// ------------------------------------------------------------ helpers

/// Pulls n rows from a row source (anything with dim() and next(span)),
/// optionally dropping rows that fail `filter` and projecting kept rows
/// with modulo reduction. Only the kept, reduced rows are stored, so
/// sources with very large K can be consumed in bounded memory.
template <typename Source>
StateSequence stream_rows(Source& source, std::size_t n,
                          const std::optional<FilterSpec>& filter = std::nullopt,
                          std::optional<std::size_t> m_groups = std::nullopt) {
  const std::size_t k = source.dim();
  std::optional<ReductionSpec> reduction;
  if (m_groups && *m_groups < k) reduction.emplace(*m_groups, k);
  StateSequence out(reduction ? reduction->m_groups() : k);
  std::vector<double> row(k);
  std::vector<double> reduced(reduction ? reduction->m_groups() : 0);
  for (std::size_t t = 0; t < n; ++t) {
    source.next(row);
    if (filter && !passes_filter(row, *filter)) continue;
    if (reduction) {
      project_row(row, reduced);
      out.push_back(reduced);
    } else {
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace frdim
