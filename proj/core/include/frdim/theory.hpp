#pragma once

// Exact numerical checks of how the first-word marginal map distorts
// Fisher-Rao distances between distributions over whole texts, for pairs
// of absorbing Markov processes, plus the variance-mean exponent
// experiment for pairwise context merging.
//
// Conventions: the vocabulary has K tokens and the end token is the last
// index (K - 1). A closed text is a run of n >= 0 ordinary words followed
// by the end token.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frdim/random.hpp"

namespace frdim::theory {

/// Two absorbing Markov processes over the same vocabulary that leave to
/// the end token with the same probability rho from every ordinary word.
class AbsorbingMarkovPair {
 public:
  /// Validates: square K x K row-stochastic matrices (K >= 2); the end row
  /// of each is the unit vector on the end token; every ordinary row puts
  /// exactly rho on the end token; 0 < rho < 1; both initial vectors are
  /// distributions of length K.
  AbsorbingMarkovPair(Eigen::MatrixXd a, Eigen::MatrixXd b, double rho, Eigen::VectorXd init_a,
                      Eigen::VectorXd init_b);

  std::size_t vocab() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t end_token() const noexcept { return vocab() - 1; }
  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::MatrixXd& b() const noexcept { return b_; }
  double rho() const noexcept { return rho_; }
  const Eigen::VectorXd& init_a() const noexcept { return init_a_; }
  const Eigen::VectorXd& init_b() const noexcept { return init_b_; }

 private:
  Eigen::MatrixXd a_, b_;
  double rho_;
  Eigen::VectorXd init_a_, init_b_;
};

/// Bhattacharyya coefficient between the two closed-text distributions,
/// cos(d_x / 2), in closed form:
///   h1 + u^T (I - G)^{-1} e
/// with G_ij = sqrt(A_ij B_ij) over ordinary words, u_w = sqrt(a0_w b0_w),
/// e_w = sqrt(A_w,end B_w,end) and h1 = sqrt(a0_end b0_end).
/// Throws NumericalError if I - G is singular.
double cos_half_dfr_x(const AbsorbingMarkovPair& pair);

/// 2 arccos of a coefficient clamped into [0, 1].
double angle_distance(double bhattacharyya);

struct EnumerationResult {
  /// Sum of sqrt(x_a(text) x_b(text)) over closed texts with at most
  /// max_words ordinary words.
  double partial_sum = 0.0;
  /// Upper bound on the omitted texts: (1 - rho)^max_words.
  double tail_bound = 0.0;
  std::uint64_t texts = 0;
};

/// Brute-force oracle for cos_half_dfr_x: walks every closed text with at
/// most max_words ordinary words, computing both text probabilities as
/// explicit products. Throws NumericalError when the number of texts
/// exceeds max_texts.
EnumerationResult enumerate_closed_texts(const AbsorbingMarkovPair& pair, std::size_t max_words,
                                         std::uint64_t max_texts = 50'000'000);

/// Fisher-Rao distance between the two rows of A and B for word w.
double row_distance(const AbsorbingMarkovPair& pair, std::size_t w);

struct DistortionReport {
  double d_x = 0.0;    ///< distance between closed-text distributions
  double d_p = 0.0;    ///< distance between first-word marginals
  double ratio = 0.0;  ///< d_x / d_p
  double bound = 0.0;  ///< rho^(-1/2)
  std::string method = "resolvent";
  /// Largest row distance max_w Delta_w over ordinary words.
  double max_row_distance = 0.0;
  /// Whether Delta_w <= d_p holds for every ordinary word.
  bool row_condition_holds = false;
  std::optional<std::size_t> truncation_length;
  std::optional<double> tail_bound;
};

/// Throws NumericalError when the initial distributions coincide (d_p = 0).
DistortionReport distortion_rate(const AbsorbingMarkovPair& pair);

// ----------------------------------------------------- random pairs

/// A random absorbing process: ordinary rows put rho on the end token and
/// spread 1 - rho over ordinary words with Dirichlet(1) weights.
Eigen::MatrixXd random_absorbing_matrix(std::size_t vocab, double rho, Rng& rng);

/// Random distribution over the whole vocabulary (end token included).
Eigen::VectorXd random_distribution(std::size_t vocab, Rng& rng);

/// Random pair with independent matrices (or a shared one when
/// same_matrix) and distinct random initial distributions.
AbsorbingMarkovPair random_pair(std::size_t vocab, double rho, bool same_matrix, Rng& rng);

// -------------------------------------------------- limit probing

struct LimitProbe {
  double rho = 0.0;
  double bound = 0.0;
  std::vector<double> deltas;
  std::vector<double> d_p;
  std::vector<double> ratios;
  /// Every step satisfied Delta_w <= d_p.
  bool row_condition_held = true;
  /// Ratios changed monotonically over the last halvings.
  bool monotone_tail = true;
  double final_ratio() const { return ratios.empty() ? 0.0 : ratios.back(); }
};

/// Probes the small-distance limit of the distortion ratio. Starting from
/// a random process A and initial state p (whose end mass equals rho, as
/// for any next-word distribution of the process), B(delta) and
/// p_b(delta) are perturbed along fixed random directions of size delta;
/// the row perturbation is rescaled at every step so that
/// max_w Delta_w = d_p, the extreme case the row condition allows. delta
/// is halved `halvings` times.
LimitProbe probe_distortion_limit(std::size_t vocab, double rho, std::size_t halvings,
                                  std::uint64_t seed, double delta0 = 0.1);

// ------------------------------------------------- marginal map

/// A finite measure over closed texts. Texts are word-index sequences
/// over `vocab` tokens, each ending in the end token (vocab - 1).
struct ClosedTextDistribution {
  std::size_t vocab = 0;
  std::vector<std::vector<std::size_t>> texts;
  std::vector<double> mass;
};

/// All closed texts with at most max_words ordinary words under a single
/// absorbing process (matrix, initial distribution), with their
/// probabilities.
ClosedTextDistribution enumerate_text_distribution(const Eigen::MatrixXd& transition,
                                                   const Eigen::VectorXd& initial,
                                                   std::size_t max_words);

/// First-word marginal: phi(x)(w) = sum of x over texts starting with w.
std::vector<double> first_word_marginal(const ClosedTextDistribution& x);

/// max_w |phi(alpha x1 + (1 - alpha) x2)(w) - (alpha phi(x1) + (1 - alpha)
/// phi(x2))(w)|. x1 and x2 must list the same texts in the same order.
double phi_linearity_check(const ClosedTextDistribution& x1, const ClosedTextDistribution& x2,
                           double alpha);

// ------------------------------------------- variance-mean exponent

struct GammaLevel {
  double mean = 0.0;
  double variance = 0.0;
  double merged_mean = 0.0;
  double merged_variance = 0.0;
};

struct GammaExperiment {
  std::size_t n_contexts = 0;  ///< 2L contexts per level
  double gamma_in = 0.0;
  double gamma_before = 0.0;
  double gamma_after = 0.0;
  std::vector<GammaLevel> levels;
  /// Draws above 1 clipped to 1 (frequencies are probabilities).
  std::size_t clipped = 0;
};

/// For `n_levels` log-spaced mean levels in [mean_lo, mean_hi], draws
/// n_contexts word frequencies with mean mu and variance beta mu^gamma_in
/// (gamma-distributed, hence nonnegative), fits the exponent by least
/// squares of log variance on log mean, merges contexts pairwise by
/// averaging (2l, 2l + 1) and refits. Variances are population variances.
GammaExperiment gamma_merge_experiment(double gamma_in, double beta, std::size_t n_contexts,
                                       double mean_lo, double mean_hi, std::size_t n_levels,
                                       std::uint64_t seed);

// ------------------------------------------------------- suite

struct TheoremCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Runs every check at the settings used by the `verify` command.
std::vector<TheoremCheck> run_verification_suite(std::uint64_t seed);

}  // namespace frdim::theory
