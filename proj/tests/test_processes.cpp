#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "frdim/error.hpp"
#include "frdim/processes.hpp"
#include "frdim/reduce.hpp"

using namespace frdim;

TEST_CASE("Markov chain examples") {
  const MarkovChain stay(Eigen::MatrixXd::Identity(2, 2), ProbVector({1, 0}));
  const auto s = gen_markov(stay, 50, 1);
  CHECK(s.rows.size() == 50);
  for (std::size_t t = 0; t < 50; ++t) {
    CHECK(s.words[t] == 0);
    CHECK(s.rows.row(t)[0] == 1.0);
    CHECK(s.rows.row(t)[1] == 0.0);
  }

  const MarkovChain flat(Eigen::MatrixXd::Constant(2, 2, 0.5), ProbVector({0.5, 0.5}));
  const auto f = gen_markov(flat, 100, 2);
  for (std::size_t t = 0; t < 100; ++t) {
    CHECK(f.rows.row(t)[0] == 0.5);
    CHECK(f.rows.row(t)[1] == 0.5);
  }

  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_AS(MarkovChain(bad, ProbVector({0.5, 0.5})), InvalidArgument);
  CHECK_THROWS_AS(MarkovChain(Eigen::MatrixXd::Identity(3, 3), ProbVector({0.5, 0.5})),
                  InvalidArgument);
}

TEST_CASE("Markov rows follow the sampled words and bigram frequencies") {
  Eigen::MatrixXd a(3, 3);
  a << 0.1, 0.6, 0.3,  //
      0.5, 0.25, 0.25,  //
      0.2, 0.2, 0.6;
  const MarkovChain chain(a, ProbVector({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  const std::size_t n = 60000;
  const auto s = gen_markov(chain, n, 3);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(s.rows.row(t)[j] == a(static_cast<Eigen::Index>(s.words[t]),
                                  static_cast<Eigen::Index>(j)));
    }
    if (t + 1 < n) counts(static_cast<Eigen::Index>(s.words[t]),
                          static_cast<Eigen::Index>(s.words[t + 1])) += 1;
  }
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double row_n = counts.row(i).sum();
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double p = a(i, j);
      const double sigma = std::sqrt(p * (1 - p) / row_n);
      CHECK(std::abs(counts(i, j) / row_n - p) < 3 * sigma);
    }
  }
}

TEST_CASE("Dirichlet sampling") {
  CHECK_THROWS_AS(DirichletSpec({1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(DirichletSpec({1.0, -2.0}), InvalidArgument);

  const std::size_t n = 20000;
  const auto seq = gen_dirichlet_iid(DirichletSpec({1.0, 1.0}), n, 4);
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean += seq.row(t)[0];
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean - 0.5) < 3 * std::sqrt(1.0 / 12.0 / static_cast<double>(n)));

  // Means and variances of a skewed spec: E = a_i/a0, Var = a_i(a0-a_i)/(a0^2(a0+1)).
  const std::vector<double> alpha = {0.3, 2.0, 5.0};
  const auto s2 = gen_dirichlet_iid(DirichletSpec(alpha), n, 5);
  const double a0 = 7.3;
  for (std::size_t i = 0; i < 3; ++i) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      m += s2.row(t)[i];
      m2 += s2.row(t)[i] * s2.row(t)[i];
    }
    m /= static_cast<double>(n);
    const double var = m2 / static_cast<double>(n) - m * m;
    const double want_var = alpha[i] * (a0 - alpha[i]) / (a0 * a0 * (a0 + 1));
    CHECK(std::abs(m - alpha[i] / a0) < 3 * std::sqrt(want_var / static_cast<double>(n)));
    CHECK(var == doctest::Approx(want_var).epsilon(0.05));
  }
}

TEST_CASE("tiny concentrations still give valid rows") {
  std::vector<double> alpha(2000, 2.2e-5);
  alpha[0] = 3.0;
  alpha[1] = 0.2;
  const auto seq = gen_dirichlet_iid(DirichletSpec(alpha), 200, 6);
  CHECK(validate(seq, kSumToleranceF64).empty());
  DirichletSampler sampler(DirichletSpec::symmetric(50257, 1e-5), 7);
  std::vector<double> row(50257);
  for (int i = 0; i < 5; ++i) {
    sampler.next(row);
    CHECK(is_distribution(row, kSumToleranceF64));
  }
}

TEST_CASE("sphere noise is uniform on the quarter circle") {
  const std::size_t n = 5000;
  const auto seq = gen_uniform_sphere_noise(2, n, 8);
  std::vector<double> u(n);
  for (std::size_t t = 0; t < n; ++t) {
    CHECK(std::abs(seq.row(t)[0] + seq.row(t)[1] - 1.0) < 1e-12);
    // Angle to [1, 0], scaled to [0, 1].
    u[t] = std::acos(std::min(std::sqrt(seq.row(t)[0]), 1.0)) / (std::numbers::pi / 2);
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    ks = std::max({ks, std::abs(u[i] - lo), std::abs(hi - u[i])});
  }
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));

  const auto big = gen_uniform_sphere_noise(500, 20, 9);
  for (std::size_t t = 0; t < big.size(); ++t) {
    CHECK(std::abs(std::accumulate(big.row(t).begin(), big.row(t).end(), 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("BA first steps") {
  GrowthNetConfig cfg;
  cfg.n_steps = 5;
  const auto seq = gen_growth_net(cfg, 1);
  REQUIRE(seq.dim() == 6);
  CHECK(std::ranges::equal(seq.row(0), std::vector<double>{1, 0, 0, 0, 0, 0}));
  CHECK(std::ranges::equal(seq.row(1), std::vector<double>{0.5, 0.5, 0, 0, 0, 0}));
  CHECK(validate(seq, kSumToleranceF64).empty());
}

TEST_CASE("growth config checks") {
  GrowthNetConfig cfg;
  cfg.m0 = 0;
  CHECK_THROWS_AS(cfg.check(), InvalidArgument);
  cfg.m0 = 1;
  cfg.m = 0;
  CHECK_THROWS_AS(cfg.check(), InvalidArgument);
  cfg.m = 1;
  cfg.kappa = 0.0;
  CHECK_THROWS_AS(cfg.check(), InvalidArgument);
  cfg.kappa = 1.5;
  CHECK_THROWS_AS(cfg.check(), InvalidArgument);
  cfg.kappa = 1.0;
  CHECK_NOTHROW(cfg.check());
}

// ------------------------------------------------------------ properties

TEST_CASE("growth process invariants") {
  struct Case {
    std::size_t m0, m;
    std::optional<double> kappa;
  };
  for (const Case c : {Case{1, 1, {}}, Case{3, 2, {}}, Case{1, 1, 0.005}, Case{1, 1, 0.1},
                       Case{4, 3, 0.2}, Case{2, 1, 1.0}}) {
    GrowthNetConfig cfg;
    cfg.n_steps = 1500;
    cfg.m0 = c.m0;
    cfg.m = c.m;
    cfg.kappa = c.kappa;
    GrowthNet net(cfg, 11);
    std::vector<double> row(net.dim());
    std::uint64_t expected_edges = net.initial_edges();
    for (std::size_t t = 1; t <= cfg.n_steps; ++t) {
      const std::size_t born = net.born();
      CHECK(born == c.m0 + t - 1);
      net.next(row);
      CHECK(is_distribution(row, kSumToleranceF64));
      for (std::size_t k = born; k < row.size(); ++k) CHECK(row[k] == 0.0);
      const auto support = static_cast<std::size_t>(
          std::count_if(row.begin(), row.end(), [](double v) { return v > 0.0; }));
      if (c.kappa) {
        const auto cap = static_cast<std::size_t>(std::ceil(*c.kappa * static_cast<double>(born)));
        CHECK(support <= std::max<std::size_t>(1, cap));
      }
      expected_edges += std::min(c.m, support);
      const auto& deg = net.degrees();
      CHECK(std::accumulate(deg.begin(), deg.end(), std::uint64_t{0}) == 2 * net.edges());
    }
    CHECK(net.edges() == expected_edges);
    CHECK(net.done());
    CHECK_THROWS_AS(net.next(row), InvalidArgument);
  }
}

TEST_CASE("generators are deterministic per seed") {
  GrowthNetConfig cfg;
  cfg.n_steps = 300;
  CHECK(gen_growth_net(cfg, 5) == gen_growth_net(cfg, 5));
  CHECK_FALSE(gen_growth_net(cfg, 5) == gen_growth_net(cfg, 6));
  cfg.kappa = 0.05;
  CHECK(gen_growth_net(cfg, 5) == gen_growth_net(cfg, 5));
  CHECK(gen_dirichlet_iid(DirichletSpec::symmetric(30, 0.1), 100, 3) ==
        gen_dirichlet_iid(DirichletSpec::symmetric(30, 0.1), 100, 3));
  CHECK(gen_uniform_sphere_noise(30, 100, 3) == gen_uniform_sphere_noise(30, 100, 3));
  const MarkovChain flat(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3), ProbVector({1, 0, 0}));
  CHECK(gen_markov(flat, 200, 4).words == gen_markov(flat, 200, 4).words);
}

TEST_CASE("stream_rows equals generate, filter, reduce") {
  const auto full = gen_uniform_sphere_noise(40, 300, 12);
  FilterSpec f;
  f.eta = 0.2;
  f.entropy_min = 4.0;
  const auto want = project_sequence(apply_filter(full, f).rows, ReductionSpec(7, 40));
  SphereNoiseSampler src(40, 12);
  const auto got = stream_rows(src, 300, f, 7);
  CHECK(got == want);
  CHECK(got.size() > 0);
  CHECK(got.size() < 300);
}
