#include <doctest.h>

#include <cmath>
#include <numeric>

#include "frdim/error.hpp"
#include "frdim/metrics.hpp"
#include "frdim/reduce.hpp"
#include "support.hpp"

using namespace frdim;

TEST_CASE("ReductionSpec bounds") {
  CHECK_THROWS_AS(ReductionSpec(0, 4), InvalidArgument);
  CHECK_THROWS_AS(ReductionSpec(5, 4), InvalidArgument);
  CHECK(ReductionSpec(4, 4).is_identity());
}

TEST_CASE("modulo projection") {
  const auto q = modulo_project({0.1, 0.2, 0.3, 0.4}, ReductionSpec(2, 4));
  REQUIRE(q.size() == 2);
  CHECK(q[0] == doctest::Approx(0.4));
  CHECK(q[1] == doctest::Approx(0.6));

  const ProbVector p({0.1, 0.2, 0.3, 0.4});
  CHECK(modulo_project(p, ReductionSpec(4, 4)) == p);
  const auto one = modulo_project(p, ReductionSpec(1, 4));
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(modulo_project(p, ReductionSpec(2, 6)), InvalidArgument);
}

TEST_CASE("sequence projection groups by index mod M") {
  const auto seq = StateSequence::from_rows({{0.1, 0.1, 0.1, 0.2, 0.2, 0.3},
                                             {0.5, 0.0, 0.0, 0.5, 0.0, 0.0},
                                             {0.0, 0.1, 0.2, 0.3, 0.2, 0.2}});
  const auto r = project_sequence(seq, ReductionSpec(3, 6));
  const std::vector<std::vector<double>> want = {{0.3, 0.3, 0.4}, {1.0, 0.0, 0.0}, {0.3, 0.3, 0.4}};
  REQUIRE(r.size() == 3);
  REQUIRE(r.dim() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t m = 0; m < 3; ++m) CHECK(r.row(t)[m] == doctest::Approx(want[t][m]));
  }
  const auto same = test::random_sequence(7, 5, 1);
  CHECK(project_sequence(same, ReductionSpec(5, 5)) == same);
}

// ------------------------------------------------------------ properties

TEST_CASE("mass conservation, linearity and contraction") {
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = 2 + rng.below(60);
    const std::size_t m = 1 + rng.below(k);
    const ReductionSpec spec(m, k);
    const ProbVector p(test::random_row(k, rng));
    const ProbVector p2(test::random_row(k, rng));
    const auto q = modulo_project(p, spec);
    const auto q2 = modulo_project(p2, spec);
    CHECK(std::abs(std::accumulate(q.values().begin(), q.values().end(), 0.0) - 1.0) < 1e-12);

    const double a = rng.uniform();
    std::vector<double> mix(k);
    for (std::size_t w = 0; w < k; ++w) mix[w] = a * p[w] + (1 - a) * p2[w];
    const auto qm = modulo_project(ProbVector(mix), spec);
    for (std::size_t g = 0; g < m; ++g) {
      CHECK(std::abs(qm[g] - (a * q[g] + (1 - a) * q2[g])) < 1e-12);
    }
    CHECK(fisher_rao(q, q2) <= fisher_rao(p, p2) + 1e-9);
  }
}
