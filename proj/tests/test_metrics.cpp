#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "frdim/error.hpp"
#include "frdim/metrics.hpp"
#include "support.hpp"

using namespace frdim;
using std::numbers::pi;

TEST_CASE("Bhattacharyya coefficient") {
  CHECK(bhattacharyya_coeff({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bhattacharyya_coeff({1, 0}, {0, 1}) == 0.0);
  CHECK(bhattacharyya_coeff({0.5, 0.5}, {1, 0}) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(bhattacharyya_coeff({0.5, 0.5}, {1, 0, 0}), InvalidArgument);
}

TEST_CASE("Fisher-Rao distance") {
  CHECK(fisher_rao({0.3, 0.7}, {0.3, 0.7}) == 0.0);
  CHECK(fisher_rao({1, 0}, {0, 1}) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(fisher_rao({0.5, 0.5}, {1, 0}) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK_THROWS_AS(fisher_rao({0.5, 0.5}, {1, 0, 0}), InvalidArgument);
}

TEST_CASE("Euclidean distance") {
  CHECK(euclidean({0.3, 0.7}, {0.3, 0.7}) == 0.0);
  CHECK(euclidean({1, 0}, {0, 1}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(euclidean({0.5, 0.5}, {1, 0}) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("metric names") {
  CHECK(parse_metric("fisher-rao") == Metric::kFisherRao);
  CHECK(parse_metric("euclidean") == Metric::kEuclidean);
  CHECK(to_string(Metric::kFisherRao) == "fisher-rao");
  CHECK_THROWS_AS(parse_metric("kl"), InvalidArgument);
}

TEST_CASE("sqrt embedding") {
  const SqrtEmbedding e(StateSequence::from_rows({{0.25, 0.75}, {1, 0}}));
  CHECK(e.row(0)[0] == 0.5);
  CHECK(e.row(0)[1] == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(e.row(1)[0] == 1.0);
  CHECK(e.row(1)[1] == 0.0);
}

TEST_CASE("embedded dots match direct coefficients") {
  const auto seq = test::random_sequence(5, 10, 11);
  const auto e = sqrt_embed(seq);
  for (std::size_t i = 0; i < 5; ++i) {
    const double norm = std::sqrt(e.dot(i, i));
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 0; j < 5; ++j) {
      double bc = 0.0;
      for (std::size_t w = 0; w < 10; ++w) bc += std::sqrt(seq.row(i)[w] * seq.row(j)[w]);
      CHECK(std::abs(e.dot(i, j) - bc) < 1e-6);
      CHECK(std::abs(e.distance(i, j) - 2.0 * std::acos(std::min(bc, 1.0))) < 1e-6);
    }
  }
}

TEST_CASE("chord form keeps precision near zero") {
  // For nearly equal rows 2 acos(BC) loses everything below ~1e-8;
  // the chord form does not.
  const double d = 1e-10;
  const ProbVector p({0.5, 0.5});
  const ProbVector q({0.5 + d, 0.5 - d});
  // Exact: 2 asin of half the chord between the square-root points, which
  // for small d is d / sqrt(p (1 - p)) = 2 d.
  CHECK(fisher_rao(p, q) == doctest::Approx(2 * d).epsilon(1e-6));
  CHECK(detail::fisher_rao_from_chord(0.0) == 0.0);
  CHECK(detail::fisher_rao_from_chord(std::sqrt(2.0)) == doctest::Approx(pi));
}

// ------------------------------------------------------------ properties

TEST_CASE("metric axioms on random triples") {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 2 + rng.below(20);
    const ProbVector p(test::random_row(k, rng));
    const ProbVector q(test::random_row(k, rng));
    const ProbVector r(test::random_row(k, rng));
    CHECK(fisher_rao(p, q) == fisher_rao(q, p));
    CHECK(euclidean(p, q) == euclidean(q, p));
    CHECK(fisher_rao(p, p) == 0.0);
    CHECK(euclidean(p, p) == 0.0);
    const double d = fisher_rao(p, q);
    CHECK(d >= 0.0);
    CHECK(d <= pi);
    CHECK(fisher_rao(p, r) <= fisher_rao(p, q) + fisher_rao(q, r) + 1e-9);

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t j = k; j > 1; --j) std::swap(perm[j - 1], perm[rng.below(j)]);
    std::vector<double> pp(k), qq(k);
    for (std::size_t j = 0; j < k; ++j) {
      pp[j] = p[perm[j]];
      qq[j] = q[perm[j]];
    }
    CHECK(fisher_rao(ProbVector(pp), ProbVector(qq)) == doctest::Approx(d).epsilon(1e-12));
    CHECK(euclidean(ProbVector(pp), ProbVector(qq)) ==
          doctest::Approx(euclidean(p, q)).epsilon(1e-12));
  }
}

TEST_CASE("clamping keeps distances finite") {
  // Rows whose coefficient rounds above 1.
  const ProbVector p({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(std::isfinite(fisher_rao(p, p)));
  CHECK(bhattacharyya_coeff(p, p) <= 1.0);
}
