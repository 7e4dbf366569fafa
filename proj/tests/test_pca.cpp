#include <catch2/catch_amalgamated.hpp>

#include "icsclust/ics.hpp"
#include "icsclust/metrics.hpp"
#include "icsclust/pca.hpp"
#include "icsclust/simgen.hpp"
#include "test_support.hpp"

using namespace icsclust;
using test::gaussian_matrix;

TEST_CASE("spherical data gives a flat spectrum") {
  Rng rng(801);
  const Matrix X = gaussian_matrix(5000, 4, rng);
  const auto r = pca(X, cov(X));
  for (int j = 0; j < 4; ++j) REQUIRE(r.eigenvalues(j) == Catch::Approx(1.0).margin(0.06));
}

TEST_CASE("2x2 correlation closed form") {
  Rng rng(802);
  Matrix X(1000, 2);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.normal(), b = rng.normal();
    X(i, 0) = a;
    X(i, 1) = 0.5 * a + std::sqrt(0.75) * b;  // correlation 0.5
  }
  ScatterEstimate exact;
  exact.location = Vector::Zero(2);
  exact.matrix.resize(2, 2);
  exact.matrix << 1, 0.5, 0.5, 1;
  const auto r = pca(X, exact);
  REQUIRE(r.eigenvalues(0) == Catch::Approx(1.5));
  REQUIRE(r.eigenvalues(1) == Catch::Approx(0.5));
}

TEST_CASE("loadings are orthonormal and reconstruct the correlation matrix") {
  Rng rng(803);
  Matrix X = gaussian_matrix(300, 5, rng);
  X.col(0) += X.col(1);
  X.col(3) *= 2.5;
  const auto scatter = cov(X);
  const auto r = pca(X, scatter);
  REQUIRE((r.loadings.transpose() * r.loadings - Matrix::Identity(5, 5)).norm() < 1e-8);
  const Matrix rec = r.loadings * r.eigenvalues.asDiagonal() * r.loadings.transpose();
  REQUIRE((rec - to_correlation(scatter)).norm() < 1e-8);
  REQUIRE(r.eigenvalues.sum() == Catch::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("scores are invariant under positive column rescaling") {
  Rng rng(804);
  Matrix X = gaussian_matrix(200, 3, rng);
  X.col(0) += 2.0 * X.col(2);
  const auto base = pca(X, cov(X));
  Matrix Xs = X;
  Xs.col(0) *= 100.0;
  Xs.col(2) *= 0.01;
  const auto scaled = pca(Xs, cov(Xs));
  REQUIRE((base.scores - scaled.scores).norm() < 1e-8 * base.scores.norm());
}

TEST_CASE("intro construction: PC1 mixes the structure away while IC1 keeps it") {
  MixtureSpec spec;
  spec.weights = {0.85, 0.15};
  spec.d = 2;
  spec.delta = 10.0;
  spec.n = 1000;
  auto [X, labels] = gen_mixture(spec, 7);
  const auto p = pca(X, cov(X));
  const double eta_pc1 = eta2(p.scores.col(0), labels);
  // PC1 of a 2-D correlation matrix is (1,+-1)/sqrt(2); the population
  // discriminatory power along it is 0.46, far below the IC1 value
  REQUIRE(eta_pc1 > 0.30);
  REQUIRE(eta_pc1 < 0.60);
  const auto r = ics(X, cov(X), cov4(X));
  const double eta_ic1 = eta2(r.scores.col(0), labels);
  REQUIRE(eta_ic1 > 0.9);
  REQUIRE(eta_pc1 < eta_ic1 - 0.3);
}

TEST_CASE("select_pct thresholds") {
  PcaResult r;
  r.eigenvalues.resize(4);
  r.eigenvalues << 3, 1, 0, 0;
  REQUIRE(select_pct(r, 0.8) == std::vector<int>{1, 2});
  REQUIRE(select_pct(r, 1.0) == std::vector<int>{1, 2});

  PcaResult flat;
  flat.eigenvalues = Vector::Constant(10, 1.0);
  REQUIRE(select_pct(flat, 0.8).size() == 8);
  REQUIRE_THROWS_AS(select_pct(flat, 0.0), validation_error);
  REQUIRE_THROWS_AS(select_pct(flat, 1.5), validation_error);
}

TEST_CASE("select_k_minus_1") {
  PcaResult r;
  r.eigenvalues = Vector::Constant(10, 1.0);
  REQUIRE(select_k_minus_1(r, 2) == std::vector<int>{1});
  REQUIRE(select_k_minus_1(r, 11).size() == 10);
  REQUIRE(select_k_minus_1(r, 4) == std::vector<int>{1, 2, 3});
  REQUIRE_THROWS_AS(select_k_minus_1(r, 1), validation_error);
  REQUIRE_THROWS_AS(select_k_minus_1(r, 12), validation_error);
}
