#include <catch2/catch_amalgamated.hpp>
#include <functional>

#include "icsclust/matstat.hpp"
#include "icsclust/mcd.hpp"
#include "icsclust/scatter.hpp"
#include "icsclust/simgen.hpp"
#include "test_support.hpp"

using namespace icsclust;
using test::apply_affine;
using test::gaussian_matrix;
using test::random_affine;
using test::shape_distance;

namespace {

void check_equivariance(const std::function<Matrix(const Matrix&)>& estimator, Eigen::Index d,
                        double tol, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix X = gaussian_matrix(200, d, rng);
  const auto [A, b] = random_affine(d, rng);
  const Matrix direct = estimator(apply_affine(X, A, b));
  const Matrix mapped = A * estimator(X) * A.transpose();
  REQUIRE((direct - mapped).norm() <= tol * std::max(1.0, mapped.norm()));
}

}  // namespace

TEST_CASE("cov of the unit square") {
  Matrix X(4, 2);
  X << 0, 0, 1, 0, 0, 1, 1, 1;
  const auto est = cov(X);
  REQUIRE(est.location(0) == Catch::Approx(0.5));
  REQUIRE(est.location(1) == Catch::Approx(0.5));
  REQUIRE(est.matrix(0, 0) == Catch::Approx(1.0 / 3.0));
  REQUIRE(est.matrix(1, 1) == Catch::Approx(1.0 / 3.0));
  REQUIRE(std::abs(est.matrix(0, 1)) < 1e-15);
  REQUIRE_FALSE(est.diagnostics.degenerate);
}

TEST_CASE("cov of identical rows is the flagged zero matrix") {
  Matrix X(3, 2);
  X << 2, 5, 2, 5, 2, 5;
  const auto est = cov(X);
  REQUIRE(est.matrix.norm() == 0.0);
  REQUIRE(est.diagnostics.degenerate);
}

TEST_CASE("cov equivariance") {
  check_equivariance([](const Matrix& X) { return cov(X).matrix; }, 5, 1e-10, 201);
}

TEST_CASE("cov4 one-dimensional hand computation") {
  Matrix X(4, 1);
  X << -1, -1, 1, 1;
  const auto est = cov4(X);
  REQUIRE(est.location(0) == Catch::Approx(0.0));
  REQUIRE(est.matrix(0, 0) == Catch::Approx(0.25));
}

TEST_CASE("cov4 is consistent for the Gaussian") {
  Rng rng(202);
  const Matrix X = gaussian_matrix(10000, 5, rng);
  const auto est = cov4(X);
  const auto eig = sym_eigen(est.matrix);
  REQUIRE(eig.values(0) < 1.1);
  REQUIRE(eig.values(4) > 0.9);
}

TEST_CASE("cov4 equivariance") {
  check_equivariance([](const Matrix& X) { return cov4(X).matrix; }, 4, 1e-8, 203);
}

TEST_CASE("cov4 rejects degenerate columns by name") {
  Matrix X(5, 2);
  X << 1, 7, 2, 7, 3, 7, 4, 7, 5, 7;
  try {
    cov4(X);
    FAIL("expected singular_error");
  } catch (const singular_error& e) {
    REQUIRE(std::string(e.what()).find("column 1") != std::string::npos);
  }
}

TEST_CASE("mlc is proportional to identity on a spherical sample") {
  Rng rng(204);
  const Matrix X = gaussian_matrix(2000, 3, rng);
  const auto est = mlc(X);
  REQUIRE(est.diagnostics.iterations > 1);
  const Matrix S = est.matrix / est.matrix.trace() * 3.0;
  for (int i = 0; i < 3; ++i) {
    REQUIRE(S(i, i) == Catch::Approx(1.0).margin(0.1));
    for (int j = 0; j < 3; ++j)
      if (i != j) REQUIRE(std::abs(S(i, j)) < 0.05);
  }
}

TEST_CASE("mlc fixed point: whitening by its own output gives identity") {
  Rng rng(205);
  Matrix X = gaussian_matrix(500, 3, rng);
  X.col(0) *= 3.0;
  X.col(1).array() += 5.0;
  const auto est = mlc(X, 500, 1e-10);
  const Matrix R = inv_sqrt(est.matrix);
  const Matrix W = (X.rowwise() - est.location.transpose()) * R.transpose();
  const auto re = mlc(W, 500, 1e-10);
  REQUIRE((re.matrix - Matrix::Identity(3, 3)).norm() < 1e-6);
  REQUIRE(re.location.norm() < 1e-6);
}

TEST_CASE("mlc equivariance") {
  Rng rng(206);
  const Matrix X = gaussian_matrix(200, 3, rng);
  const auto [A, b] = random_affine(3, rng);
  const auto base = mlc(X, 500, 1e-9);
  const auto mapped = mlc(apply_affine(X, A, b), 500, 1e-9);
  REQUIRE((mapped.matrix - A * base.matrix * A.transpose()).norm() <=
          1e-6 * std::max(1.0, base.matrix.norm()));
  REQUIRE((mapped.location - (A * base.location + b)).norm() < 1e-6);
}

TEST_CASE("mlc non-convergence carries the last iterate") {
  Rng rng(207);
  const Matrix X = gaussian_matrix(100, 2, rng);
  try {
    mlc(X, 1, 1e-16);
    FAIL("expected convergence_error");
  } catch (const convergence_error& e) {
    REQUIRE(e.iterations == 1);
    REQUIRE(e.last_matrix.rows() == 2);
    REQUIRE(e.last_location.size() == 2);
  }
}

TEST_CASE("scov with tiny beta matches the ML covariance") {
  Rng rng(208);
  const Matrix X = gaussian_matrix(100, 3, rng);
  const auto est = scov(X, 1e-15);
  const Matrix ml = cov(X).matrix * (100.0 - 1.0) / 100.0;
  REQUIRE((est.matrix - ml).norm() < 1e-10 * ml.norm());
}

TEST_CASE("scov on a symmetric 1-D pair is beta-free") {
  Matrix X(2, 1);
  X << -1, 1;
  for (double beta : {0.5, 2.0, 50.0}) {
    const auto est = scov(X, beta);
    REQUIRE(est.matrix(0, 0) == Catch::Approx(1.0));  // ((n-1)/n) * cov = 1
  }
}

TEST_CASE("scov equivariance and huge-beta stability") {
  check_equivariance([](const Matrix& X) { return scov(X, 2.0).matrix; }, 4, 1e-8, 209);
  Rng rng(210);
  const Matrix X = gaussian_matrix(50, 2, rng);
  const auto est = scov(X, 1e8);  // max weight factored out, no underflow
  REQUIRE(est.matrix.allFinite());
}

TEST_CASE("tcov of a single pair") {
  Matrix X(2, 2);
  X << 0, 0, 1, 0;
  const auto est = tcov(X, 2.0);
  REQUIRE(est.matrix(0, 0) == Catch::Approx(1.0));
  REQUIRE(est.matrix(0, 1) == 0.0);
  REQUIRE(est.matrix(1, 1) == 0.0);
}

TEST_CASE("tcov sharpens the between/within distance contrast on clusters") {
  // three separated clusters with common within-cluster covariance
  MixtureSpec spec;
  spec.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  spec.d = 2;
  spec.delta = 10.0;
  spec.n = 300;
  auto [X, labels] = gen_mixture(spec, 42);

  const Matrix t = tcov(X).matrix;
  const Matrix c = cov(X).matrix;
  auto ratio = [&](const Matrix& S) {
    const Matrix D = pairwise_mahalanobis_sq(X, S);
    double between = 0.0, within = 0.0;
    int nb = 0, nw = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
          within += D(i, j);
          ++nw;
        } else {
          between += D(i, j);
          ++nb;
        }
      }
    return (between / nb) / (within / nw);
  };
  REQUIRE(ratio(t) > ratio(c));
}

TEST_CASE("tcov equivariance") {
  check_equivariance([](const Matrix& X) { return tcov(X, 2.0).matrix; }, 4, 1e-8, 211);
}

TEST_CASE("ucov approaches scov as beta shrinks") {
  Rng rng(212);
  const Matrix X = gaussian_matrix(150, 3, rng);
  const auto u = ucov(X, 1e-12);
  const auto s = scov(X, 1e-12);
  REQUIRE((u.matrix - s.matrix).norm() < 1e-8 * s.matrix.norm());
}

TEST_CASE("ucov is spherical on a spherical sample") {
  Rng rng(213);
  const Matrix X = gaussian_matrix(5000, 3, rng);
  const auto est = ucov(X, 0.2);
  const Matrix S = est.matrix / est.matrix.trace() * 3.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) REQUIRE(std::abs(S(i, j)) < 0.05);
}

TEST_CASE("ucov equivariance") {
  check_equivariance([](const Matrix& X) { return ucov(X, 0.2).matrix; }, 3, 1e-6, 214);
}

TEST_CASE("ucov reports indefiniteness for extreme beta") {
  Rng rng(215);
  const Matrix X = gaussian_matrix(100, 2, rng);
  REQUIRE_THROWS_AS(ucov(X, 50.0), singular_error);
}

TEST_CASE("lcov shape is identity on one spherical Gaussian") {
  Rng rng(216);
  const Matrix X = gaussian_matrix(2000, 2, rng);
  const auto est = lcov(X, cov(X), 0.1);
  REQUIRE(est.shape_only);
  REQUIRE(est.matrix.determinant() == Catch::Approx(1.0).epsilon(1e-8));
  REQUIRE(std::abs(est.matrix(0, 1)) < 0.05);
  REQUIRE(est.matrix(0, 0) == Catch::Approx(est.matrix(1, 1)).margin(0.1));
}

TEST_CASE("lcov recovers the within-cluster shape of separated clusters") {
  // three balanced clusters, common within-covariance diag(1, 4); with
  // beta equal to the cluster fraction every neighborhood is exactly the
  // home cluster, so the shape estimate is the pooled within shape
  Rng rng(217);
  const int n = 3000;
  Matrix X(n, 2);
  Labels labels(static_cast<std::size_t>(n));
  const double centers[3][2] = {{0, 0}, {40, 0}, {0, 40}};
  for (int i = 0; i < n; ++i) {
    const int g = i % 3;
    X(i, 0) = centers[g][0] + rng.normal();
    X(i, 1) = centers[g][1] + 2.0 * rng.normal();
    labels[static_cast<std::size_t>(i)] = g + 1;
  }
  const auto est = lcov(X, cov(X), 1.0 / 3.0);
  // shape proportional to diag(1,4): ratio of diagonal entries ~ 4
  REQUIRE(est.matrix(1, 1) / est.matrix(0, 0) == Catch::Approx(4.0).epsilon(0.1));
  REQUIRE(std::abs(est.matrix(0, 1)) < 0.1 * est.matrix(1, 1));
  // while cov is dominated by the between-cluster spread
  const Matrix c = cov(X).matrix;
  REQUIRE(c(0, 0) > 100.0);
}

TEST_CASE("lcov with beta = 1 is cov rescaled to determinant one") {
  Rng rng(218);
  const Matrix X = gaussian_matrix(60, 3, rng);
  const auto est = lcov(X, cov(X), 1.0);
  const Matrix c = cov(X).matrix;
  const Matrix expected = c / std::pow(c.determinant(), 1.0 / 3.0);
  REQUIRE((est.matrix - expected).norm() < 1e-10 * expected.norm());
}

TEST_CASE("lcov names the observation with a degenerate neighborhood") {
  Matrix X(8, 2);
  X << 0, 0, 0, 0, 0, 0, 0, 0, 5, 5, 6, 5, 5, 6, 6, 6;  // four coincident points
  try {
    lcov(X, cov(X), 0.5);  // neighborhoods of size 4
    FAIL("expected singular_error");
  } catch (const singular_error& e) {
    REQUIRE(std::string(e.what()).find("observation") != std::string::npos);
  }
}

TEST_CASE("lcov equivariance up to scale") {
  Rng rng(219);
  const Matrix X = gaussian_matrix(200, 3, rng);
  const auto [A, b] = random_affine(3, rng);
  const Matrix base = lcov(X, cov(X), 0.2).matrix;
  const Matrix mapped = lcov(apply_affine(X, A, b), cov(apply_affine(X, A, b)), 0.2).matrix;
  REQUIRE(shape_distance(mapped, A * base * A.transpose()) < 1e-6);
}

TEST_CASE("to_correlation examples") {
  ScatterEstimate est;
  est.matrix = Matrix::Zero(2, 2);
  est.matrix(0, 0) = 4.0;
  est.matrix(1, 1) = 9.0;
  REQUIRE((to_correlation(est) - Matrix::Identity(2, 2)).norm() < 1e-14);

  est.matrix << 4, 2, 2, 4;
  const Matrix R = to_correlation(est);
  REQUIRE(R(0, 0) == 1.0);
  REQUIRE(R(0, 1) == Catch::Approx(0.5));

  est.matrix = Matrix::Identity(3, 3);
  REQUIRE((to_correlation(est) - Matrix::Identity(3, 3)).norm() == 0.0);

  est.matrix = Matrix::Zero(2, 2);
  est.matrix(0, 0) = 1.0;
  REQUIRE_THROWS_AS(to_correlation(est), validation_error);
}

TEST_CASE("all estimators are proportional on one elliptical sample") {
  Rng rng(220);
  Matrix X = gaussian_matrix(5000, 3, rng);
  X.col(1) *= 2.0;  // elliptical, not spherical
  const std::vector<Matrix> shapes = {
      cov(X).matrix,        cov4(X).matrix,          mlc(X).matrix,
      scov(X, 2.0).matrix,  tcov(X, 2.0).matrix,     ucov(X, 0.2).matrix,
      mcd(X, 0.5, 200, 1).matrix, rmcd(X, 0.75, 200, 2).matrix,
      lcov(X, cov(X), 0.1).matrix};
  for (std::size_t i = 0; i < shapes.size(); ++i)
    for (std::size_t j = i + 1; j < shapes.size(); ++j)
      REQUIRE(shape_distance(shapes[i], shapes[j]) < 0.10);
}
