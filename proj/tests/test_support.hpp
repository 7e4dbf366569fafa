#ifndef ICSCLUST_TEST_SUPPORT_HPP
#define ICSCLUST_TEST_SUPPORT_HPP

#include "icsclust/rng.hpp"
#include "icsclust/types.hpp"

namespace icsclust::test {

inline Matrix gaussian_matrix(Eigen::Index n, Eigen::Index d, Rng& rng) {
  Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

/// Random nonsingular affine map (A, b) with |det A| bounded away from 0.
inline std::pair<Matrix, Vector> random_affine(Eigen::Index d, Rng& rng) {
  Matrix A(d, d);
  do {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) A(i, j) = rng.normal();
  } while (std::abs(A.determinant()) < 0.1);
  Vector b(d);
  for (Eigen::Index j = 0; j < d; ++j) b(j) = rng.normal();
  return {A, b};
}

inline Matrix apply_affine(const Matrix& X, const Matrix& A, const Vector& b) {
  return (X * A.transpose()).rowwise() + b.transpose();
}

/// Relative Frobenius distance after rescaling both to unit determinant;
/// compares shapes only.
inline double shape_distance(const Matrix& S1, const Matrix& S2) {
  const auto d = static_cast<double>(S1.rows());
  const Matrix N1 = S1 / std::pow(S1.determinant(), 1.0 / d);
  const Matrix N2 = S2 / std::pow(S2.determinant(), 1.0 / d);
  return (N1 - N2).norm() / N1.norm();
}

}  // namespace icsclust::test

#endif
