#ifndef ICSCLUST_MATSTAT_HPP
#define ICSCLUST_MATSTAT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "icsclust/types.hpp"

namespace icsclust {

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

inline void require_symmetric(const Matrix& S, const char* who) {
  if (S.rows() != S.cols())
    throw validation_error(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, S.norm());
  if ((S - S.transpose()).norm() > 1e-10 * scale)
    throw validation_error(std::string(who) + ": matrix is not symmetric to 1e-10");
}

/// Eigendecomposition of a symmetric matrix through Eigen's self-adjoint
/// solver (tridiagonalization + implicit QL), eigenvalues sorted descending.
/// Ordering among numerically tied eigenvalues is whatever the solver
/// returns; it is stable for a given build but not canonicalized.
inline SymEigen sym_eigen(const Matrix& S) {
  require_symmetric(S, "sym_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
  if (solver.info() != Eigen::Success)
    throw numeric_error("sym_eigen: eigendecomposition did not converge");
  const Eigen::Index d = S.rows();
  SymEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(d, d);
  for (Eigen::Index j = 0; j < d; ++j) out.vectors.col(j) = solver.eigenvectors().col(d - 1 - j);
  return out;
}

/// Relative rank cutoff: eigenvalues at or below d*eps*lambda_max count as zero.
inline double rank_tolerance(const Vector& descending_values) {
  return static_cast<double>(descending_values.size()) *
         std::numeric_limits<double>::epsilon() *
         std::max(0.0, descending_values(0));
}

/// Inverse symmetric square root of an SPD matrix: R with R*S*R = I.
inline Matrix inv_sqrt(const Matrix& S) {
  const SymEigen eig = sym_eigen(S);
  const double tol = rank_tolerance(eig.values);
  const double smallest = eig.values(eig.values.size() - 1);
  if (smallest <= tol)
    throw singular_error("inv_sqrt: matrix is numerically singular, smallest eigenvalue " +
                         std::to_string(smallest) + " <= tolerance " + std::to_string(tol));
  const Vector inv_root = eig.values.cwiseSqrt().cwiseInverse();
  return eig.vectors * inv_root.asDiagonal() * eig.vectors.transpose();
}

namespace detail {

inline double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  if (n == 0) throw validation_error("median of empty range");
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return (hi + v[n / 2 - 1]) / 2.0;
}

/// Cholesky factor of an SPD matrix, with the singularity contract shared
/// by the Mahalanobis routines.
inline Eigen::LLT<Matrix> spd_llt(const Matrix& S, const char* who) {
  require_symmetric(S, who);
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success)
    throw singular_error(std::string(who) + ": matrix is not positive definite");
  return llt;
}

}  // namespace detail

inline double mahalanobis_sq(const Vector& x, const Vector& center, const Matrix& S) {
  if (x.size() != center.size() || x.size() != S.rows())
    throw validation_error("mahalanobis_sq: dimension mismatch");
  const auto llt = detail::spd_llt(S, "mahalanobis_sq");
  const Vector diff = x - center;
  return llt.matrixL().solve(diff).squaredNorm();
}

/// Squared Mahalanobis distances of every row of X to `center` in the
/// metric of S, via one Cholesky factorization.
inline Vector mahalanobis_sq_rows(const Matrix& X, const Vector& center, const Matrix& S) {
  if (X.cols() != center.size() || X.cols() != S.rows())
    throw validation_error("mahalanobis_sq_rows: dimension mismatch");
  const auto llt = detail::spd_llt(S, "mahalanobis_sq_rows");
  Matrix centered = X.rowwise() - center.transpose();
  // rows of centered * L^{-T} have the whitened coordinates
  Matrix white = llt.matrixL().solve(centered.transpose()).transpose();
  return white.rowwise().squaredNorm();
}

/// n x n matrix of pairwise squared Mahalanobis distances.
inline Matrix pairwise_mahalanobis_sq(const Matrix& X, const Matrix& S) {
  validate_data(X);
  if (X.cols() != S.rows())
    throw validation_error("pairwise_mahalanobis_sq: dimension mismatch");
  const auto llt = detail::spd_llt(S, "pairwise_mahalanobis_sq");
  Matrix white = llt.matrixL().solve(X.transpose()).transpose();
  const Eigen::Index n = X.rows();
  const Vector sq = white.rowwise().squaredNorm();
  Matrix D = sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * white * white.transpose();
  D.diagonal().setZero();
  // clamp tiny negative round-off
  D = D.cwiseMax(0.0);
  return (D + D.transpose()) / 2.0;
}

}  // namespace icsclust

#endif
