#ifndef ICSCLUST_SCATTER_HPP
#define ICSCLUST_SCATTER_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "icsclust/matstat.hpp"
#include "icsclust/types.hpp"

namespace icsclust {

struct ScatterDiagnostics {
  int iterations = 0;
  bool converged = true;
  bool degenerate = false;                  // zero-variance data seen by cov
  std::vector<Eigen::Index> best_subset;    // MCD winning subset / RMCD kept rows
  std::vector<double> cstep_dets;           // determinant trace of the winning start
};

/// A location/scatter pair with estimator metadata. For shape-only
/// estimators (lcov) the matrix scale carries no meaning.
struct ScatterEstimate {
  Vector location;
  Matrix matrix;
  std::string estimator_id;
  bool shape_only = false;
  ScatterDiagnostics diagnostics;
};

namespace detail {

inline Vector column_means(const Matrix& X) {
  return X.colwise().mean().transpose();
}

/// Throws when a column has zero variance; ICS needs a nonsingular V1 and
/// the estimators below need an invertible COV, so fail fast by name
/// instead of regularizing.
inline void require_nondegenerate_columns(const Matrix& X, const char* who) {
  const Vector means = column_means(X);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double ss = (X.col(j).array() - means(j)).square().sum();
    if (ss <= 0.0)
      throw singular_error(std::string(who) + ": column " + std::to_string(j) +
                           " has zero variance");
  }
}

inline Matrix sample_cov(const Matrix& X, const Vector& mean) {
  const Matrix centered = X.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(X.rows() - 1);
}

/// Rows whitened with respect to S (Cholesky), so that squared Euclidean
/// distances between rows equal squared S-Mahalanobis distances.
inline Matrix whitened_rows(const Matrix& X, const Matrix& S, const char* who) {
  const auto llt = spd_llt(S, who);
  return llt.matrixL().solve(X.transpose()).transpose();
}

}  // namespace detail

/// Sample covariance with its companion mean. Degenerate data (all rows
/// equal) yields the zero matrix with diagnostics.degenerate set.
inline ScatterEstimate cov(const Matrix& X) {
  validate_data(X);
  ScatterEstimate est;
  est.location = detail::column_means(X);
  est.matrix = detail::sample_cov(X, est.location);
  est.estimator_id = "cov";
  est.diagnostics.degenerate = (est.matrix.diagonal().minCoeff() <= 0.0);
  return est;
}

/// Matrix of fourth moments: (1/(n(d+2))) sum r^2_i (x_i - mean)(x_i - mean)^T
/// with r^2 the COV-metric squared Mahalanobis distance.
inline ScatterEstimate cov4(const Matrix& X) {
  validate_data(X);
  detail::require_nondegenerate_columns(X, "cov4");
  const Eigen::Index n = X.rows(), d = X.cols();
  const Vector mean = detail::column_means(X);
  const Matrix C = detail::sample_cov(X, mean);
  const Vector r2 = mahalanobis_sq_rows(X, mean, C);
  const Matrix centered = X.rowwise() - mean.transpose();
  ScatterEstimate est;
  est.location = mean;
  est.matrix = centered.transpose() * r2.asDiagonal() * centered /
               (static_cast<double>(n) * static_cast<double>(d + 2));
  est.estimator_id = "cov4";
  return est;
}

/// Cauchy maximum-likelihood location/scatter (M-estimator with weights
/// (d+1)/(r^2+1)), iterated from the coordinatewise median and COV until
/// both location and matrix move less than tol in relative norm.
inline ScatterEstimate mlc(const Matrix& X, int max_iter = 200, double tol = 1e-7) {
  validate_data(X);
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n <= d + 1)
    throw validation_error("mlc: requires n > d + 1");
  detail::require_nondegenerate_columns(X, "mlc");

  Vector m(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> col(X.col(j).data(), X.col(j).data() + n);
    std::nth_element(col.begin(), col.begin() + n / 2, col.end());
    double hi = col[n / 2];
    if (n % 2 == 0) {
      std::nth_element(col.begin(), col.begin() + n / 2 - 1, col.end());
      m(j) = (hi + col[n / 2 - 1]) / 2.0;
    } else {
      m(j) = hi;
    }
  }
  Matrix V = detail::sample_cov(X, detail::column_means(X));

  for (int iter = 1; iter <= max_iter; ++iter) {
    const Vector r2 = mahalanobis_sq_rows(X, m, V);
    const Vector w = (d + 1.0) / (r2.array() + 1.0);
    const double wsum = w.sum();
    const Vector m_next = (X.transpose() * w) / wsum;
    const Matrix centered = X.rowwise() - m_next.transpose();
    const Matrix V_next =
        centered.transpose() * w.asDiagonal() * centered / static_cast<double>(n);
    const double dloc = (m_next - m).norm() / (1.0 + m.norm());
    const double dmat = (V_next - V).norm() / V.norm();
    m = m_next;
    V = V_next;
    if (dloc < tol && dmat < tol) {
      ScatterEstimate est;
      est.location = m;
      est.matrix = V;
      est.estimator_id = "mlc";
      est.diagnostics.iterations = iter;
      return est;
    }
  }
  throw convergence_error("mlc: no convergence within " + std::to_string(max_iter) +
                              " iterations",
                          m, V, max_iter);
}

namespace detail {

/// w(x) = exp(-x/2) with the largest weight factored out, so the weight
/// sum never underflows however large beta * r^2 gets.
inline Vector stable_exp_weights(const Vector& scaled_r2) {
  const double lo = scaled_r2.minCoeff();
  return ((lo - scaled_r2.array()) / 2.0).exp();
}

}  // namespace detail

/// One-step M-estimator: COV-weighted with w(beta * r^2), w(x) = exp(-x/2).
inline ScatterEstimate scov(const Matrix& X, double beta) {
  validate_data(X);
  if (!(beta > 0.0)) throw validation_error("scov: beta must be > 0");
  detail::require_nondegenerate_columns(X, "scov");
  const Vector mean = detail::column_means(X);
  const Matrix C = detail::sample_cov(X, mean);
  const Vector r2 = mahalanobis_sq_rows(X, mean, C);
  const Vector w = detail::stable_exp_weights(beta * r2);
  const double wsum = w.sum();
  if (!(wsum > 0.0) || !std::isfinite(wsum))
    throw numeric_error("scov: weight sum underflowed");
  const Matrix centered = X.rowwise() - mean.transpose();
  ScatterEstimate est;
  est.location = mean;
  est.matrix = centered.transpose() * w.asDiagonal() * centered / wsum;
  est.estimator_id = "scov:" + detail::format_param(beta);
  return est;
}

/// Pairwise-difference one-step M-estimator; needs no location. The
/// location field is filled with the column means purely as a centering
/// convenience for ICS.
inline ScatterEstimate tcov(const Matrix& X, double beta = 2.0) {
  validate_data(X);
  if (!(beta > 0.0)) throw validation_error("tcov: beta must be > 0");
  const Eigen::Index n = X.rows(), d = X.cols();
  const Vector mean = detail::column_means(X);
  if (n == 2) {  // single pair: the weight cancels in the normalization
    const Vector diff = (X.row(0) - X.row(1)).transpose();
    ScatterEstimate est;
    est.location = mean;
    est.matrix = diff * diff.transpose();
    est.estimator_id = "tcov:" + detail::format_param(beta);
    return est;
  }
  detail::require_nondegenerate_columns(X, "tcov");
  const Matrix C = detail::sample_cov(X, mean);
  const Matrix white = detail::whitened_rows(X, C, "tcov");

  // pass 1: largest weight (= smallest pairwise r^2)
  double min_r2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      min_r2 = std::min(min_r2, (white.row(i) - white.row(j)).squaredNorm());

  Matrix acc = Matrix::Zero(d, d);
  double wsum = 0.0;
  Vector diff(d);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r2 = (white.row(i) - white.row(j)).squaredNorm();
      const double w = std::exp((min_r2 - r2) * beta / 2.0);
      diff = (X.row(i) - X.row(j)).transpose();
      acc.selfadjointView<Eigen::Lower>().rankUpdate(diff, w);
      wsum += w;
    }
  }
  if (!(wsum > 0.0) || !std::isfinite(wsum))
    throw numeric_error("tcov: weight sum underflowed");
  ScatterEstimate est;
  est.location = mean;
  est.matrix = Matrix(acc.selfadjointView<Eigen::Lower>()) / wsum;
  est.estimator_id = "tcov:" + detail::format_param(beta);
  return est;
}

namespace detail {

inline Matrix spd_inverse(const Matrix& S, const char* who) {
  const SymEigen eig = sym_eigen(S);
  const double tol = rank_tolerance(eig.values);
  if (eig.values(eig.values.size() - 1) <= tol)
    throw singular_error(std::string(who) + ": matrix is numerically singular");
  return eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
}

}  // namespace detail

/// UCOV_beta = (SCOV_beta^{-1} - beta COV^{-1})^{-1}.
inline ScatterEstimate ucov(const Matrix& X, double beta = 0.2) {
  validate_data(X);
  if (!(beta > 0.0)) throw validation_error("ucov: beta must be > 0");
  const ScatterEstimate s = scov(X, beta);
  const Matrix C = detail::sample_cov(X, s.location);
  Matrix inner = detail::spd_inverse(s.matrix, "ucov(scov)") -
                 beta * detail::spd_inverse(C, "ucov(cov)");
  inner = (inner + inner.transpose()) / 2.0;
  const SymEigen eig = sym_eigen(inner);
  const double smallest = eig.values(eig.values.size() - 1);
  if (smallest <= rank_tolerance(eig.values))
    throw singular_error("ucov: scov^{-1} - beta cov^{-1} is not positive definite, "
                         "smallest eigenvalue " + std::to_string(smallest));
  ScatterEstimate est;
  est.location = s.location;
  est.matrix = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  est.estimator_id = "ucov:" + detail::format_param(beta);
  return est;
}

/// Local shape matrix: for every observation, the covariance of its
/// n_beta = ceil(beta*n) nearest neighbors in the V0-Mahalanobis metric
/// (the observation counts as its own neighbor, ties at the boundary are
/// broken by row order), each local covariance rescaled to determinant
/// one, averaged, and the average rescaled to determinant one again.
/// Only the proportionality class of the result is meaningful.
inline ScatterEstimate lcov(const Matrix& X, const ScatterEstimate& v0, double beta = 0.1) {
  validate_data(X);
  if (!(beta > 0.0) || !(beta <= 1.0)) throw validation_error("lcov: beta must be in (0, 1]");
  const Eigen::Index n = X.rows(), d = X.cols();
  const auto n_beta = static_cast<Eigen::Index>(std::ceil(beta * static_cast<double>(n)));
  if (n_beta < d + 1)
    throw validation_error("lcov: neighborhood size ceil(beta*n) = " + std::to_string(n_beta) +
                           " must be >= d + 1 = " + std::to_string(d + 1));
  const Matrix white = detail::whitened_rows(X, v0.matrix, "lcov");

  Matrix acc = Matrix::Zero(d, d);
  std::vector<Eigen::Index> order(n);
  Vector dist(n);
  Matrix neighborhood(n_beta, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dist(j) = (white.row(j) - white.row(i)).squaredNorm();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + n_beta, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
                      });
    for (Eigen::Index r = 0; r < n_beta; ++r) neighborhood.row(r) = X.row(order[r]);
    const Matrix local =
        detail::sample_cov(neighborhood, detail::column_means(neighborhood));
    const SymEigen eig = sym_eigen(local);
    if (eig.values(d - 1) <= rank_tolerance(eig.values))
      throw singular_error("lcov: degenerate neighborhood around observation " +
                           std::to_string(i));
    const double log_det = eig.values.array().log().sum();
    acc += local * std::exp(-log_det / static_cast<double>(d));
  }
  Matrix shape = acc / static_cast<double>(n);
  const SymEigen eig = sym_eigen(shape);
  shape *= std::exp(-eig.values.array().log().sum() / static_cast<double>(d));

  ScatterEstimate est;
  est.location = detail::column_means(X);
  est.matrix = shape;
  est.estimator_id = "lcov:" + v0.estimator_id + ":" + detail::format_param(beta);
  est.shape_only = true;
  return est;
}

/// Correlation matrix of a positive definite scatter.
inline Matrix to_correlation(const ScatterEstimate& S) {
  require_symmetric(S.matrix, "to_correlation");
  const Eigen::Index d = S.matrix.rows();
  for (Eigen::Index j = 0; j < d; ++j)
    if (!(S.matrix(j, j) > 0.0))
      throw validation_error("to_correlation: zero diagonal entry at " + std::to_string(j));
  const Vector inv_std = S.matrix.diagonal().cwiseSqrt().cwiseInverse();
  return inv_std.asDiagonal() * S.matrix * inv_std.asDiagonal();
}

}  // namespace icsclust

#endif
