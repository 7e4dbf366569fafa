#ifndef ICSCLUST_ICS_HPP
#define ICSCLUST_ICS_HPP

#include <string>
#include <vector>

#include "icsclust/matstat.hpp"
#include "icsclust/scatter.hpp"

namespace icsclust {

/// Joint diagonalization of a scatter pair: W V1 W^T = I and
/// W V2 W^T = diag(eigenvalues), eigenvalues descending. Scores are the
/// invariant coordinates Z = (X - 1 T^T) W^T.
struct IcsResult {
  Matrix W;
  Vector eigenvalues;
  Vector location;
  Matrix scores;
  std::string pair_id;
  Matrix v1;  // the diagonalized pair, kept for kurtosis evaluation and checks
  Matrix v2;
};

/// ICS of X for the scatter pair (v1, v2): whiten with respect to v1,
/// eigendecompose v2 in the whitened metric. Row signs of W are fixed so
/// that each row's largest-magnitude entry is positive. The centering T
/// is v1's companion location (the scatter module fills the column means
/// for estimators without a natural location).
inline IcsResult ics(const Matrix& X, const ScatterEstimate& v1, const ScatterEstimate& v2) {
  validate_data(X);
  const Eigen::Index d = X.cols();
  if (v1.matrix.rows() != d || v2.matrix.rows() != d || v1.location.size() != d)
    throw validation_error("ics: scatter dimensions do not match the data");
  require_symmetric(v2.matrix, "ics(v2)");

  const Matrix root = inv_sqrt(v1.matrix);  // throws singular_error when v1 is not PD
  Matrix M = root * v2.matrix * root;
  M = (M + M.transpose()) / 2.0;
  const SymEigen eig = sym_eigen(M);

  IcsResult out;
  out.W = eig.vectors.transpose() * root;
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index arg = 0;
    out.W.row(i).cwiseAbs().maxCoeff(&arg);
    if (out.W(i, arg) < 0.0) out.W.row(i) = -out.W.row(i);
  }
  out.eigenvalues = eig.values;
  out.location = v1.location;
  out.scores = (X.rowwise() - v1.location.transpose()) * out.W.transpose();
  out.pair_id = v1.estimator_id + "," + v2.estimator_id;
  out.v1 = v1.matrix;
  out.v2 = v2.matrix;
  return out;
}

/// Generalized kurtosis of the projection direction w: the ratio of the
/// two scales (w^T V2 w) / (w^T V1 w). Ranges over [lambda_d, lambda_1].
inline double generalized_kurtosis(const IcsResult& result, const Vector& w) {
  if (w.size() != result.W.cols())
    throw validation_error("generalized_kurtosis: dimension mismatch");
  if (w.norm() == 0.0)
    throw validation_error("generalized_kurtosis: direction must be nonzero");
  return (w.dot(result.v2 * w)) / (w.dot(result.v1 * w));
}

/// Selected score columns, 1-based component indices, order preserved.
inline Matrix project(const IcsResult& result, const std::vector<int>& indices) {
  const Eigen::Index d = result.scores.cols();
  if (indices.empty()) throw validation_error("project: empty component selection");
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (int idx : indices) {
    if (idx < 1 || idx > d)
      throw validation_error("project: component index " + std::to_string(idx) +
                             " out of range 1.." + std::to_string(d));
    if (seen[static_cast<std::size_t>(idx - 1)])
      throw validation_error("project: duplicate component index " + std::to_string(idx));
    seen[static_cast<std::size_t>(idx - 1)] = true;
  }
  Matrix out(result.scores.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = result.scores.col(indices[j] - 1);
  return out;
}

}  // namespace icsclust

#endif
