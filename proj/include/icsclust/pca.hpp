#ifndef ICSCLUST_PCA_HPP
#define ICSCLUST_PCA_HPP

#include <string>
#include <vector>

#include "icsclust/matstat.hpp"
#include "icsclust/scatter.hpp"

namespace icsclust {

/// Correlation-matrix PCA derived from a scatter estimate. Scores are
/// computed on X standardized by the scatter's companion location and the
/// square roots of the scatter's diagonal.
struct PcaResult {
  Matrix loadings;    // orthonormal columns, descending eigenvalue order
  Vector eigenvalues; // sum to d for a correlation matrix
  Matrix scores;
  std::string scatter_id;
};

inline PcaResult pca(const Matrix& X, const ScatterEstimate& scatter) {
  validate_data(X);
  if (scatter.matrix.rows() != X.cols())
    throw validation_error("pca: scatter dimension does not match the data");
  const Matrix R = to_correlation(scatter);
  const SymEigen eig = sym_eigen(R);
  if (eig.values(eig.values.size() - 1) <= rank_tolerance(eig.values))
    throw singular_error("pca: correlation matrix is numerically singular");

  PcaResult out;
  out.loadings = eig.vectors;
  const Eigen::Index d = X.cols();
  for (Eigen::Index j = 0; j < d; ++j) {  // deterministic sign convention
    Eigen::Index arg = 0;
    out.loadings.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.loadings(arg, j) < 0.0) out.loadings.col(j) = -out.loadings.col(j);
  }
  out.eigenvalues = eig.values;
  const Vector inv_scale = scatter.matrix.diagonal().cwiseSqrt().cwiseInverse();
  const Matrix standardized =
      (X.rowwise() - scatter.location.transpose()) * inv_scale.asDiagonal();
  out.scores = standardized * out.loadings;
  out.scatter_id = scatter.estimator_id;
  return out;
}

/// Smallest m whose leading eigenvalues explain at least `threshold` of
/// the total variability d; returns {1..m}.
inline std::vector<int> select_pct(const PcaResult& result, double threshold = 0.8) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw validation_error("select_pct: threshold must be in (0, 1]");
  const Eigen::Index d = result.eigenvalues.size();
  double cum = 0.0;
  std::vector<int> out;
  for (Eigen::Index j = 0; j < d; ++j) {
    cum += result.eigenvalues(j);
    out.push_back(static_cast<int>(j) + 1);
    if (cum / static_cast<double>(d) >= threshold) break;
  }
  return out;
}

/// The first k-1 components, {1..k-1}.
inline std::vector<int> select_k_minus_1(const PcaResult& result, int k) {
  const Eigen::Index d = result.eigenvalues.size();
  if (k - 1 < 1 || k - 1 > d)
    throw validation_error("select_k_minus_1: k - 1 = " + std::to_string(k - 1) +
                           " out of range 1.." + std::to_string(d));
  std::vector<int> out(static_cast<std::size_t>(k - 1));
  for (int j = 0; j < k - 1; ++j) out[static_cast<std::size_t>(j)] = j + 1;
  return out;
}

}  // namespace icsclust

#endif
