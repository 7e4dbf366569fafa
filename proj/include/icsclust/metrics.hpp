#ifndef ICSCLUST_METRICS_HPP
#define ICSCLUST_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "icsclust/matstat.hpp"
#include "icsclust/types.hpp"

namespace icsclust {

namespace detail {

/// log det of a symmetric PSD matrix; -inf when numerically singular.
inline double psd_log_det(const Matrix& S) {
  const SymEigen eig = sym_eigen(S);
  const double tol = rank_tolerance(eig.values);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) <= tol) return -std::numeric_limits<double>::infinity();
    sum += std::log(eig.values(i));
  }
  return sum;
}

struct SscpPair {
  Matrix within;
  Matrix total;
};

/// Within-group and total sum-of-squares-and-cross-products matrices.
/// Every distinct label (the 0 sentinel included) forms a group.
inline SscpPair group_sscp(const Matrix& Y, const Labels& labels) {
  validate_labels(labels, Y.rows());
  const Eigen::Index n = Y.rows(), d = Y.cols();
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n; ++i) groups[labels[static_cast<std::size_t>(i)]].push_back(i);
  if (groups.size() < 2)
    throw validation_error("group metrics need at least 2 distinct labels");

  SscpPair out{Matrix::Zero(d, d), Matrix::Zero(d, d)};
  const Vector grand = Y.colwise().mean().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector c = Y.row(i).transpose() - grand;
    out.total.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0);
  }
  for (const auto& [label, rows] : groups) {
    Vector mean = Vector::Zero(d);
    for (auto i : rows) mean += Y.row(i).transpose();
    mean /= static_cast<double>(rows.size());
    for (auto i : rows) {
      const Vector c = Y.row(i).transpose() - mean;
      out.within.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0);
    }
  }
  out.total = Matrix(out.total.selfadjointView<Eigen::Lower>());
  out.within = Matrix(out.within.selfadjointView<Eigen::Lower>());
  return out;
}

}  // namespace detail

/// Wilks' lambda det(E)/det(T): within-group over total SSCP determinant.
inline double wilks_lambda(const Matrix& Y, const Labels& labels) {
  const auto sscp = detail::group_sscp(Y, labels);
  const double log_det_total = detail::psd_log_det(sscp.total);
  if (std::isinf(log_det_total))
    throw evaluation_error("wilks_lambda: total SSCP matrix is singular");
  const double log_det_within = detail::psd_log_det(sscp.within);
  if (std::isinf(log_det_within)) return 0.0;  // perfect separation
  const double lambda = std::exp(log_det_within - log_det_total);
  return std::clamp(lambda, 0.0, 1.0);
}

/// Discriminatory power eta^2 = 1 - Wilks' lambda.
inline double eta2(const Matrix& Y, const Labels& labels) {
  return 1.0 - wilks_lambda(Y, labels);
}

/// Hubert–Arabie adjusted Rand index between two labelings of the same
/// observations. 1 for identical partitions, about 0 for independent ones.
inline double ari(const Labels& a, const Labels& b) {
  if (a.size() != b.size())
    throw validation_error("ari: label vectors differ in length (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw validation_error("ari: empty labelings");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, m] : cells) sum_cells += choose2(m);
  for (const auto& [key, m] : rows) sum_rows += choose2(m);
  for (const auto& [key, m] : cols) sum_cols += choose2(m);
  const double pairs = choose2(static_cast<double>(a.size()));
  const double expected = sum_rows * sum_cols / pairs;
  const double maximum = (sum_rows + sum_cols) / 2.0;
  if (maximum == expected) return 1.0;  // both partitions trivial
  return (sum_cells - expected) / (maximum - expected);
}

}  // namespace icsclust

#endif
