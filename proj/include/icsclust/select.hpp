#ifndef ICSCLUST_SELECT_HPP
#define ICSCLUST_SELECT_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icsclust/ics.hpp"
#include "icsclust/metrics.hpp"
#include "icsclust/prob.hpp"
#include "icsclust/types.hpp"

namespace icsclust {

struct SelectionResult {
  std::vector<int> indices;  // 1-based, ascending
  std::string criterion_id;
  std::vector<double> diagnostics;  // per-component deviations / per-window
                                    // variances / p-values / per-split eta^2
  std::optional<int> k_used;
};

/// The k-1 components whose generalized eigenvalues deviate most from the
/// median eigenvalue; ties resolved toward the smaller index.
inline SelectionResult med_select(const Vector& eigenvalues, int k) {
  const int d = static_cast<int>(eigenvalues.size());
  if (k < 2) throw validation_error("med_select: k must be >= 2");
  if (k - 1 > d)
    throw validation_error("med_select: k - 1 = " + std::to_string(k - 1) +
                           " exceeds component count " + std::to_string(d));
  std::vector<double> lam(eigenvalues.data(), eigenvalues.data() + d);
  const double med = detail::median_of(lam);
  std::vector<double> dev(lam.size());
  for (int i = 0; i < d; ++i) dev[i] = std::abs(lam[i] - med);
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dev[a] > dev[b]; });
  SelectionResult out;
  out.indices.assign(order.begin(), order.begin() + (k - 1));
  for (int& idx : out.indices) ++idx;
  std::sort(out.indices.begin(), out.indices.end());
  out.criterion_id = "med";
  out.diagnostics = dev;
  out.k_used = k;
  return out;
}

/// Keep the complement of the length-(d-k+1) contiguous eigenvalue window
/// with the smallest sample variance; ties resolved toward the first window.
inline SelectionResult var_select(const Vector& eigenvalues, int k) {
  const int d = static_cast<int>(eigenvalues.size());
  if (k < 2) throw validation_error("var_select: k must be >= 2");
  const int m = d - k + 1;
  if (m < 2)
    throw validation_error("var_select: window length d - k + 1 = " + std::to_string(m) +
                           " must be >= 2");
  std::vector<double> window_var(static_cast<std::size_t>(k));
  int best = 0;
  for (int s = 0; s < k; ++s) {  // k = d - m + 1 windows
    const auto seg = eigenvalues.segment(s, m);
    const double mean = seg.mean();
    window_var[s] = (seg.array() - mean).square().sum() / (m - 1);
    if (window_var[s] < window_var[best]) best = s;
  }
  SelectionResult out;
  for (int i = 0; i < d; ++i)
    if (i < best || i >= best + m) out.indices.push_back(i + 1);
  out.criterion_id = "var";
  out.diagnostics = window_var;
  out.k_used = k;
  return out;
}

struct SkewnessTest {
  double z;
  double p;
};

/// D'Agostino (1970) skewness test: sample skewness g1 transformed to an
/// approximately standard normal z, two-sided p.
inline SkewnessTest dagostino_skewness(const Vector& x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 9) throw validation_error("dagostino_skewness: needs n >= 9");
  const double mean = x.mean();
  const Eigen::ArrayXd c = x.array() - mean;
  const double m2 = c.square().mean();
  if (!(m2 > 0.0)) throw validation_error("dagostino_skewness: zero variance");
  const double m3 = c.cube().mean();
  const double g1 = m3 / std::pow(m2, 1.5);

  const double y = g1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double z = delta * std::asinh(y / alpha);
  return {z, normal_two_sided_p(z)};
}

/// Normal criterion: scan score columns from the front while the skewness
/// test rejects at `level`, then likewise from the back; the union is
/// returned and may be empty. Diagnostics carry all column p-values.
inline SelectionResult normal_select(const Matrix& scores, double level = 0.05) {
  if (!(level > 0.0) || !(level < 1.0))
    throw validation_error("normal_select: level must be in (0, 1)");
  const Eigen::Index d = scores.cols();
  std::vector<double> pvals(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    pvals[static_cast<std::size_t>(j)] = dagostino_skewness(scores.col(j)).p;

  std::set<int> chosen;
  for (Eigen::Index j = 0; j < d && pvals[static_cast<std::size_t>(j)] < level; ++j)
    chosen.insert(static_cast<int>(j) + 1);
  for (Eigen::Index j = d - 1; j >= 0 && pvals[static_cast<std::size_t>(j)] < level; --j) {
    if (chosen.count(static_cast<int>(j) + 1)) break;
    chosen.insert(static_cast<int>(j) + 1);
  }
  SelectionResult out;
  out.indices.assign(chosen.begin(), chosen.end());
  out.criterion_id = "normal:" + detail::format_param(level);
  out.diagnostics = pvals;
  return out;
}

/// Oracle criterion: over the splits "first j plus last k-1-j components",
/// return the set with the largest eta^2 against the true labels.
/// Degenerate splits are skipped; all splits degenerate is an error.
inline SelectionResult oracle_select(const Matrix& scores, const Labels& labels, int k) {
  validate_labels(labels, scores.rows());
  const int d = static_cast<int>(scores.cols());
  if (k < 2) throw validation_error("oracle_select: k must be >= 2");
  if (k - 1 > d)
    throw validation_error("oracle_select: k - 1 = " + std::to_string(k - 1) +
                           " exceeds component count " + std::to_string(d));
  const int take = k - 1;
  SelectionResult out;
  out.criterion_id = "oracle";
  out.k_used = k;
  out.diagnostics.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
  double best = -1.0;
  for (int j = 0; j <= take; ++j) {
    std::vector<int> idx;
    for (int i = 1; i <= j; ++i) idx.push_back(i);
    for (int i = d - (take - j) + 1; i <= d; ++i) idx.push_back(i);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

    Matrix Y(scores.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Y.col(static_cast<Eigen::Index>(c)) = scores.col(idx[c] - 1);
    double value;
    try {
      value = eta2(Y, labels);
    } catch (const evaluation_error&) {
      continue;  // singular total SSCP for this split
    }
    out.diagnostics[static_cast<std::size_t>(j)] = value;
    if (value > best) {
      best = value;
      out.indices = idx;
    }
  }
  if (out.indices.empty())
    throw evaluation_error("oracle_select: every split had a singular total SSCP");
  return out;
}

}  // namespace icsclust

#endif
