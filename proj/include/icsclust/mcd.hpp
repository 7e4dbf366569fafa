#ifndef ICSCLUST_MCD_HPP
#define ICSCLUST_MCD_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "icsclust/prob.hpp"
#include "icsclust/rng.hpp"
#include "icsclust/scatter.hpp"

#ifdef ICSCLUST_AUDIT
#include <cassert>
#endif

namespace icsclust {

/// Croux–Haesbroeck asymptotic consistency factor
/// c_alpha = alpha / F_{chi2_{d+2}}(q_alpha), q_alpha the alpha-quantile
/// of chi2_d; c_1 = 1.
inline double mcd_consistency_factor(double alpha, Eigen::Index d) {
  if (alpha >= 1.0) return 1.0;
  const double q = chi2_quantile(alpha, static_cast<double>(d));
  return alpha / chi2_cdf(q, static_cast<double>(d + 2));
}

namespace detail {

struct McdState {
  Vector mean;
  Matrix cov;  // ML covariance (1/h) of the subset
  std::vector<Eigen::Index> subset;
  double log_det = std::numeric_limits<double>::infinity();
  std::vector<double> det_trace;
};

inline double spd_log_det(const Matrix& S) {
  const SymEigen eig = sym_eigen(S);
  if (eig.values(eig.values.size() - 1) <= rank_tolerance(eig.values))
    return std::numeric_limits<double>::infinity();  // flag: singular subset
  return eig.values.array().log().sum();
}

inline void subset_moments(const Matrix& X, const std::vector<Eigen::Index>& subset,
                           Vector& mean, Matrix& cov) {
  const Eigen::Index d = X.cols();
  mean.setZero(d);
  for (auto i : subset) mean += X.row(i).transpose();
  mean /= static_cast<double>(subset.size());
  cov.setZero(d, d);
  for (auto i : subset) {
    const Vector c = X.row(i).transpose() - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0);
  }
  cov = Matrix(cov.selfadjointView<Eigen::Lower>()) / static_cast<double>(subset.size());
}

/// The h rows with smallest Mahalanobis distance under (mean, cov),
/// ties broken by row index.
inline std::vector<Eigen::Index> smallest_distance_subset(const Matrix& X, const Vector& mean,
                                                          const Matrix& cov, Eigen::Index h) {
  const Vector d2 = mahalanobis_sq_rows(X, mean, cov);
  std::vector<Eigen::Index> order(X.rows());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::partial_sort(order.begin(), order.begin() + h, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return d2(a) < d2(b) || (d2(a) == d2(b) && a < b);
                    });
  order.resize(h);
  std::sort(order.begin(), order.end());
  return order;
}

/// One C-step. Returns false when the subset is already stable.
inline bool c_step(const Matrix& X, Eigen::Index h, McdState& s) {
  auto next = smallest_distance_subset(X, s.mean, s.cov, h);
  const bool moved = (next != s.subset);
  if (moved) {
    s.subset = std::move(next);
    subset_moments(X, s.subset, s.mean, s.cov);
    const double ld = spd_log_det(s.cov);
    if (std::isinf(ld))
      throw singular_error("mcd: exact fit, a size-" + std::to_string(h) +
                           " subset has singular covariance");
#ifdef ICSCLUST_AUDIT
    assert(!(ld > s.log_det + 1e-9 * std::abs(s.log_det) + 1e-12) &&
           "C-step determinant must not increase");
#endif
    s.log_det = ld;
    s.det_trace.push_back(ld);
  }
  return moved;
}

inline ScatterEstimate finalize_mcd(const Matrix& X, double alpha, McdState best) {
  ScatterEstimate est;
  est.location = best.mean;
  est.matrix = mcd_consistency_factor(alpha, X.cols()) * best.cov;
  est.estimator_id = "mcd:" + format_param(alpha);
  est.diagnostics.best_subset = std::move(best.subset);
  est.diagnostics.cstep_dets = std::move(best.det_trace);
  est.diagnostics.iterations = static_cast<int>(est.diagnostics.cstep_dets.size());
  return est;
}

inline Eigen::Index mcd_subset_size(const Matrix& X, double alpha) {
  validate_data(X);
  if (!(alpha > 0.0) || alpha > 1.0)
    throw validation_error("mcd: alpha must be in (0, 1]");
  const auto h = static_cast<Eigen::Index>(std::ceil(alpha * static_cast<double>(X.rows())));
  if (h <= X.cols())
    throw validation_error("mcd: subset size ceil(alpha*n) = " + std::to_string(h) +
                           " must exceed d = " + std::to_string(X.cols()));
  return h;
}

}  // namespace detail

/// Raw minimum covariance determinant scatter via FAST-MCD: 500 random
/// (d+1)-point seeds, two C-steps each, the ten best candidates iterated
/// to convergence. Deterministic for a given seed. The scatter is the ML
/// covariance of the winning subset times the consistency factor.
inline ScatterEstimate mcd(const Matrix& X, double alpha, int n_starts = 500,
                           std::uint64_t seed = 0) {
  const Eigen::Index h = detail::mcd_subset_size(X, alpha);
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n_starts < 1) throw validation_error("mcd: n_starts must be >= 1");

  detail::McdState full;
  if (h == n) {  // alpha = 1: no search, the full sample is the subset
    full.subset.resize(n);
    std::iota(full.subset.begin(), full.subset.end(), Eigen::Index{0});
    detail::subset_moments(X, full.subset, full.mean, full.cov);
    full.log_det = detail::spd_log_det(full.cov);
    if (std::isinf(full.log_det)) throw singular_error("mcd: sample covariance is singular");
    full.det_trace.push_back(full.log_det);
    return detail::finalize_mcd(X, alpha, std::move(full));
  }

  const std::uint64_t root = derive_seed(seed, "mcd");
  std::vector<detail::McdState> candidates;
  candidates.reserve(n_starts);
  for (int start = 0; start < n_starts; ++start) {
    Rng rng(derive_seed(root, static_cast<std::uint64_t>(start)));
    auto trial = rng.sample_without_replacement(n, std::min(n, d + 1));
    std::sort(trial.begin(), trial.end());
    detail::McdState s;
    detail::subset_moments(X, trial, s.mean, s.cov);
    // grow the seed subset until its covariance is invertible
    while (detail::spd_log_det(s.cov) ==
               std::numeric_limits<double>::infinity() &&
           static_cast<Eigen::Index>(trial.size()) < n) {
      auto extra = rng.sample_without_replacement(n, 1)[0];
      if (std::find(trial.begin(), trial.end(), extra) == trial.end()) {
        trial.push_back(extra);
        detail::subset_moments(X, trial, s.mean, s.cov);
      }
    }
    if (detail::spd_log_det(s.cov) == std::numeric_limits<double>::infinity()) continue;

    s.subset = detail::smallest_distance_subset(X, s.mean, s.cov, h);
    detail::subset_moments(X, s.subset, s.mean, s.cov);
    s.log_det = detail::spd_log_det(s.cov);
    s.det_trace.push_back(s.log_det);
    if (std::isinf(s.log_det))
      throw singular_error("mcd: exact fit, a size-" + std::to_string(h) +
                           " subset has singular covariance");
    detail::c_step(X, h, s);  // second C-step of the scan phase
    candidates.push_back(std::move(s));
  }
  if (candidates.empty())
    throw singular_error("mcd: all candidate seed subsets were singular");

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const detail::McdState& a, const detail::McdState& b) {
                     return a.log_det < b.log_det;
                   });
  const std::size_t keep = std::min<std::size_t>(10, candidates.size());
  detail::McdState* best = nullptr;
  for (std::size_t c = 0; c < keep; ++c) {
    detail::McdState& s = candidates[c];
    for (int iter = 0; iter < 200 && detail::c_step(X, h, s); ++iter) {
    }
    if (std::isinf(s.log_det))
      throw singular_error("mcd: exact fit, a size-" + std::to_string(h) +
                           " subset has singular covariance");
    if (best == nullptr || s.log_det < best->log_det) best = &s;
  }
  return detail::finalize_mcd(X, alpha, std::move(*best));
}

/// Exhaustive MCD over all subsets of size ceil(alpha*n); exact but only
/// feasible for small n. Used by the affine-equivariance tests and the
/// enumerable examples.
inline ScatterEstimate mcd_exact(const Matrix& X, double alpha) {
  const Eigen::Index h = detail::mcd_subset_size(X, alpha);
  const Eigen::Index n = X.rows();
  double combos = 1.0;
  for (Eigen::Index i = 0; i < h; ++i)
    combos *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (combos > 5e6)
    throw validation_error("mcd_exact: C(" + std::to_string(n) + "," + std::to_string(h) +
                           ") subsets is too many to enumerate");

  std::vector<Eigen::Index> subset(h);
  std::iota(subset.begin(), subset.end(), Eigen::Index{0});
  detail::McdState best;
  bool any = false;
  Vector mean;
  Matrix cov;
  for (;;) {
    detail::subset_moments(X, subset, mean, cov);
    const double ld = detail::spd_log_det(cov);
    if (ld < best.log_det) {
      best.mean = mean;
      best.cov = cov;
      best.subset = subset;
      best.log_det = ld;
      any = true;
    }
    // next combination in lexicographic order
    Eigen::Index i = h - 1;
    while (i >= 0 && subset[i] == n - h + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (Eigen::Index j = i + 1; j < h; ++j) subset[j] = subset[j - 1] + 1;
  }
  if (!any || std::isinf(best.log_det))
    throw singular_error("mcd_exact: all subsets singular");
  best.det_trace.push_back(best.log_det);
  return detail::finalize_mcd(X, alpha, std::move(best));
}

namespace detail {

/// One-step reweighting of a raw MCD estimate: hard chi-squared cutoff,
/// weighted moments, consistency rescale (the alpha-factor formula at
/// the 0.975 retention level).
inline ScatterEstimate reweight_mcd(const Matrix& X, const ScatterEstimate& raw) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const double cutoff = chi2_quantile(0.975, static_cast<double>(d));
  const Vector d2 = mahalanobis_sq_rows(X, raw.location, raw.matrix);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i)
    if (d2(i) <= cutoff) kept.push_back(i);
  if (static_cast<Eigen::Index>(kept.size()) < d + 1)
    throw validation_error("rmcd: degenerate weighting, only " + std::to_string(kept.size()) +
                           " observations kept");
  Vector mean;
  Matrix cov;
  subset_moments(X, kept, mean, cov);
  const double factor = 0.975 / chi2_cdf(cutoff, static_cast<double>(d + 2));

  ScatterEstimate est;
  est.location = mean;
  est.matrix = factor * cov;
  est.estimator_id = "r" + raw.estimator_id;
  est.diagnostics = raw.diagnostics;
  est.diagnostics.best_subset = std::move(kept);
  return est;
}

}  // namespace detail

/// Reweighted MCD.
inline ScatterEstimate rmcd(const Matrix& X, double alpha, int n_starts = 500,
                            std::uint64_t seed = 0) {
  return detail::reweight_mcd(X, mcd(X, alpha, n_starts, seed));
}

inline ScatterEstimate rmcd_exact(const Matrix& X, double alpha) {
  return detail::reweight_mcd(X, mcd_exact(X, alpha));
}

}  // namespace icsclust

#endif
