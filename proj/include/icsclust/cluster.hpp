#ifndef ICSCLUST_CLUSTER_HPP
#define ICSCLUST_CLUSTER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "icsclust/matstat.hpp"
#include "icsclust/rng.hpp"
#include "icsclust/types.hpp"

#ifdef ICSCLUST_AUDIT
#include <cassert>
#endif

namespace icsclust {

struct ClusterResult {
  Labels labels;  // 1..k, sentinel 0 for trimmed/noise observations
  Matrix centers; // k x m: means, medoids, or mixture means
  std::string method_id;
  double objective = 0.0;  // within-SS, total dissimilarity, or log-likelihood
  int iterations = 0;
  bool converged = true;
  Matrix responsibilities;  // gmm only: n x (k [+1 noise]) posterior matrix
  std::vector<int> regularized;  // gmm only: per-component collapse counts
};

namespace detail {

/// k-means++ style greedy-spreading seeding.
inline Matrix seed_centers(const Matrix& Y, int k, Rng& rng) {
  const Eigen::Index n = Y.rows(), m = Y.cols();
  Matrix centers(k, m);
  centers.row(0) = Y.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2 = (Y.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {  // all remaining points coincide with chosen centers
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(j) = Y.row(pick);
    d2 = d2.cwiseMin((Y.rowwise() - centers.row(j)).rowwise().squaredNorm());
  }
  return centers;
}

struct LloydRun {
  Labels labels;
  Matrix centers;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Lloyd iteration with an optional trimming step: each round the n_trim
/// points farthest from their nearest center are set aside (label 0)
/// before the centers are recomputed.
inline LloydRun lloyd_trimmed(const Matrix& Y, int k, Eigen::Index n_trim, int max_iter,
                              Rng& rng) {
  const Eigen::Index n = Y.rows();
  LloydRun run;
  run.centers = seed_centers(Y, k, rng);
  run.labels.assign(static_cast<std::size_t>(n), -1);

  Labels labels(static_cast<std::size_t>(n), -1);
  Vector nearest_d2(n);
  Eigen::VectorXi nearest(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  double prev_objective = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter; ++iter) {
    run.iterations = iter;
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      double best = (Y.row(i) - run.centers.row(0)).squaredNorm();
      for (int j = 1; j < k; ++j) {
        const double d = (Y.row(i) - run.centers.row(j)).squaredNorm();
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      nearest(i) = arg;
      nearest_d2(i) = best;
      labels[static_cast<std::size_t>(i)] = arg + 1;
    }
    if (n_trim > 0) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::partial_sort(order.begin(), order.begin() + n_trim, order.end(),
                        [&](Eigen::Index a, Eigen::Index b) {
                          return nearest_d2(a) > nearest_d2(b) ||
                                 (nearest_d2(a) == nearest_d2(b) && a < b);
                        });
      for (Eigen::Index t = 0; t < n_trim; ++t) labels[static_cast<std::size_t>(order[t])] = 0;
    }

    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (labels[static_cast<std::size_t>(i)] != 0) objective += nearest_d2(i);
#ifdef ICSCLUST_AUDIT
    assert(objective <= prev_objective * (1.0 + 1e-9) + 1e-9 &&
           "lloyd objective must not increase");
#endif
    prev_objective = objective;

    if (labels == run.labels) {
      run.converged = true;
      run.objective = objective;
      return run;
    }
    run.labels = labels;
    run.objective = objective;

    Matrix sums = Matrix::Zero(k, Y.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int lab = labels[static_cast<std::size_t>(i)];
      if (lab == 0) continue;
      sums.row(lab - 1) += Y.row(i);
      ++counts[static_cast<std::size_t>(lab - 1)];
    }
    std::vector<Eigen::Index> reseeded;
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        run.centers.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
      } else {
        // empty cluster: restart it at the farthest untrimmed point
        Eigen::Index far = -1;
        double far_d2 = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (labels[static_cast<std::size_t>(i)] == 0) continue;
          if (std::find(reseeded.begin(), reseeded.end(), i) != reseeded.end()) continue;
          if (nearest_d2(i) > far_d2) {
            far_d2 = nearest_d2(i);
            far = i;
          }
        }
        if (far >= 0) {
          run.centers.row(j) = Y.row(far);
          reseeded.push_back(far);
        }
      }
    }
  }
  return run;
}

inline LloydRun best_lloyd(const Matrix& Y, int k, Eigen::Index n_trim, int n_starts,
                           int max_iter, std::uint64_t seed, const char* tag) {
  const std::uint64_t root = derive_seed(seed, tag);
  LloydRun best;
  for (int s = 0; s < n_starts; ++s) {
    Rng rng(derive_seed(root, static_cast<std::uint64_t>(s)));
    LloydRun run = lloyd_trimmed(Y, k, n_trim, max_iter, rng);
    if (run.objective < best.objective) best = std::move(run);
  }
  return best;
}

inline void validate_cluster_args(const Matrix& Y, int k, int n_starts) {
  validate_data(Y);
  if (k < 1) throw validation_error("cluster: k must be >= 1");
  if (k > Y.rows())
    throw validation_error("cluster: k = " + std::to_string(k) + " exceeds n = " +
                           std::to_string(Y.rows()));
  if (n_starts < 1) throw validation_error("cluster: n_starts must be >= 1");
}

}  // namespace detail

/// Lloyd k-means, best of n_starts greedy-spreading initializations.
inline ClusterResult kmeans(const Matrix& Y, int k, int n_starts = 25, std::uint64_t seed = 0) {
  detail::validate_cluster_args(Y, k, n_starts);
  detail::LloydRun run = detail::best_lloyd(Y, k, 0, n_starts, 300, seed, "lloyd");
  ClusterResult out;
  out.labels = std::move(run.labels);
  out.centers = std::move(run.centers);
  out.method_id = "kmeans";
  out.objective = run.objective;
  out.iterations = run.iterations;
  out.converged = run.converged;
  return out;
}

/// Trimmed k-means: exactly ceil(trim*n) observations are left unassigned
/// (label 0) each iteration, the ones farthest from their nearest center.
/// With trim = 0 the run is identical to kmeans for the same seed.
inline ClusterResult tkmeans(const Matrix& Y, int k, double trim = 0.05, int n_starts = 25,
                             std::uint64_t seed = 0) {
  detail::validate_cluster_args(Y, k, n_starts);
  if (trim < 0.0 || trim >= 1.0) throw validation_error("tkmeans: trim must be in [0, 1)");
  const auto n_trim =
      static_cast<Eigen::Index>(std::ceil(trim * static_cast<double>(Y.rows())));
  if (n_trim >= Y.rows() - k)
    throw validation_error("tkmeans: trimming " + std::to_string(n_trim) +
                           " points leaves fewer than k = " + std::to_string(k) + " assignable");
  detail::LloydRun run = detail::best_lloyd(Y, k, n_trim, n_starts, 300, seed, "lloyd");
  ClusterResult out;
  out.labels = std::move(run.labels);
  out.centers = std::move(run.centers);
  out.method_id = "tkmeans:" + detail::format_param(trim);
  out.objective = run.objective;
  out.iterations = run.iterations;
  out.converged = run.converged;
  return out;
}

/// Partitioning around medoids: classic BUILD then SWAP on Euclidean
/// dissimilarities, fully deterministic.
inline ClusterResult pam(const Matrix& Y, int k) {
  detail::validate_cluster_args(Y, k, 1);
  const Eigen::Index n = Y.rows();
  if (n > 20000)
    throw validation_error("pam: n = " + std::to_string(n) +
                           " exceeds the 20000-row dissimilarity guard");

  Matrix D(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j)
      D(i, j) = D(j, i) = (Y.row(i) - Y.row(j)).norm();
  }

  std::vector<Eigen::Index> medoids;
  std::vector<bool> is_medoid(static_cast<std::size_t>(n), false);

  // BUILD: first the most central point, then greedy best-gain additions
  Eigen::Index first = 0;
  double best_total = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < n; ++c) {
    const double total = D.col(c).sum();
    if (total < best_total) {
      best_total = total;
      first = c;
    }
  }
  medoids.push_back(first);
  is_medoid[static_cast<std::size_t>(first)] = true;
  Vector nearest_d = D.col(first);

  while (static_cast<int>(medoids.size()) < k) {
    Eigen::Index best_c = -1;
    double best_gain = -1.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (is_medoid[static_cast<std::size_t>(c)]) continue;
      const double gain = (nearest_d - D.col(c)).cwiseMax(0.0).sum();
      if (gain > best_gain) {
        best_gain = gain;
        best_c = c;
      }
    }
    medoids.push_back(best_c);
    is_medoid[static_cast<std::size_t>(best_c)] = true;
    nearest_d = nearest_d.cwiseMin(D.col(best_c));
  }

  // nearest / second-nearest bookkeeping for SWAP
  std::vector<int> nearest_idx(static_cast<std::size_t>(n));
  Vector second_d(n);
  auto refresh = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      double d1 = std::numeric_limits<double>::infinity();
      double d2 = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < medoids.size(); ++t) {
        const double d = D(i, medoids[t]);
        if (d < d1) {
          d2 = d1;
          d1 = d;
          arg = static_cast<int>(t);
        } else if (d < d2) {
          d2 = d;
        }
      }
      nearest_idx[static_cast<std::size_t>(i)] = arg;
      nearest_d(i) = d1;
      second_d(i) = d2;
    }
  };
  refresh();

  int sweeps = 0;
  bool converged = true;
  if (k < n && k > 0) {
    for (sweeps = 1; sweeps <= 200; ++sweeps) {
      double best_delta = -1e-12;
      std::size_t best_t = 0;
      Eigen::Index best_h = -1;
      for (std::size_t t = 0; t < medoids.size(); ++t) {
        for (Eigen::Index h = 0; h < n; ++h) {
          if (is_medoid[static_cast<std::size_t>(h)]) continue;
          double delta = 0.0;
          for (Eigen::Index i = 0; i < n; ++i) {
            const double after =
                (nearest_idx[static_cast<std::size_t>(i)] == static_cast<int>(t))
                    ? std::min(second_d(i), D(i, h))
                    : std::min(nearest_d(i), D(i, h));
            delta += after - nearest_d(i);
          }
          if (delta < best_delta) {
            best_delta = delta;
            best_t = t;
            best_h = h;
          }
        }
      }
      if (best_h < 0) break;
      is_medoid[static_cast<std::size_t>(medoids[best_t])] = false;
      medoids[best_t] = best_h;
      is_medoid[static_cast<std::size_t>(best_h)] = true;
      refresh();
      if (sweeps == 200) converged = false;
    }
  }

  ClusterResult out;
  out.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    out.labels[static_cast<std::size_t>(i)] = nearest_idx[static_cast<std::size_t>(i)] + 1;
  out.centers.resize(k, Y.cols());
  for (int t = 0; t < k; ++t) out.centers.row(t) = Y.row(medoids[static_cast<std::size_t>(t)]);
  out.method_id = "pam";
  out.objective = nearest_d.sum();
  out.iterations = sweeps;
  out.converged = converged;
  return out;
}

/// EM for a k-component Gaussian mixture with unrestricted covariances;
/// with_noise adds one uniform component over the bounding hyperrectangle
/// of Y (initial mixing weight 0.05, then estimated like the rest).
/// Collapsing covariances are ridge-regularized and counted; a component
/// that stays collapsed for many consecutive iterations is an error.
inline ClusterResult gmm_em(const Matrix& Y, int k, bool with_noise, int n_starts = 5,
                            std::uint64_t seed = 0, int max_iter = 300, double tol = 1e-8) {
  detail::validate_cluster_args(Y, k, n_starts);
  const Eigen::Index n = Y.rows(), m = Y.cols();
  const int dof = k * (static_cast<int>(m) + static_cast<int>(m * (m + 1) / 2)) + k - 1;
  if (dof >= n)
    throw validation_error("gmm_em: " + std::to_string(dof) +
                           " free parameters need more than " + std::to_string(n) + " rows");

  double log_noise_density = 0.0;
  if (with_noise) {
    const Vector lo = Y.colwise().minCoeff(), hi = Y.colwise().maxCoeff();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!(hi(j) > lo(j)))
        throw validation_error("gmm_em: zero-volume bounding box (column " +
                               std::to_string(j) + " is constant)");
      log_noise_density -= std::log(hi(j) - lo(j));
    }
  }

  const int n_comp = k + (with_noise ? 1 : 0);  // noise component last
  const std::uint64_t root = derive_seed(seed, "gmm");
  ClusterResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int s = 0; s < n_starts; ++s) {
    const std::uint64_t start_seed = derive_seed(root, static_cast<std::uint64_t>(s));

    std::vector<Vector> mu(static_cast<std::size_t>(k));
    std::vector<Matrix> sigma(static_cast<std::size_t>(k));
    Vector weight(n_comp);

    {  // initialize from a single-start kmeans
      ClusterResult init = kmeans(Y, k, 1, start_seed);
      const Matrix pooled_c = Y.rowwise() - Y.colwise().mean();
      const Matrix pooled = pooled_c.transpose() * pooled_c / static_cast<double>(n);
      for (int j = 0; j < k; ++j) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i)
          if (init.labels[static_cast<std::size_t>(i)] == j + 1) members.push_back(i);
        mu[static_cast<std::size_t>(j)] = init.centers.row(j).transpose();
        if (static_cast<Eigen::Index>(members.size()) > m) {
          Matrix c(members.size(), m);
          for (std::size_t r = 0; r < members.size(); ++r)
            c.row(static_cast<Eigen::Index>(r)) =
                Y.row(members[r]) - init.centers.row(j);
          sigma[static_cast<std::size_t>(j)] =
              c.transpose() * c / static_cast<double>(members.size());
        } else {
          sigma[static_cast<std::size_t>(j)] = pooled;
        }
        weight(j) = std::max(1.0, static_cast<double>(members.size())) / static_cast<double>(n);
      }
      weight.head(k) /= weight.head(k).sum();
      if (with_noise) {
        weight.head(k) *= 0.95;
        weight(k) = 0.05;
      }
    }

    Matrix log_p(n, n_comp);
    Matrix resp(n, n_comp);
    std::vector<int> collapse_count(static_cast<std::size_t>(k), 0);
    std::vector<int> consecutive_collapse(static_cast<std::size_t>(k), 0);
    double ll_prev = -std::numeric_limits<double>::infinity();
    double ll = ll_prev;
    int iter = 0;
    bool converged = false;

    const double half_m_log2pi = 0.5 * static_cast<double>(m) * std::log(2.0 * M_PI);
    for (iter = 1; iter <= max_iter; ++iter) {
      for (int j = 0; j < k; ++j) {  // regularize before factorization
        Matrix& S = sigma[static_cast<std::size_t>(j)];
        const SymEigen eig = sym_eigen((S + S.transpose()) / 2.0);
        const double floor = 1e-8 * S.trace() / static_cast<double>(m);
        if (eig.values(m - 1) < floor) {
          S += (1e-6 * std::max(S.trace(), 1e-300) / static_cast<double>(m)) *
               Matrix::Identity(m, m);
          ++collapse_count[static_cast<std::size_t>(j)];
          if (++consecutive_collapse[static_cast<std::size_t>(j)] > 30)
            throw numeric_error("gmm_em: component " + std::to_string(j + 1) +
                                " repeatedly collapsed, degenerate fit");
        } else {
          consecutive_collapse[static_cast<std::size_t>(j)] = 0;
        }
      }
      for (int j = 0; j < k; ++j) {
        const auto llt = detail::spd_llt(sigma[static_cast<std::size_t>(j)], "gmm_em");
        const double log_det =
            2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
        const Matrix centered = Y.rowwise() - mu[static_cast<std::size_t>(j)].transpose();
        const Vector q =
            llt.matrixL().solve(centered.transpose()).colwise().squaredNorm().transpose();
        log_p.col(j) = (-0.5 * q.array() - 0.5 * log_det - half_m_log2pi +
                        std::log(std::max(weight(j), 1e-300)))
                           .matrix();
      }
      if (with_noise)
        log_p.col(k).setConstant(log_noise_density + std::log(std::max(weight(k), 1e-300)));

      ll = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = log_p.row(i).maxCoeff();
        const double lse = mx + std::log((log_p.row(i).array() - mx).exp().sum());
        resp.row(i) = (log_p.row(i).array() - lse).exp();
        ll += lse;
      }
#ifdef ICSCLUST_AUDIT
      assert(ll >= ll_prev - 1e-8 * (1.0 + std::abs(ll_prev)) &&
             "EM log-likelihood must not decrease");
#endif
      if (iter > 1 && std::abs(ll - ll_prev) < tol * (1.0 + std::abs(ll))) {
        converged = true;
        break;
      }
      ll_prev = ll;

      const Vector counts = resp.colwise().sum().transpose();
      weight = counts / static_cast<double>(n);
      for (int j = 0; j < k; ++j) {
        if (counts(j) < 1e-10) continue;  // keep previous parameters, weight has shrunk
        mu[static_cast<std::size_t>(j)] = (Y.transpose() * resp.col(j)) / counts(j);
        const Matrix centered = Y.rowwise() - mu[static_cast<std::size_t>(j)].transpose();
        sigma[static_cast<std::size_t>(j)] =
            centered.transpose() * resp.col(j).asDiagonal() * centered / counts(j);
      }
    }

    if (!have_best || ll > best.objective) {
      have_best = true;
      best.objective = ll;
      best.iterations = std::min(iter, max_iter);
      best.converged = converged;
      best.responsibilities = resp;
      best.regularized = collapse_count;
      best.centers.resize(k, m);
      for (int j = 0; j < k; ++j) best.centers.row(j) = mu[static_cast<std::size_t>(j)].transpose();
      best.labels.resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        resp.row(i).maxCoeff(&arg);
        best.labels[static_cast<std::size_t>(i)] =
            (with_noise && arg == k) ? 0 : static_cast<int>(arg) + 1;
      }
    }
  }
  best.method_id = with_noise ? "gmm-noise" : "gmm";
  return best;
}

/// Columnwise (x - location) / scale: mean and standard deviation, or
/// median and 1.4826 * MAD when robust.
inline Matrix standardize(const Matrix& X, bool robust) {
  validate_data(X);
  const Eigen::Index n = X.rows(), d = X.cols();
  Matrix out(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double loc, scale;
    if (robust) {
      std::vector<double> col(X.col(j).data(), X.col(j).data() + n);
      loc = detail::median_of(col);
      for (double& v : col) v = std::abs(v - loc);
      scale = 1.4826 * detail::median_of(col);
    } else {
      loc = X.col(j).mean();
      scale = std::sqrt((X.col(j).array() - loc).square().sum() / static_cast<double>(n - 1));
    }
    if (!(scale > 0.0))
      throw validation_error("standardize: column " + std::to_string(j) + " has zero scale");
    out.col(j) = (X.col(j).array() - loc) / scale;
  }
  return out;
}

}  // namespace icsclust

#endif

