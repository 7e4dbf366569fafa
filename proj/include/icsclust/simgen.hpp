#ifndef ICSCLUST_SIMGEN_HPP
#define ICSCLUST_SIMGEN_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "icsclust/rng.hpp"
#include "icsclust/types.hpp"

namespace icsclust {

/// Mean-shift Gaussian mixture: component h+1 sits at delta * e_h with
/// identity within-cluster covariance.
struct MixtureSpec {
  std::vector<double> weights;  // q positive entries summing to 1
  int d = 10;
  double delta = 10.0;
  int n = 1000;

  int q() const { return static_cast<int>(weights.size()); }

  void validate() const {
    if (weights.empty()) throw validation_error("mixture: needs at least one weight");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw validation_error("mixture: weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw validation_error("mixture: weights must sum to 1 (got " + std::to_string(sum) + ")");
    if (q() - 1 > d)
      throw validation_error("mixture: q - 1 = " + std::to_string(q() - 1) +
                             " shift directions do not fit in d = " + std::to_string(d));
    if (n < 2) throw validation_error("mixture: n must be >= 2");
    if (d < 1) throw validation_error("mixture: d must be >= 1");
  }
};

inline std::pair<Matrix, Labels> gen_mixture(const MixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, "mixture"));
  Matrix X(spec.n, spec.d);
  Labels labels(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    const int h = rng.categorical(spec.weights);
    labels[static_cast<std::size_t>(i)] = h + 1;
    for (int j = 0; j < spec.d; ++j) X(i, j) = rng.normal();
    if (h > 0) X(i, h - 1) += spec.delta;
  }
  return {std::move(X), std::move(labels)};
}

/// Replaces ceil(proportion*n) uniformly chosen rows by draws from the
/// doubled per-variable-range hyperrectangle minus the data-range box
/// (both concentric with the range midpoints), via rejection sampling.
/// Replaced rows get the sentinel label 0.
inline std::pair<Matrix, Labels> inject_outliers(const Matrix& X, const Labels& labels,
                                                 double proportion, std::uint64_t seed) {
  validate_data(X);
  validate_labels(labels, X.rows());
  if (proportion < 0.0 || proportion >= 1.0)
    throw validation_error("inject_outliers: proportion must be in [0, 1)");

  Matrix out = X;
  Labels out_labels = labels;
  const auto n_out =
      static_cast<Eigen::Index>(std::ceil(proportion * static_cast<double>(X.rows())));
  if (n_out == 0) return {std::move(out), std::move(out_labels)};

  const Vector lo = X.colwise().minCoeff(), hi = X.colwise().maxCoeff();
  const Vector mid = (lo + hi) / 2.0, range = hi - lo;
  Rng rng(derive_seed(seed, "outliers"));
  const auto rows = rng.sample_without_replacement(X.rows(), n_out);
  const Eigen::Index d = X.cols();
  Vector draw(d);
  for (auto r : rows) {
    bool accepted = false;
    for (int attempt = 0; attempt < 1000000; ++attempt) {
      bool outside = false;
      for (Eigen::Index j = 0; j < d; ++j) {
        draw(j) = rng.uniform(mid(j) - range(j), mid(j) + range(j));
        if (draw(j) < lo(j) || draw(j) > hi(j)) outside = true;
      }
      if (outside) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw numeric_error("inject_outliers: rejection sampling failed (degenerate ranges)");
    out.row(r) = draw.transpose();
    out_labels[static_cast<std::size_t>(r)] = 0;
  }
  return {std::move(out), std::move(out_labels)};
}

/// Barrow wheel: a flattened Gaussian body plus a chi-distributed spoke
/// along the first axis (random sign, so the spoke halves are labels 2
/// and 3), everything rotated by an orthogonal map.
struct BarrowWheelSpec {
  int d = 3;
  int n = 1000;
  double sigma1 = 0.1;
  double sigma2 = 0.2;
  double eps = 0.2;
  Matrix rotation;  // empty: use the default e1 -> (1,..,1)/sqrt(d) reflection

  void validate() const {
    if (d < 2) throw validation_error("barrow wheel: d must be >= 2");
    if (n < 2) throw validation_error("barrow wheel: n must be >= 2");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
      throw validation_error("barrow wheel: sigma1 and sigma2 must be > 0");
    if (!(eps > 0.0) || !(eps < 1.0))
      throw validation_error("barrow wheel: eps must be in (0, 1)");
    if (rotation.size() != 0) {
      if (rotation.rows() != d || rotation.cols() != d)
        throw validation_error("barrow wheel: rotation must be d x d");
      if ((rotation.transpose() * rotation - Matrix::Identity(d, d)).norm() > 1e-10)
        throw validation_error("barrow wheel: rotation is not orthogonal to 1e-10");
    }
  }
};

/// Householder reflection sending e1 to (1,..,1)/sqrt(d).
inline Matrix default_wheel_rotation(int d) {
  const Vector u = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  Vector v = Vector::Zero(d);
  v(0) = 1.0;
  v -= u;
  const double norm = v.norm();
  if (norm < 1e-14) return Matrix::Identity(d, d);
  v /= norm;
  return Matrix::Identity(d, d) - 2.0 * v * v.transpose();
}

inline std::pair<Matrix, Labels> gen_barrow_wheel(const BarrowWheelSpec& spec,
                                                  std::uint64_t seed) {
  spec.validate();
  const Matrix O = spec.rotation.size() ? spec.rotation : default_wheel_rotation(spec.d);
  Rng rng(derive_seed(seed, "bwheel"));
  Matrix X(spec.n, spec.d);
  Labels labels(static_cast<std::size_t>(spec.n));
  Vector x(spec.d);
  for (int i = 0; i < spec.n; ++i) {
    if (rng.uniform01() < 1.0 - spec.eps) {
      x(0) = spec.sigma1 * rng.normal();
      for (int j = 1; j < spec.d; ++j) x(j) = rng.normal();
      labels[static_cast<std::size_t>(i)] = 1;
    } else {
      const double h1 = rng.chi(static_cast<double>(spec.d - 1));
      const bool positive = rng.uniform01() < 0.5;
      x(0) = positive ? h1 : -h1;
      for (int j = 1; j < spec.d; ++j) x(j) = spec.sigma2 * rng.normal();
      labels[static_cast<std::size_t>(i)] = positive ? 2 : 3;
    }
    X.row(i) = (O * x).transpose();
  }
  return {std::move(X), std::move(labels)};
}

}  // namespace icsclust

#endif
