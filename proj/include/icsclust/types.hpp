#ifndef ICSCLUST_TYPES_HPP
#define ICSCLUST_TYPES_HPP

#include <Eigen/Dense>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace icsclust {

namespace detail {

/// Compact decimal used in estimator/method ids: 0.1 -> "0.1", 2.0 -> "2".
inline std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cluster labels, one per observation. 0 is the sentinel for
/// trimmed/noise/outlier observations; regular clusters are 1..k.
using Labels = std::vector<int>;

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or argument violation.
class validation_error : public error {
 public:
  using error::error;
};

/// A matrix required to be (numerically) positive definite is not.
class singular_error : public error {
 public:
  using error::error;
};

/// Arithmetic breakdown (underflow, non-finite intermediate, ...).
class numeric_error : public error {
 public:
  using error::error;
};

/// Metric could not be evaluated on the given inputs.
class evaluation_error : public error {
 public:
  using error::error;
};

/// Iterative estimator failed to converge; carries the last iterate.
class convergence_error : public error {
 public:
  convergence_error(const std::string& msg, Vector location, Matrix matrix,
                    int iterations)
      : error(msg),
        last_location(std::move(location)),
        last_matrix(std::move(matrix)),
        iterations(iterations) {}

  Vector last_location;
  Matrix last_matrix;
  int iterations;
};

/// Malformed textual input (CSV cell, spec string, config line).
class parse_error : public error {
 public:
  using error::error;
};

/// Validates the DataMatrix contract: finite entries, n >= 2, d >= 1.
inline void validate_data(const Matrix& X) {
  if (X.rows() < 2 || X.cols() < 1)
    throw validation_error("data matrix must have n >= 2 rows and d >= 1 columns, got " +
                           std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
  if (!X.allFinite())
    throw validation_error("data matrix contains non-finite entries");
}

inline void validate_labels(const Labels& labels, Eigen::Index n) {
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw validation_error("label vector length " + std::to_string(labels.size()) +
                           " does not match row count " + std::to_string(n));
}

}  // namespace icsclust

#endif
