#ifndef ICSCLUST_PROB_HPP
#define ICSCLUST_PROB_HPP

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

namespace icsclust {

inline double chi2_cdf(double x, double df) {
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(dist, x);
}

inline double chi2_quantile(double p, double df) {
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Two-sided standard normal tail probability.
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace icsclust

#endif
