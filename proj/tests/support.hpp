#ifndef SSM_TESTS_SUPPORT_HPP
#define SSM_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace ssm::testing {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;  // standard error of the mean
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= n - 1.0;
  m.se = std::sqrt(m.variance / n);
  return m;
}

/// Standard error of the sample variance, from the fourth central moment.
inline double variance_se(const std::vector<double>& xs) {
  const Moments m = moments(xs);
  const double n = static_cast<double>(xs.size());
  double m4 = 0.0;
  for (double x : xs) m4 += std::pow(x - m.mean, 4);
  m4 /= n;
  return std::sqrt(std::max(0.0, (m4 - m.variance * m.variance) / n));
}

/// exp(log_z - reference) for each replicate.
inline std::vector<double> ratios(const std::vector<double>& log_z, double reference) {
  std::vector<double> out;
  out.reserve(log_z.size());
  for (double v : log_z) out.push_back(std::exp(v - reference));
  return out;
}

}  // namespace ssm::testing

#endif  // SSM_TESTS_SUPPORT_HPP
