#ifndef SSM_DISTRIBUTIONS_HPP
#define SSM_DISTRIBUTIONS_HPP

#include <limits>
#include <string>
#include <variant>

#include "ssm/rng.hpp"

namespace ssm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Normal distribution parameterized by standard deviation.
struct Gaussian {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Gamma distribution with (shape, scale); mean = shape * scale.
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// Normal restricted to [lo, hi]; either bound may be infinite.
struct TruncatedGaussian {
  double mean = 0.0;
  double stddev = 1.0;
  double lo = -kInf;
  double hi = kInf;
};

using Distribution = std::variant<Gaussian, Gamma, Uniform, TruncatedGaussian>;

/// Throws ParameterDomainError when the parameters are invalid.
void validate(const Distribution& dist);

double sample(const Distribution& dist, RngStream& rng);
double log_pdf(const Distribution& dist, double x);

double mean(const Distribution& dist);
double variance(const Distribution& dist);

std::string describe(const Distribution& dist);

// Scalar helpers shared by the distributions and their callers.
double normal_log_pdf(double x, double mean, double stddev) noexcept;
/// log Phi(x), accurate far into both tails.
double normal_log_cdf(double x) noexcept;
/// log(Phi(b) - Phi(a)) for a <= b, standardized bounds.
double normal_log_mass(double a, double b) noexcept;

}  // namespace ssm

#endif  // SSM_DISTRIBUTIONS_HPP
