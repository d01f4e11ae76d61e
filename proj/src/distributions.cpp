#include "ssm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * ln(2*pi)
constexpr double kSqrt2 = std::numbers::sqrt2;

// Below this mass, rejection from the untruncated normal accepts < 1% of draws.
const double kLogRejectionFloor = std::log(0.01);

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double standard_normal_pdf(double z) noexcept {
  if (std::isinf(z)) return 0.0;
  return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

// Upper tail of the standard normal, Q(z) = 1 - Phi(z).
double upper_tail(double z) noexcept { return 0.5 * std::erfc(z / kSqrt2); }

// Robert (1995) exponential rejection for the deep upper tail [a, b], a > 0.
double sample_deep_tail(double a, double b, RngStream& rng) {
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.uniform_open()) / rate;
    if (z > b) continue;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// Standard normal restricted to [a, b] by inverting the CDF on the side of
// the distribution where the bounds live, so tail probabilities keep precision.
double sample_truncated_standard(double a, double b, RngStream& rng) {
  if (b <= 0.0) return -sample_truncated_standard(-b, -a, rng);
  if (a >= 0.0) {
    const double qa = upper_tail(a);
    const double qb = upper_tail(b);
    if (qa <= 0.0 || qa == qb) return sample_deep_tail(a, b, rng);
    const double u = qb + (qa - qb) * rng.uniform_open();
    return kSqrt2 * boost::math::erfc_inv(2.0 * u);
  }
  const double pa = 0.5 * std::erfc(-a / kSqrt2);
  const double pb = 0.5 * std::erfc(-b / kSqrt2);
  const double u = pa + (pb - pa) * rng.uniform_open();
  return -kSqrt2 * boost::math::erfc_inv(2.0 * u);
}

double sample_gamma(double shape, double scale, RngStream& rng) {
  if (shape < 1.0) {
    // Boost the shape by one, then correct with U^(1/shape).
    const double boosted = sample_gamma(shape + 1.0, 1.0, rng);
    return scale * boosted * std::pow(rng.uniform_open(), 1.0 / shape);
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return scale * d * v;
  }
}

}  // namespace

double normal_log_pdf(double x, double mean, double stddev) noexcept {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(stddev);
}

double normal_log_cdf(double x) noexcept {
  if (std::isnan(x)) return x;
  if (x == kInf) return 0.0;
  if (x == -kInf) return -kInf;
  if (x > 5.0) return std::log1p(-upper_tail(x));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
  // Asymptotic expansion of the Mills ratio.
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double normal_log_mass(double a, double b) noexcept {
  if (!(a < b)) return -kInf;
  if (a >= 0.0) {
    const double log_qa = normal_log_cdf(-a);
    const double log_qb = normal_log_cdf(-b);
    return log_qa + std::log1p(-std::exp(log_qb - log_qa));
  }
  if (b <= 0.0) {
    const double log_pb = normal_log_cdf(b);
    const double log_pa = normal_log_cdf(a);
    return log_pb + std::log1p(-std::exp(log_pa - log_pb));
  }
  const double outside = 0.5 * std::erfc(-a / kSqrt2) + upper_tail(b);
  return std::log1p(-outside);
}

void validate(const Distribution& dist) {
  std::visit(overloaded{
                 [](const Gaussian& d) {
                   if (!std::isfinite(d.mean) || !(d.stddev > 0.0) || !std::isfinite(d.stddev))
                     throw ParameterDomainError("Gaussian requires finite mean and stddev > 0");
                 },
                 [](const Gamma& d) {
                   if (!(d.shape > 0.0) || !(d.scale > 0.0) || !std::isfinite(d.shape) ||
                       !std::isfinite(d.scale))
                     throw ParameterDomainError("Gamma requires shape > 0 and scale > 0");
                 },
                 [](const Uniform& d) {
                   if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi))
                     throw ParameterDomainError("Uniform requires finite lo < hi");
                 },
                 [](const TruncatedGaussian& d) {
                   if (!std::isfinite(d.mean) || !(d.stddev > 0.0) || !std::isfinite(d.stddev))
                     throw ParameterDomainError("TruncatedGaussian requires finite mean and stddev > 0");
                   if (std::isnan(d.lo) || std::isnan(d.hi) || !(d.lo < d.hi))
                     throw ParameterDomainError("TruncatedGaussian requires lo < hi");
                 },
             },
             dist);
}

double sample(const Distribution& dist, RngStream& rng) {
  validate(dist);
  return std::visit(
      overloaded{
          [&](const Gaussian& d) { return d.mean + d.stddev * rng.normal(); },
          [&](const Gamma& d) { return sample_gamma(d.shape, d.scale, rng); },
          [&](const Uniform& d) { return d.lo + (d.hi - d.lo) * rng.uniform(); },
          [&](const TruncatedGaussian& d) {
            const double a = (d.lo - d.mean) / d.stddev;
            const double b = (d.hi - d.mean) / d.stddev;
            if (normal_log_mass(a, b) >= kLogRejectionFloor) {
              for (;;) {
                const double x = d.mean + d.stddev * rng.normal();
                if (x >= d.lo && x <= d.hi) return x;
              }
            }
            const double x = d.mean + d.stddev * sample_truncated_standard(a, b, rng);
            return std::clamp(x, d.lo, d.hi);
          },
      },
      dist);
}

double log_pdf(const Distribution& dist, double x) {
  validate(dist);
  if (std::isnan(x)) return -kInf;
  return std::visit(
      overloaded{
          [&](const Gaussian& d) { return normal_log_pdf(x, d.mean, d.stddev); },
          [&](const Gamma& d) {
            if (x < 0.0 || std::isinf(x)) return -kInf;
            if (x == 0.0) {
              if (d.shape > 1.0) return -kInf;
              if (d.shape < 1.0) return kInf;
              return -std::log(d.scale);
            }
            return (d.shape - 1.0) * std::log(x) - x / d.scale - std::lgamma(d.shape) -
                   d.shape * std::log(d.scale);
          },
          [&](const Uniform& d) {
            if (x < d.lo || x > d.hi) return -kInf;
            return -std::log(d.hi - d.lo);
          },
          [&](const TruncatedGaussian& d) {
            if (x < d.lo || x > d.hi) return -kInf;
            const double log_mass = normal_log_mass((d.lo - d.mean) / d.stddev, (d.hi - d.mean) / d.stddev);
            return normal_log_pdf(x, d.mean, d.stddev) - log_mass;
          },
      },
      dist);
}

namespace {

struct TruncatedMoments {
  double mean;
  double variance;
};

TruncatedMoments truncated_moments(const TruncatedGaussian& d) {
  const double a = (d.lo - d.mean) / d.stddev;
  const double b = (d.hi - d.mean) / d.stddev;
  const double mass = std::exp(normal_log_mass(a, b));
  const double pa = standard_normal_pdf(a);
  const double pb = standard_normal_pdf(b);
  const double apa = std::isinf(a) ? 0.0 : a * pa;
  const double bpb = std::isinf(b) ? 0.0 : b * pb;
  const double shift = (pa - pb) / mass;
  return {d.mean + d.stddev * shift,
          d.stddev * d.stddev * (1.0 + (apa - bpb) / mass - shift * shift)};
}

}  // namespace

double mean(const Distribution& dist) {
  validate(dist);
  return std::visit(overloaded{
                        [](const Gaussian& d) { return d.mean; },
                        [](const Gamma& d) { return d.shape * d.scale; },
                        [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
                        [](const TruncatedGaussian& d) { return truncated_moments(d).mean; },
                    },
                    dist);
}

double variance(const Distribution& dist) {
  validate(dist);
  return std::visit(overloaded{
                        [](const Gaussian& d) { return d.stddev * d.stddev; },
                        [](const Gamma& d) { return d.shape * d.scale * d.scale; },
                        [](const Uniform& d) { return (d.hi - d.lo) * (d.hi - d.lo) / 12.0; },
                        [](const TruncatedGaussian& d) { return truncated_moments(d).variance; },
                    },
                    dist);
}

std::string describe(const Distribution& dist) {
  return std::visit(
      overloaded{
          [](const Gaussian& d) { return fmt::format("Gaussian({}, {})", d.mean, d.stddev); },
          [](const Gamma& d) { return fmt::format("Gamma({}, {})", d.shape, d.scale); },
          [](const Uniform& d) { return fmt::format("Uniform({}, {})", d.lo, d.hi); },
          [](const TruncatedGaussian& d) {
            return fmt::format("TruncatedGaussian({}, {}, {}, {})", d.mean, d.stddev, d.lo, d.hi);
          },
      },
      dist);
}

}  // namespace ssm
