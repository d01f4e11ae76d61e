#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ssm/distributions.hpp"
#include "ssm/errors.hpp"
#include "support.hpp"

using namespace ssm;
namespace quad = boost::math::quadrature;

namespace {

// Integral of x^power * pdf(x) over the support, by double-exponential quadrature.
double integrate(const Distribution& dist, int power = 0) {
  auto f = [&](double x) { return std::pow(x, power) * std::exp(log_pdf(dist, x)); };
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return quad::sinh_sinh<double>().integrate(
              [&](double z) { return std::pow(d.mean + d.stddev * z, power) * std::exp(log_pdf(dist, d.mean + d.stddev * z)) * d.stddev; });
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return quad::exp_sinh<double>().integrate(f, 0.0, std::numeric_limits<double>::infinity());
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return quad::tanh_sinh<double>().integrate(f, d.lo, d.hi);
        } else {
          if (std::isfinite(d.lo) && std::isfinite(d.hi)) return quad::tanh_sinh<double>().integrate(f, d.lo, d.hi);
          if (std::isfinite(d.lo)) return quad::exp_sinh<double>().integrate(f, d.lo, std::numeric_limits<double>::infinity());
          return quad::exp_sinh<double>().integrate(f, -std::numeric_limits<double>::infinity(), d.hi);
        }
      },
      dist);
}

const std::vector<Distribution>& desk_cases() {
  static const std::vector<Distribution> cases{
      Gaussian{1.5, 0.7},
      Gamma{2.0, 0.01},
      Gamma{4.0, 0.3},
      Gamma{0.7, 2.0},
      Uniform{-1.0, 3.0},
      TruncatedGaussian{0.0, 1.0, 0.0, kInf},
      TruncatedGaussian{2.0, 0.5, -kInf, 1.0},
      TruncatedGaussian{0.3, 0.1, 0.0, 1.0},
      TruncatedGaussian{0.0, 1.0, 4.0, 4.5},
  };
  return cases;
}

}  // namespace

TEST_CASE("log_pdf reference values") {
  CHECK(log_pdf(Gaussian{0.0, 1.0}, 0.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(log_pdf(Uniform{0.0, 1.0}, 1.5) == -kInf);
  CHECK(log_pdf(Gamma{2.0, 1.0}, -0.1) == -kInf);
  // Half-normal: standard normal log density plus ln 2.
  CHECK(log_pdf(TruncatedGaussian{0.0, 1.0, 0.0, kInf}, 0.3) == doctest::Approx(-0.2707913526447274).epsilon(1e-14));
  CHECK(log_pdf(TruncatedGaussian{0.0, 1.0, 0.0, kInf}, -0.3) == -kInf);
}

TEST_CASE("densities integrate to one") {
  for (const auto& dist : desk_cases()) {
    CAPTURE(describe(dist));
    CHECK(std::abs(integrate(dist) - 1.0) < 1e-6);
  }
}

TEST_CASE("analytic moments agree with quadrature") {
  for (const auto& dist : desk_cases()) {
    CAPTURE(describe(dist));
    const double m1 = integrate(dist, 1);
    const double m2 = integrate(dist, 2);
    CHECK(mean(dist) == doctest::Approx(m1).epsilon(1e-7));
    CHECK(variance(dist) == doctest::Approx(m2 - m1 * m1).epsilon(1e-6));
  }
}

TEST_CASE("sample moments match analytic moments") {
  RngStream root(77);
  std::uint64_t index = 0;
  for (const auto& dist : desk_cases()) {
    CAPTURE(describe(dist));
    RngStream rng = root.child(index++);
    std::vector<double> xs(1000000);
    for (double& x : xs) x = sample(dist, rng);
    const auto m = testing::moments(xs);
    CHECK(std::abs(m.mean - mean(dist)) < 4.0 * m.se);
    CHECK(std::abs(m.variance - variance(dist)) < 4.0 * testing::variance_se(xs));
  }
}

TEST_CASE("Gamma(2, 0.01) sample mean") {
  RngStream rng(3);
  std::vector<double> xs(1000000);
  for (double& x : xs) x = sample(Gamma{2.0, 0.01}, rng);
  const auto m = testing::moments(xs);
  CHECK(std::abs(m.mean - 0.02) < 3.0 * m.se);
}

TEST_CASE("samples respect their support") {
  RngStream rng(11);
  for (int i = 0; i < 100000; ++i) {
    const double u = sample(Uniform{0.0, 1.0}, rng);
    REQUIRE((u >= 0.0 && u < 1.0));
    const double t = sample(TruncatedGaussian{0.5, 1e-2, 0.0, 1.0}, rng);
    REQUIRE((t > 0.0 && t < 1.0));
    const double tail = sample(TruncatedGaussian{0.0, 1.0, 8.0, 9.0}, rng);
    REQUIRE((tail >= 8.0 && tail <= 9.0));
    const double far = sample(TruncatedGaussian{0.0, 1.0, -kInf, -30.0}, rng);
    REQUIRE(far <= -30.0);
  }
}

TEST_CASE("invalid parameters are rejected") {
  RngStream rng(1);
  CHECK_THROWS_AS(sample(Gaussian{0.0, 0.0}, rng), ParameterDomainError);
  CHECK_THROWS_AS(sample(Gamma{-1.0, 1.0}, rng), ParameterDomainError);
  CHECK_THROWS_AS(sample(Gamma{1.0, 0.0}, rng), ParameterDomainError);
  CHECK_THROWS_AS(sample(Uniform{1.0, 1.0}, rng), ParameterDomainError);
  CHECK_THROWS_AS(sample(TruncatedGaussian{0.0, 1.0, 2.0, 1.0}, rng), ParameterDomainError);
  CHECK_THROWS_AS(log_pdf(Gaussian{0.0, -1.0}, 0.0), ParameterDomainError);
}

TEST_CASE("normal log-CDF and log-mass in the tails") {
  // Reference values from 40-digit arithmetic.
  CHECK(normal_log_cdf(-40.0) == doctest::Approx(-804.60844201375378817).epsilon(1e-13));
  CHECK(normal_log_cdf(-25.0) == doctest::Approx(-316.63940800802025894).epsilon(1e-13));
  CHECK(normal_log_cdf(-10.0) == doctest::Approx(-53.231285150512470578).epsilon(1e-13));
  CHECK(normal_log_cdf(-1.0) == doctest::Approx(-1.8410216450092635058).epsilon(1e-14));
  CHECK(normal_log_cdf(0.0) == doctest::Approx(-0.69314718055994530942).epsilon(1e-15));
  CHECK(normal_log_cdf(3.0) == doctest::Approx(-0.0013508099647481937988).epsilon(1e-13));
  CHECK(normal_log_cdf(10.0) == doctest::Approx(-7.6198530241605260704e-24).epsilon(1e-10));
  CHECK(normal_log_mass(8.0, 9.0) == doctest::Approx(-35.013618593437148117).epsilon(1e-12));
  CHECK(normal_log_mass(-38.0, -37.0) == doctest::Approx(-689.03058557689059365).epsilon(1e-12));
  CHECK(normal_log_mass(-kInf, kInf) == 0.0);
  CHECK(normal_log_mass(1.0, 1.0) == -kInf);
}
