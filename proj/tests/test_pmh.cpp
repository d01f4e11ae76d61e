#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "ssm/damper.hpp"
#include "ssm/errors.hpp"
#include "ssm/pmh.hpp"
#include "ssm/reference_models.hpp"
#include "lgss_grid.hpp"
#include "support.hpp"

using namespace ssm;

namespace {

std::shared_ptr<const ParamSchema> scalar_schema() { return std::make_shared<const ParamSchema>(std::vector<std::string>{"a"}); }

ParamVector scalar(double v) { return ParamVector(scalar_schema(), {v}); }

// Mass of N(center, 1) over [0, inf), by quadrature.
double half_line_mass(double center) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([center](double x) {
    return std::exp(-0.5 * (x - center) * (x - center)) / std::sqrt(2.0 * std::numbers::pi);
  });
}

Chain manual_chain(const std::vector<double>& values, const std::vector<bool>& accepted) {
  Chain chain;
  for (std::size_t m = 0; m < values.size(); ++m) chain.records.push_back({m, scalar(values[m]), -1.0, 1.0, accepted[m]});
  return chain;
}

ScalarLgssModel small_lgss() {
  ScalarLgssConfig cfg;
  cfg.horizon = 50;
  return ScalarLgssModel(cfg);
}

ProposalSpec lgss_walk(const ScalarLgssModel& model, double stddev) {
  return ProposalSpec(model.schema(), {WalkSpec{stddev, -1.0, 1.0}});
}

}  // namespace

TEST_CASE("log_q_ratio on a half-line walk matches the truncation masses") {
  const ProposalSpec spec(scalar_schema(), {WalkSpec{1.0, 0.0, kInf}});
  const double expected = 0.24755859482637005;  // log Phi(0.5) - log Phi(0.1)
  CHECK(log_q_ratio(spec, scalar(0.5), scalar(0.1)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::log(half_line_mass(0.5)) - std::log(half_line_mass(0.1)) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(log_q_ratio(spec, scalar(0.1), scalar(0.5)) == doctest::Approx(-expected).epsilon(1e-12));
}

TEST_CASE("untruncated walks have a zero Hastings term") {
  const ProposalSpec spec(scalar_schema(), {WalkSpec{0.3}});
  RngStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Proposal p = propose(spec, scalar(0.2), rng);
    CHECK(p.log_q_ratio == 0.0);
  }
}

TEST_CASE("bounds far from the current point contribute almost nothing") {
  const ProposalSpec spec(scalar_schema(), {WalkSpec{0.01, 0.0, 1.0}});
  RngStream rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Proposal p = propose(spec, scalar(0.5), rng);
    CHECK(std::abs(p.log_q_ratio) < 1e-10);
    CHECK(p.theta[0] >= 0.0);
    CHECK(p.theta[0] <= 1.0);
  }
}

TEST_CASE("proposals respect the bounds and reject out-of-bounds input") {
  const ProposalSpec spec(scalar_schema(), {WalkSpec{1.0, 0.0, 1.0}});
  RngStream rng(13);
  for (int i = 0; i < 10000; ++i) {
    const Proposal p = propose(spec, scalar(0.02), rng);
    REQUIRE(p.theta[0] >= 0.0);
    REQUIRE(p.theta[0] <= 1.0);
  }
  CHECK_THROWS_AS(propose(spec, scalar(1.5), rng), PreconditionError);
  CHECK_THROWS_AS(ProposalSpec(scalar_schema(), {WalkSpec{0.0}}), ParameterDomainError);
  CHECK_THROWS_AS(ProposalSpec(scalar_schema(), {WalkSpec{1.0, 1.0, 0.0}}), ParameterDomainError);
  CHECK_THROWS_AS(ProposalSpec(scalar_schema(), {}), PreconditionError);
}

TEST_CASE("acceptance examples") {
  RngStream rng(21);
  for (int i = 0; i < 1000; ++i) {
    const AcceptDecision d = accept_step(0.0, 0.0, 0.0, 0.0, 0.0, rng);
    CHECK(d.accepted);
    CHECK(d.alpha == 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(accept_step(-kInf, 0.0, -3.0, 0.0, 0.0, rng).accepted);
    CHECK_FALSE(accept_step(5.0, -kInf, -3.0, 0.0, 0.0, rng).accepted);
  }
  CHECK(acceptance_probability(-kInf, 0.0, -3.0, 0.0, 0.0) == 0.0);
  CHECK(acceptance_probability(100.0, 0.0, -3.0, 0.0, 0.0) == 1.0);
}

TEST_CASE("acceptance frequency at log ratio ln 0.5") {
  RngStream rng(22);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += accept_step(std::log(0.5), 0.0, 0.0, 0.0, 0.0, rng).accepted ? 1 : 0;
  const double rate = static_cast<double>(hits) / n;
  CHECK(std::abs(rate - 0.5) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("log-domain acceptance agrees with the direct ratio") {
  RngStream rng(23);
  for (int i = 0; i < 1000; ++i) {
    const double zn = std::exp(rng.uniform() * 4.0 - 2.0);
    const double pn = std::exp(rng.uniform() * 4.0 - 2.0);
    const double z = std::exp(rng.uniform() * 4.0 - 2.0);
    const double p = std::exp(rng.uniform() * 4.0 - 2.0);
    const double q = std::exp(rng.uniform() * 2.0 - 1.0);
    const double direct = std::min(1.0, zn * pn * q / (z * p));
    const double logged = acceptance_probability(std::log(zn), std::log(pn), std::log(z), std::log(p), std::log(q));
    CHECK(std::abs(direct - logged) < 1e-12);
  }
}

TEST_CASE("acceptance probability is monotone in the proposed estimate") {
  double previous = 0.0;
  for (double lz = -50.0; lz <= 10.0; lz += 0.25) {
    const double alpha = acceptance_probability(lz, -1.0, -2.0, -1.0, 0.1);
    CHECK(alpha >= previous);
    previous = alpha;
  }
  CHECK(previous == 1.0);
}

TEST_CASE("rejected iterations carry the held pair forward untouched") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 50, RngStream(5));
  PmhOptions options;
  options.iterations = 1000;
  options.particles = 20;
  options.seed = 99;
  options.theta0 = model.true_theta();
  const Chain chain = run_pmh(model, data, lgss_walk(model, 0.2), options);

  REQUIRE(chain.records.size() == 1001);
  CHECK(chain.records[0].m == 0);
  CHECK(chain.records[0].accepted);
  CHECK(chain.records[0].alpha == 1.0);
  CHECK(chain.records[0].theta == model.true_theta());

  std::size_t rejected = 0;
  std::size_t accepted = 0;
  for (std::size_t m = 1; m < chain.records.size(); ++m) {
    const ChainRecord& r = chain.records[m];
    CHECK(r.m == m);
    if (r.accepted) {
      ++accepted;
      // A fresh filter run on the same stream reproduces the stored estimate.
      const double fresh =
          bootstrap_pf(model, r.theta, data, options.particles, options.resampler, RngStream(99).child(m).child(1))
              .estimate.log_z;
      CHECK(fresh == r.log_z);
    } else {
      ++rejected;
      CHECK(r.theta == chain.records[m - 1].theta);
      CHECK(std::bit_cast<std::uint64_t>(r.log_z) == std::bit_cast<std::uint64_t>(chain.records[m - 1].log_z));
    }
  }
  CHECK(rejected > 0);
  CHECK(accepted > 0);
}

TEST_CASE("a vanishing step keeps the chain at its start") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 50, RngStream(6));
  PmhOptions options;
  options.iterations = 200;
  options.particles = 20;
  options.theta0 = model.true_theta();
  const Chain chain = run_pmh(model, data, lgss_walk(model, 1e-12), options);
  for (const auto& r : chain.records) CHECK(std::abs(r.theta[0] - 0.8) < 1e-6);
}

TEST_CASE("chains replay from the seed") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 50, RngStream(7));
  PmhOptions options;
  options.iterations = 100;
  options.particles = 16;
  options.seed = 3;
  const Chain a = run_pmh(model, data, lgss_walk(model, 0.1), options);
  const Chain b = run_pmh(model, data, lgss_walk(model, 0.1), options);
  std::ostringstream sa, sb;
  write_chain_csv(sa, a);
  write_chain_csv(sb, b);
  CHECK(sa.str() == sb.str());
  options.seed = 4;
  const Chain c = run_pmh(model, data, lgss_walk(model, 0.1), options);
  std::ostringstream sc;
  write_chain_csv(sc, c);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("default initialization draws from the prior inside the bounds") {
  const DamperModel model;
  const ProposalSpec spec = damper_proposal();
  for (std::uint64_t s = 0; s < 200; ++s) {
    const ParamVector theta = draw_initial_theta(model, spec, RngStream(s));
    CHECK(spec.within_bounds(theta));
    CHECK(std::isfinite(model.log_prior(theta)));
  }
}

TEST_CASE("PMH input validation") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 20, RngStream(8));
  const ProposalSpec spec = lgss_walk(model, 0.1);
  PmhOptions options;
  options.iterations = 0;
  CHECK_THROWS_AS(run_pmh(model, data, spec, options), PreconditionError);
  options.iterations = 5;
  options.particles = 0;
  CHECK_THROWS_AS(run_pmh(model, data, spec, options), PreconditionError);
  options.particles = 8;
  options.theta0 = ParamVector(model.schema(), {1.5});
  CHECK_THROWS_AS(run_pmh(model, data, spec, options), PreconditionError);
  options.theta0.reset();
  options.method = Method::vanilla;
  CHECK_THROWS_AS(run_pmh(model, data, spec, options), CapabilityError);

  const ClgDemoModel clg;
  const Dataset clg_data = simulate(clg, clg.true_theta(), 10, RngStream(9));
  PmhOptions apf;
  apf.iterations = 5;
  apf.method = Method::apf;
  CHECK_THROWS_AS(run_pmh(clg, clg_data, ProposalSpec(clg.schema(), {WalkSpec{0.1, -1.0, 1.0}}), apf),
                  CapabilityError);
  CHECK_THROWS_AS(run_pmh(model, data, damper_proposal(), options), PreconditionError);
}

TEST_CASE("apf-driven chains run and store no trajectories") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 30, RngStream(10));
  PmhOptions options;
  options.iterations = 50;
  options.particles = 16;
  options.method = Method::apf;
  const Chain chain = run_pmh(model, data, lgss_walk(model, 0.1), options);
  CHECK(chain.records.size() == 51);
  CHECK(chain.trajectories.empty());
  options.store_trajectories = true;
  CHECK_THROWS_AS(run_pmh(model, data, lgss_walk(model, 0.1), options), PreconditionError);
}

TEST_CASE("stored trajectories follow the accepted iterations") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 30, RngStream(11));
  PmhOptions options;
  options.iterations = 100;
  options.particles = 32;
  options.store_trajectories = true;
  std::size_t callbacks = 0;
  options.on_record = [&](const ChainRecord&) { ++callbacks; };
  const Chain chain = run_pmh(model, data, lgss_walk(model, 0.1), options);
  CHECK(callbacks == 101);
  std::size_t accepted = 0;
  for (const auto& r : chain.records) accepted += r.accepted ? 1 : 0;
  CHECK(chain.trajectories.size() == accepted);
  for (const auto& traj : chain.trajectories) {
    CHECK(chain.records[traj.m].accepted);
    CHECK(traj.states.size() == 31);
  }
}

TEST_CASE("diagnostics of an all-rejected chain") {
  std::vector<double> values(11, 0.25);
  std::vector<bool> accepted(11, false);
  accepted[0] = true;
  const ChainDiagnostics d = diagnostics(manual_chain(values, accepted), 1, 5);
  CHECK(d.acceptance_rate == 0.0);
  CHECK(d.iterations == 10);
  CHECK(d.kept == 10);
  REQUIRE(d.params.size() == 1);
  CHECK(d.params[0].mean == 0.25);
  CHECK(d.params[0].stddev == 0.0);
  for (double q : d.params[0].quantiles) CHECK(q == 0.25);
  CHECK(d.params[0].hist.counts[0] == 10);
}

TEST_CASE("diagnostics of an alternating chain") {
  std::vector<double> values;
  std::vector<bool> accepted;
  for (int m = 0; m <= 100; ++m) {
    values.push_back(m % 2 == 0 ? 0.0 : 1.0);
    accepted.push_back(true);
  }
  for (int m = 2; m <= 100; m += 2) accepted[m] = false;
  Chain chain = manual_chain(values, accepted);
  const ChainDiagnostics d = diagnostics(chain, 0, 2);
  CHECK(d.acceptance_rate == 0.5);
  CHECK(d.params[0].mean == doctest::Approx(50.0 / 101.0).epsilon(1e-15));
  CHECK(d.params[0].quantiles[2] == 0.0);
  CHECK(d.params[0].hist.counts[0] == 51);
  CHECK(d.params[0].hist.counts[1] == 50);
  CHECK(d.params[0].hist.edges.front() == 0.0);
  CHECK(d.params[0].hist.edges.back() == 1.0);
  CHECK_THROWS_AS(diagnostics(chain, 101), PreconditionError);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == 2.5);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("expectation of constant and identity") {
  Chain chain = manual_chain({1.0, 2.0, 3.0, 4.0, 5.0}, {true, true, true, true, true});
  CHECK(expectation(chain, [](const ParamVector&) { return 7.0; }, 0) == 7.0);
  CHECK(expectation(chain, [](const ParamVector& t) { return t[0]; }, 0) == 3.0);
  CHECK(expectation(chain, [](const ParamVector& t) { return t[0]; }, 2) == 4.0);
  CHECK_THROWS_AS(expectation(chain, [](const ParamVector&) { return 0.0; }, 5), PreconditionError);
}

TEST_CASE("chain CSV and summary JSON layout") {
  Chain chain = manual_chain({0.5, 0.25}, {true, false});
  chain.records[1].alpha = 0.125;
  std::ostringstream out;
  write_chain_csv(out, chain);
  CHECK(out.str() == "m,a,log_z,alpha,accepted\n0,0.5,-1,1,1\n1,0.25,-1,0.125,0\n");

  const auto doc = to_json(diagnostics(chain, 0, 4));
  CHECK(doc["acceptance_rate"] == 0.0);
  CHECK(doc["parameters"]["a"]["quantiles"].contains("2.5"));
  CHECK(doc["parameters"]["a"]["quantiles"].contains("97.5"));
  CHECK(doc["parameters"]["a"]["histogram"]["counts"].size() == 4);
  CHECK(doc["parameters"]["a"]["histogram"]["edges"].size() == 5);
}

TEST_CASE("LGSS chain matches the grid posterior") {
  const ScalarLgssModel model = small_lgss();
  const Dataset data = simulate(model, model.true_theta(), 50, RngStream(2024));
  const testing::LgssGridPosterior grid(model, data, 2000);

  PmhOptions options;
  options.iterations = 5000;
  options.particles = 100;
  options.seed = 17;
  const Chain chain = run_pmh(model, data, lgss_walk(model, 0.1), options);
  const std::size_t burn = default_burn_in(chain);

  std::vector<double> phi;
  for (std::size_t m = burn; m < chain.records.size(); ++m) phi.push_back(chain.records[m].theta[0]);
  std::sort(phi.begin(), phi.end());

  const double tail = expectation(chain, [](const ParamVector& t) { return t[0] > 0.8 ? 1.0 : 0.0; }, burn);
  CHECK(std::abs(tail - (1.0 - grid.cdf(0.8))) < 0.05);
  CHECK(std::abs(quantile(phi, 0.5) - grid.quantile(0.5)) < 0.02);
  CHECK(std::abs(quantile(phi, 0.25) - grid.quantile(0.25)) < 0.03);
  CHECK(std::abs(quantile(phi, 0.75) - grid.quantile(0.75)) < 0.03);
  CHECK(std::abs(expectation(chain, [](const ParamVector& t) { return t[0]; }, burn) - grid.mean()) < 0.02);
}
