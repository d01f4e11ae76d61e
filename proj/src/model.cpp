#include "ssm/model.hpp"

#include <cmath>
#include <exception>

#include "ssm/errors.hpp"

namespace ssm {

IndependentPrior::IndependentPrior(std::shared_ptr<const ParamSchema> schema, std::vector<Distribution> marginals)
    : schema_(std::move(schema)), marginals_(std::move(marginals)) {
  if (marginals_.size() != schema_->size()) throw Error("prior must declare one marginal per parameter");
  for (const auto& d : marginals_) ssm::validate(d);
}

double IndependentPrior::log_density(const ParamVector& theta) const {
  double total = 0.0;
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    total += log_pdf(marginals_[i], theta[i]);
    if (total == -kInf) break;
  }
  return total;
}

ParamVector IndependentPrior::sample(RngStream& rng) const {
  std::vector<double> values(marginals_.size());
  for (std::size_t i = 0; i < marginals_.size(); ++i) values[i] = ssm::sample(marginals_[i], rng);
  return ParamVector(schema_, std::move(values));
}

namespace {

template <class F>
auto guarded(const char* capability, std::size_t t, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ModelFault&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelFault(capability, t, e.what());
  }
}

}  // namespace

ValidationReport validate(const SsmModel& model, const ParamVector& theta, std::size_t probe_count, RngStream rng,
                          std::size_t probe_horizon) {
  if (probe_count < 1) throw PreconditionError("validate requires probe_count >= 1");
  if (probe_horizon < 1) throw PreconditionError("validate requires probe_horizon >= 1");

  ValidationReport report;
  report.probes = probe_count;
  report.horizon = probe_horizon;
  report.state_dim = model.state_dim();
  report.obs_dim = model.obs_dim();

  const double lp = guarded("log_prior", 0, [&] { return model.log_prior(theta); });
  if (std::isnan(lp)) throw ModelFault("log_prior", 0, "returned NaN");
  if (lp == -kInf) {
    report.prior_support_ok = false;
    report.faults.push_back({"log_prior", 0, 0, "theta outside prior support"});
  }

  const std::size_t dx = model.state_dim();
  const std::size_t dy = model.obs_dim();
  std::vector<double> prev(dx), next(dx), y(dy);

  const auto check_state = [&](const std::vector<double>& x, const char* capability, std::size_t probe,
                               std::size_t t) {
    for (double v : x) {
      if (std::isnan(v)) {
        ++report.nan_count;
        report.faults.push_back({capability, probe, t, "state contains NaN"});
        return false;
      }
      if (std::isinf(v)) {
        ++report.inf_count;
        report.faults.push_back({capability, probe, t, "state contains infinity"});
        return false;
      }
    }
    return true;
  };

  for (std::size_t probe = 0; probe < probe_count; ++probe) {
    RngStream probe_rng = rng.child(probe);
    RngStream init_rng = probe_rng.child(0);
    guarded("sample_initial", 0, [&] { model.sample_initial(theta, init_rng, prev); });
    if (!check_state(prev, "sample_initial", probe, 0)) continue;

    for (std::size_t t = 1; t <= probe_horizon; ++t) {
      RngStream step_rng = probe_rng.child(t);
      RngStream transition_rng = step_rng.child(0);
      RngStream obs_rng = step_rng.child(1);
      guarded("sample_transition", t, [&] { model.sample_transition(theta, prev, t, transition_rng, next); });
      if (!check_state(next, "sample_transition", probe, t)) break;
      guarded("sample_observation", t, [&] { model.sample_observation(theta, next, t, obs_rng, y); });
      for (double v : y) {
        if (!std::isfinite(v)) {
          std::isnan(v) ? ++report.nan_count : ++report.inf_count;
          report.faults.push_back({"sample_observation", probe, t, "non-finite observation"});
          break;
        }
      }
      const double ll = guarded("log_obs_density", t, [&] { return model.log_obs_density(theta, next, y, t); });
      if (std::isnan(ll)) throw ModelFault("log_obs_density", t, "returned NaN");
      if (ll == kInf) {
        ++report.inf_count;
        report.faults.push_back({"log_obs_density", probe, t, "returned +infinity"});
      }
      std::swap(prev, next);
    }
  }
  return report;
}

Dataset simulate(const SsmModel& model, const ParamVector& theta, std::size_t horizon, RngStream rng) {
  if (horizon < 1) throw PreconditionError("simulation horizon must be >= 1");
  const std::size_t dx = model.state_dim();
  const std::size_t dy = model.obs_dim();
  std::vector<double> states((horizon + 1) * dx);
  std::vector<double> observations(horizon * dy);

  RngStream init_rng = rng.child(0);
  model.sample_initial(theta, init_rng, std::span<double>(states.data(), dx));
  for (std::size_t t = 1; t <= horizon; ++t) {
    RngStream step_rng = rng.child(t);
    RngStream transition_rng = step_rng.child(0);
    RngStream obs_rng = step_rng.child(1);
    std::span<const double> prev(states.data() + (t - 1) * dx, dx);
    std::span<double> next(states.data() + t * dx, dx);
    model.sample_transition(theta, prev, t, transition_rng, next);
    model.sample_observation(theta, next, t, obs_rng, std::span<double>(observations.data() + (t - 1) * dy, dy));
  }

  Dataset data(dy, std::move(observations));
  data.set_truth(dx, std::move(states));
  data.set_theta_true(theta);
  return data;
}

}  // namespace ssm
