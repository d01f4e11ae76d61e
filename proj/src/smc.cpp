#include "ssm/smc.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

std::span<double> row(std::vector<double>& buffer, std::size_t i, std::size_t dim) {
  return {buffer.data() + i * dim, dim};
}

double checked_log_density(double value, const char* capability, std::size_t t) {
  if (std::isnan(value)) throw ModelFault(capability, t, "returned NaN");
  if (value == kInf) throw ModelFault(capability, t, "returned +infinity");
  return value;
}

void check_inputs(const SsmModel& model, const Dataset& data, std::size_t particles) {
  if (particles < 1) throw PreconditionError("particle count must be >= 1");
  if (data.obs_dim() != model.obs_dim()) {
    throw PreconditionError("dataset observation dimension " + std::to_string(data.obs_dim()) +
                            " does not match model dimension " + std::to_string(model.obs_dim()));
  }
}

void sample_initial_states(const SsmModel& model, const ParamVector& theta, const RngStream& rng,
                           std::size_t particles, std::vector<double>& states) {
  const std::size_t dim = model.state_dim();
  const RngStream step = rng.child(0);
  for (std::size_t n = 0; n < particles; ++n) {
    RngStream draw = step.child(n);
    model.sample_initial(theta, draw, row(states, n, dim));
  }
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::vanilla:
      return "vanilla";
    case Method::bootstrap:
      return "pf";
    case Method::apf:
      return "apf";
    case Method::rbpf:
      return "rbpf";
    case Method::kalman:
      return "kalman";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "vanilla") return Method::vanilla;
  if (name == "pf" || name == "bootstrap") return Method::bootstrap;
  if (name == "apf") return Method::apf;
  if (name == "rbpf") return Method::rbpf;
  if (name == "kalman") return Method::kalman;
  throw Error("unknown method '" + std::string(name) + "'");
}

ParticleSystem::ParticleSystem(std::size_t particles, std::size_t state_dim, std::size_t horizon)
    : particles_(particles),
      state_dim_(state_dim),
      horizon_(horizon),
      states_((horizon + 1) * particles * state_dim),
      log_weights_(horizon * particles),
      ancestors_(horizon * particles) {}

std::vector<double> ParticleSystem::trajectory(std::size_t final_index) const {
  if (final_index >= particles_) throw PreconditionError("particle index out of range");
  std::vector<double> out((horizon_ + 1) * state_dim_);
  std::size_t index = final_index;
  for (std::size_t t = horizon_ + 1; t-- > 0;) {
    const auto x = particles(t).subspan(index * state_dim_, state_dim_);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(t * state_dim_));
    if (t > 0) index = ancestors(t)[index];
  }
  return out;
}

std::vector<double> ParticleSystem::sample_trajectory(RngStream& rng) const {
  const auto weights = normalize(log_weights(horizon_)).weights;
  // A single multinomial draw over the final weights.
  double u = rng.uniform();
  std::size_t index = 0;
  while (index + 1 < weights.size() && !(u < weights[index])) {
    u -= weights[index];
    ++index;
  }
  return trajectory(index);
}

LogLikEstimate vanilla_mc_loglik(const SsmModel& model, const ParamVector& theta, const Dataset& data,
                                 std::size_t particles, RngStream rng) {
  check_inputs(model, data, particles);
  const std::size_t dim = model.state_dim();
  const std::size_t horizon = data.horizon();

  std::vector<double> current(particles * dim), next(particles * dim);
  std::vector<double> log_h(particles, 0.0);
  sample_initial_states(model, theta, rng, particles, current);

  for (std::size_t t = 1; t <= horizon; ++t) {
    const RngStream step = rng.child(t);
    const auto y = data.y(t);
    for (std::size_t n = 0; n < particles; ++n) {
      RngStream draw = step.child(n);
      model.sample_transition(theta, row(current, n, dim), t, draw, row(next, n, dim));
      log_h[n] += checked_log_density(model.log_obs_density(theta, row(next, n, dim), y, t), "log_obs_density", t);
    }
    std::swap(current, next);
  }
  const double log_z = log_sum_exp(log_h) - std::log(static_cast<double>(particles));
  return {log_z, Method::vanilla, particles, horizon};
}

FilterResult bootstrap_pf(const SsmModel& model, const ParamVector& theta, const Dataset& data,
                          std::size_t particles, Resampler scheme, RngStream rng, bool keep_history) {
  check_inputs(model, data, particles);
  const std::size_t dim = model.state_dim();
  const std::size_t horizon = data.horizon();
  const RngStream resample_root = rng.child(kResamplePath);

  std::vector<double> current(particles * dim), next(particles * dim);
  std::vector<double> log_w(particles), weights(particles);
  std::vector<std::size_t> ancestors(particles);
  std::iota(ancestors.begin(), ancestors.end(), std::size_t{0});

  std::optional<ParticleSystem> history;
  if (keep_history) history.emplace(particles, dim, horizon);

  sample_initial_states(model, theta, rng, particles, current);
  if (history) std::copy(current.begin(), current.end(), history->particles(0).begin());

  FilterResult result{{0.0, Method::bootstrap, particles, horizon}, std::nullopt};
  for (std::size_t t = 1; t <= horizon; ++t) {
    if (t > 1) {
      RngStream draw = resample_root.child(t);
      resample(scheme, weights, draw, ancestors);
    }
    const RngStream step = rng.child(t);
    const auto y = data.y(t);
    for (std::size_t n = 0; n < particles; ++n) {
      RngStream draw = step.child(n);
      model.sample_transition(theta, row(current, ancestors[n], dim), t, draw, row(next, n, dim));
      log_w[n] = checked_log_density(model.log_obs_density(theta, row(next, n, dim), y, t), "log_obs_density", t);
    }
    try {
      result.estimate.log_z += normalize_into(log_w, weights);
    } catch (const DegenerateWeightsError&) {
      result.estimate.log_z = -kInf;
      return result;
    }
    if (history) {
      std::copy(next.begin(), next.end(), history->particles(t).begin());
      std::copy(log_w.begin(), log_w.end(), history->log_weights(t).begin());
      std::copy(ancestors.begin(), ancestors.end(), history->ancestors(t).begin());
    }
    std::swap(current, next);
  }
  result.history = std::move(history);
  return result;
}

LogLikEstimate fully_adapted_apf(const AdaptedSsmModel& model, const ParamVector& theta, const Dataset& data,
                                 std::size_t particles, Resampler scheme, RngStream rng) {
  check_inputs(model, data, particles);
  const std::size_t dim = model.state_dim();
  const std::size_t horizon = data.horizon();
  const RngStream resample_root = rng.child(kResamplePath);

  std::vector<double> current(particles * dim), next(particles * dim);
  std::vector<double> log_nu(particles), weights(particles);
  std::vector<std::size_t> ancestors(particles);

  sample_initial_states(model, theta, rng, particles, current);

  LogLikEstimate estimate{0.0, Method::apf, particles, horizon};
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto y = data.y(t);
    for (std::size_t n = 0; n < particles; ++n) {
      log_nu[n] = checked_log_density(model.log_predictive(theta, row(current, n, dim), y, t), "log_predictive", t);
    }
    try {
      estimate.log_z += normalize_into(log_nu, weights);
    } catch (const DegenerateWeightsError&) {
      estimate.log_z = -kInf;
      return estimate;
    }
    RngStream resample_draw = resample_root.child(t);
    resample(scheme, weights, resample_draw, ancestors);
    const RngStream step = rng.child(t);
    for (std::size_t n = 0; n < particles; ++n) {
      RngStream draw = step.child(n);
      model.sample_transition_cond(theta, row(current, ancestors[n], dim), y, t, draw, row(next, n, dim));
    }
    std::swap(current, next);
  }
  return estimate;
}

}  // namespace ssm
