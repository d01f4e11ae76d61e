#include "ssm/damper.hpp"

#include <cmath>
#include <string>

#include "ssm/errors.hpp"
#include "json_fields.hpp"

namespace ssm {
namespace {

double sign(double x) noexcept { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

void DamperConfig::validate() const {
  auto require = [](bool ok, const char* message) {
    if (!ok) throw ParameterDomainError(message);
  };
  require(Ts > 0.0 && std::isfinite(Ts), "Ts must be positive");
  require(mass > 0.0 && std::isfinite(mass), "mass must be positive");
  require(sigma_v >= 0.0 && std::isfinite(sigma_v), "sigma_v must be non-negative");
  require(sigma_e >= 0.0 && std::isfinite(sigma_e), "sigma_e must be non-negative");
  require(std::isfinite(s0) && std::isfinite(sdot0), "initial state must be finite");
  require(k >= 0.0 && std::isfinite(k), "k must be non-negative");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  require(f_c >= 0.0 && std::isfinite(f_c), "f_c must be non-negative");
  require(c_0 >= 0.0 && std::isfinite(c_0), "c_0 must be non-negative");
}

DamperConfig damper_config_from_json(const nlohmann::json& doc) {
  detail::check_keys(doc, {"Ts", "m", "T", "sigma_v", "sigma_e", "s0", "sdot0", "theta"}, "damper config");
  DamperConfig config;
  detail::read_field(doc, "Ts", config.Ts, "damper config");
  detail::read_field(doc, "m", config.mass, "damper config");
  detail::read_field(doc, "T", config.horizon, "damper config");
  detail::read_field(doc, "sigma_v", config.sigma_v, "damper config");
  detail::read_field(doc, "sigma_e", config.sigma_e, "damper config");
  detail::read_field(doc, "s0", config.s0, "damper config");
  detail::read_field(doc, "sdot0", config.sdot0, "damper config");
  if (doc.contains("theta")) {
    const auto& theta = doc.at("theta");
    detail::check_keys(theta, {"k", "p", "f_c", "c_0"}, "damper parameter");
    detail::read_field(theta, "k", config.k, "damper config");
    detail::read_field(theta, "p", config.p, "damper config");
    detail::read_field(theta, "f_c", config.f_c, "damper config");
    detail::read_field(theta, "c_0", config.c_0, "damper config");
  }
  config.validate();
  return config;
}

nlohmann::ordered_json to_json(const DamperConfig& config) {
  nlohmann::ordered_json doc;
  doc["Ts"] = config.Ts;
  doc["m"] = config.mass;
  doc["T"] = config.horizon;
  doc["sigma_v"] = config.sigma_v;
  doc["sigma_e"] = config.sigma_e;
  doc["s0"] = config.s0;
  doc["sdot0"] = config.sdot0;
  doc["theta"] = {{"k", config.k}, {"p", config.p}, {"f_c", config.f_c}, {"c_0", config.c_0}};
  return doc;
}

const std::shared_ptr<const ParamSchema>& damper_schema() {
  static const auto schema = std::make_shared<const ParamSchema>(std::vector<std::string>{"k", "p", "f_c", "c_0"});
  return schema;
}

ParamVector damper_true_theta(const DamperConfig& config) {
  return ParamVector(damper_schema(), {config.k, config.p, config.f_c, config.c_0});
}

std::array<double, 2> damper_transition(const DamperConfig& config, const ParamVector& theta,
                                        std::array<double, 2> x, double v) {
  const double k = theta[0];
  const double p = theta[1];
  const double f_c = theta[2];
  const double c_0 = theta[3];
  const auto [s, sdot] = x;
  const double force = -f_c * sign(sdot) - c_0 * sdot - k * sign(s) * std::pow(std::abs(s), p);
  return {s + config.Ts * sdot, sdot + (config.Ts / config.mass) * force + v};
}

double damper_observe_logpdf(const DamperConfig& config, double x1, double y) {
  return normal_log_pdf(y, x1, config.sigma_e);
}

IndependentPrior damper_priors() {
  return IndependentPrior(damper_schema(), {Gamma{4.0, 0.3}, Uniform{0.0, 1.0}, Gamma{2.0, 0.01}, Gamma{2.0, 1.0}});
}

ProposalSpec damper_proposal() {
  return ProposalSpec(damper_schema(), {WalkSpec{1e-2, 0.0, kInf}, WalkSpec{1e-2, 0.0, 1.0}, WalkSpec{1e-3, 0.0, kInf},
                                        WalkSpec{1e-2, 0.0, 1.0}});
}

DamperModel::DamperModel(DamperConfig config) : config_(config), prior_(damper_priors()) { config_.validate(); }

void DamperModel::sample_initial(const ParamVector&, RngStream&, std::span<double> x0) const {
  x0[0] = config_.s0;
  x0[1] = config_.sdot0;
}

void DamperModel::sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t,
                                    RngStream& rng, std::span<double> x_next) const {
  const double v = config_.sigma_v * rng.normal();
  const auto next = damper_transition(config_, theta, {x_prev[0], x_prev[1]}, v);
  x_next[0] = next[0];
  x_next[1] = next[1];
}

double DamperModel::log_obs_density(const ParamVector&, std::span<const double> x, std::span<const double> y,
                                    std::size_t) const {
  if (config_.sigma_e == 0.0) throw PreconditionError("the observation density needs sigma_e > 0");
  return damper_observe_logpdf(config_, x[0], y[0]);
}

void DamperModel::sample_observation(const ParamVector&, std::span<const double> x, std::size_t, RngStream& rng,
                                     std::span<double> y) const {
  y[0] = x[0] + config_.sigma_e * rng.normal();
}

void DamperModel::sample_transition_cond(const ParamVector& theta, std::span<const double> x_prev,
                                         std::span<const double>, std::size_t t, RngStream& rng,
                                         std::span<double> x_next) const {
  sample_transition(theta, x_prev, t, rng, x_next);
}

double DamperModel::log_predictive(const ParamVector&, std::span<const double> x_prev, std::span<const double> y,
                                   std::size_t) const {
  if (config_.sigma_e == 0.0) throw PreconditionError("the observation density needs sigma_e > 0");
  return damper_observe_logpdf(config_, x_prev[0] + config_.Ts * x_prev[1], y[0]);
}

Dataset simulate_damper(const DamperConfig& config, std::uint64_t seed) {
  const DamperModel model(config);
  return simulate(model, damper_true_theta(config), config.horizon, RngStream(seed));
}

}  // namespace ssm
