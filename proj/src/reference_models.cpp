#include "ssm/reference_models.hpp"

#include <cmath>

#include "ssm/errors.hpp"
#include "json_fields.hpp"

namespace ssm {
namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ParameterDomainError(message);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void ScalarLgssConfig::validate() const {
  require(std::isfinite(phi), "phi must be finite");
  require(positive(sigma_v), "sigma_v must be positive");
  require(positive(sigma_e), "sigma_e must be positive");
  require(std::isfinite(m0), "m0 must be finite");
  require(p0 >= 0.0 && std::isfinite(p0), "p0 must be non-negative");
  require(std::isfinite(phi_lo) && std::isfinite(phi_hi) && phi_lo < phi_hi, "phi prior bounds must satisfy lo < hi");
}

ScalarLgssConfig scalar_lgss_config_from_json(const nlohmann::json& doc) {
  detail::check_keys(doc, {"phi", "sigma_v", "sigma_e", "m0", "p0", "phi_lo", "phi_hi", "T"}, "lgss config");
  ScalarLgssConfig config;
  detail::read_field(doc, "phi", config.phi, "lgss config");
  detail::read_field(doc, "sigma_v", config.sigma_v, "lgss config");
  detail::read_field(doc, "sigma_e", config.sigma_e, "lgss config");
  detail::read_field(doc, "m0", config.m0, "lgss config");
  detail::read_field(doc, "p0", config.p0, "lgss config");
  detail::read_field(doc, "phi_lo", config.phi_lo, "lgss config");
  detail::read_field(doc, "phi_hi", config.phi_hi, "lgss config");
  detail::read_field(doc, "T", config.horizon, "lgss config");
  config.validate();
  return config;
}

nlohmann::ordered_json to_json(const ScalarLgssConfig& config) {
  nlohmann::ordered_json doc;
  doc["phi"] = config.phi;
  doc["sigma_v"] = config.sigma_v;
  doc["sigma_e"] = config.sigma_e;
  doc["m0"] = config.m0;
  doc["p0"] = config.p0;
  doc["phi_lo"] = config.phi_lo;
  doc["phi_hi"] = config.phi_hi;
  doc["T"] = config.horizon;
  return doc;
}

ScalarLgssModel::ScalarLgssModel(ScalarLgssConfig config)
    : config_(config), schema_(std::make_shared<const ParamSchema>(std::vector<std::string>{"phi"})) {
  config_.validate();
}

ParamVector ScalarLgssModel::true_theta() const { return ParamVector(schema_, {config_.phi}); }

double ScalarLgssModel::log_prior(const ParamVector& theta) const {
  return log_pdf(Uniform{config_.phi_lo, config_.phi_hi}, theta[0]);
}

ParamVector ScalarLgssModel::sample_prior(RngStream& rng) const {
  return ParamVector(schema_, {sample(Uniform{config_.phi_lo, config_.phi_hi}, rng)});
}

void ScalarLgssModel::sample_initial(const ParamVector&, RngStream& rng, std::span<double> x0) const {
  x0[0] = config_.m0 + std::sqrt(config_.p0) * rng.normal();
}

void ScalarLgssModel::sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t,
                                        RngStream& rng, std::span<double> x_next) const {
  x_next[0] = theta[0] * x_prev[0] + config_.sigma_v * rng.normal();
}

double ScalarLgssModel::log_obs_density(const ParamVector&, std::span<const double> x, std::span<const double> y,
                                        std::size_t) const {
  return normal_log_pdf(y[0], x[0], config_.sigma_e);
}

void ScalarLgssModel::sample_observation(const ParamVector&, std::span<const double> x, std::size_t, RngStream& rng,
                                         std::span<double> y) const {
  y[0] = x[0] + config_.sigma_e * rng.normal();
}

void ScalarLgssModel::sample_transition_cond(const ParamVector& theta, std::span<const double> x_prev,
                                             std::span<const double> y, std::size_t, RngStream& rng,
                                             std::span<double> x_next) const {
  const double q = config_.sigma_v * config_.sigma_v;
  const double r = config_.sigma_e * config_.sigma_e;
  const double prior_mean = theta[0] * x_prev[0];
  const double mean = prior_mean + q / (q + r) * (y[0] - prior_mean);
  x_next[0] = mean + std::sqrt(q * r / (q + r)) * rng.normal();
}

double ScalarLgssModel::log_predictive(const ParamVector& theta, std::span<const double> x_prev,
                                       std::span<const double> y, std::size_t) const {
  const double q = config_.sigma_v * config_.sigma_v;
  const double r = config_.sigma_e * config_.sigma_e;
  return normal_log_pdf(y[0], theta[0] * x_prev[0], std::sqrt(q + r));
}

LgssParams ScalarLgssModel::lgss_params(const ParamVector& theta) const {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  return LgssParams::constant(MatrixXd::Constant(1, 1, theta[0]), VectorXd::Zero(1),
                              MatrixXd::Constant(1, 1, config_.sigma_v * config_.sigma_v), MatrixXd::Ones(1, 1),
                              MatrixXd::Constant(1, 1, config_.sigma_e * config_.sigma_e),
                              VectorXd::Constant(1, config_.m0), MatrixXd::Constant(1, 1, config_.p0));
}

void ClgDemoConfig::validate() const {
  require(std::isfinite(a), "a must be finite");
  require(positive(sigma_n), "sigma_n must be positive");
  require(positive(sigma_l), "sigma_l must be positive");
  require(positive(sigma_e), "sigma_e must be positive");
  require(p0_n >= 0.0 && std::isfinite(p0_n), "p0_n must be non-negative");
  require(std::isfinite(m0_l), "m0_l must be finite");
  require(p0_l >= 0.0 && std::isfinite(p0_l), "p0_l must be non-negative");
}

ClgDemoConfig clg_demo_config_from_json(const nlohmann::json& doc) {
  detail::check_keys(doc, {"a", "sigma_n", "sigma_l", "sigma_e", "p0_n", "m0_l", "p0_l", "T"}, "clg config");
  ClgDemoConfig config;
  detail::read_field(doc, "a", config.a, "clg config");
  detail::read_field(doc, "sigma_n", config.sigma_n, "clg config");
  detail::read_field(doc, "sigma_l", config.sigma_l, "clg config");
  detail::read_field(doc, "sigma_e", config.sigma_e, "clg config");
  detail::read_field(doc, "p0_n", config.p0_n, "clg config");
  detail::read_field(doc, "m0_l", config.m0_l, "clg config");
  detail::read_field(doc, "p0_l", config.p0_l, "clg config");
  detail::read_field(doc, "T", config.horizon, "clg config");
  config.validate();
  return config;
}

nlohmann::ordered_json to_json(const ClgDemoConfig& config) {
  nlohmann::ordered_json doc;
  doc["a"] = config.a;
  doc["sigma_n"] = config.sigma_n;
  doc["sigma_l"] = config.sigma_l;
  doc["sigma_e"] = config.sigma_e;
  doc["p0_n"] = config.p0_n;
  doc["m0_l"] = config.m0_l;
  doc["p0_l"] = config.p0_l;
  doc["T"] = config.horizon;
  return doc;
}

ClgDemoModel::ClgDemoModel(ClgDemoConfig config)
    : config_(config), schema_(std::make_shared<const ParamSchema>(std::vector<std::string>{"a"})) {
  config_.validate();
}

ParamVector ClgDemoModel::true_theta() const { return ParamVector(schema_, {config_.a}); }

double ClgDemoModel::log_prior(const ParamVector& theta) const { return log_pdf(Uniform{-1.0, 1.0}, theta[0]); }

ParamVector ClgDemoModel::sample_prior(RngStream& rng) const {
  return ParamVector(schema_, {sample(Uniform{-1.0, 1.0}, rng)});
}

void ClgDemoModel::sample_initial(const ParamVector&, RngStream& rng, std::span<double> x0) const {
  x0[0] = std::sqrt(config_.p0_n) * rng.normal();
  x0[1] = config_.m0_l + std::sqrt(config_.p0_l) * rng.normal();
}

void ClgDemoModel::sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t,
                                     RngStream& rng, std::span<double> x_next) const {
  const double vn = config_.sigma_n * rng.normal();
  const double vl = config_.sigma_l * rng.normal();
  x_next[0] = std::atan(x_prev[0]) + x_prev[1] + vn;
  x_next[1] = theta[0] * x_prev[1] + vl;
}

double ClgDemoModel::log_obs_density(const ParamVector&, std::span<const double> x, std::span<const double> y,
                                     std::size_t) const {
  return normal_log_pdf(y[0], x[0] * x[0] / 20.0 + x[1], config_.sigma_e);
}

void ClgDemoModel::sample_observation(const ParamVector&, std::span<const double> x, std::size_t, RngStream& rng,
                                      std::span<double> y) const {
  y[0] = x[0] * x[0] / 20.0 + x[1] + config_.sigma_e * rng.normal();
}

ClgModel ClgDemoModel::clg_model(const ParamVector& theta) const {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const double a = theta[0];
  ClgModel m;
  m.dim_nonlinear = 1;
  m.dim_linear = 1;
  m.dim_obs = 1;
  m.f_n = [](const VectorXd& xn) { return VectorXd::Constant(1, std::atan(xn[0])); };
  m.A_n = [](const VectorXd&) { return MatrixXd::Ones(1, 1); };
  m.f_l = [](const VectorXd&) { return VectorXd::Zero(1); };
  m.A_l = [a](const VectorXd&) { return MatrixXd::Constant(1, 1, a); };
  m.g = [](const VectorXd& xn) { return VectorXd::Constant(1, xn[0] * xn[0] / 20.0); };
  m.C = [](const VectorXd&) { return MatrixXd::Ones(1, 1); };
  m.Q_n = MatrixXd::Constant(1, 1, config_.sigma_n * config_.sigma_n);
  m.Q_l = MatrixXd::Constant(1, 1, config_.sigma_l * config_.sigma_l);
  m.Q_nl = MatrixXd::Zero(1, 1);
  m.R = MatrixXd::Constant(1, 1, config_.sigma_e * config_.sigma_e);
  m.initial_nonlinear = {VectorXd::Zero(1), MatrixXd::Constant(1, 1, config_.p0_n)};
  m.initial_linear = {VectorXd::Constant(1, config_.m0_l), MatrixXd::Constant(1, 1, config_.p0_l)};
  return m;
}

}  // namespace ssm
