#ifndef SSM_REFERENCE_MODELS_HPP
#define SSM_REFERENCE_MODELS_HPP

#include <memory>

#include <nlohmann/json.hpp>

#include "ssm/kalman.hpp"
#include "ssm/model.hpp"
#include "ssm/rbpf.hpp"

namespace ssm {

/// x_t = phi x_{t-1} + v_t,  y_t = x_t + e_t,  x_0 ~ N(m0, p0),
/// phi ~ U(phi_lo, phi_hi). The single parameter is "phi".
struct ScalarLgssConfig {
  double phi = 0.8;
  double sigma_v = 1.0;
  double sigma_e = 1.0;
  double m0 = 0.0;
  double p0 = 1.0;
  double phi_lo = -1.0;
  double phi_hi = 1.0;
  std::size_t horizon = 100;

  void validate() const;
};

ScalarLgssConfig scalar_lgss_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const ScalarLgssConfig& config);

class ScalarLgssModel final : public AdaptedSsmModel, public LinearGaussianForm {
 public:
  explicit ScalarLgssModel(ScalarLgssConfig config = {});

  const ScalarLgssConfig& config() const noexcept { return config_; }
  ParamVector true_theta() const;

  std::string_view name() const override { return "lgss"; }
  const std::shared_ptr<const ParamSchema>& schema() const override { return schema_; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }

  double log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;

  void sample_initial(const ParamVector& theta, RngStream& rng, std::span<double> x0) const override;
  void sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t t, RngStream& rng,
                         std::span<double> x_next) const override;
  double log_obs_density(const ParamVector& theta, std::span<const double> x, std::span<const double> y,
                         std::size_t t) const override;
  void sample_observation(const ParamVector& theta, std::span<const double> x, std::size_t t, RngStream& rng,
                          std::span<double> y) const override;

  void sample_transition_cond(const ParamVector& theta, std::span<const double> x_prev, std::span<const double> y,
                              std::size_t t, RngStream& rng, std::span<double> x_next) const override;
  double log_predictive(const ParamVector& theta, std::span<const double> x_prev, std::span<const double> y,
                        std::size_t t) const override;

  LgssParams lgss_params(const ParamVector& theta) const override;

 private:
  ScalarLgssConfig config_;
  std::shared_ptr<const ParamSchema> schema_;
};

/// Mixed linear/nonlinear scalar model:
///   x^n_t = atan(x^n_{t-1}) + x^l_{t-1} + v^n_t
///   x^l_t = a x^l_{t-1} + v^l_t
///   y_t   = (x^n_t)^2 / 20 + x^l_t + e_t
/// with x^n_0 ~ N(0, p0_n), x^l_0 ~ N(m0_l, p0_l) and a ~ U(-1, 1).
struct ClgDemoConfig {
  double a = 0.9;
  double sigma_n = 0.3;
  double sigma_l = 0.3;
  double sigma_e = 0.5;
  double p0_n = 1.0;
  double m0_l = 0.0;
  double p0_l = 1.0;
  std::size_t horizon = 100;

  void validate() const;
};

ClgDemoConfig clg_demo_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const ClgDemoConfig& config);

class ClgDemoModel final : public SsmModel, public ConditionallyLinearForm {
 public:
  explicit ClgDemoModel(ClgDemoConfig config = {});

  const ClgDemoConfig& config() const noexcept { return config_; }
  ParamVector true_theta() const;

  std::string_view name() const override { return "clg"; }
  const std::shared_ptr<const ParamSchema>& schema() const override { return schema_; }
  std::size_t state_dim() const override { return 2; }
  std::size_t obs_dim() const override { return 1; }

  double log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;

  void sample_initial(const ParamVector& theta, RngStream& rng, std::span<double> x0) const override;
  void sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t t, RngStream& rng,
                         std::span<double> x_next) const override;
  double log_obs_density(const ParamVector& theta, std::span<const double> x, std::span<const double> y,
                         std::size_t t) const override;
  void sample_observation(const ParamVector& theta, std::span<const double> x, std::size_t t, RngStream& rng,
                          std::span<double> y) const override;

  ClgModel clg_model(const ParamVector& theta) const override;

 private:
  ClgDemoConfig config_;
  std::shared_ptr<const ParamSchema> schema_;
};

}  // namespace ssm

#endif  // SSM_REFERENCE_MODELS_HPP
