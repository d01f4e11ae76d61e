#ifndef SSM_DAMPER_HPP
#define SSM_DAMPER_HPP

#include <array>
#include <cstdint>
#include <memory>

#include <nlohmann/json.hpp>

#include "ssm/dataset.hpp"
#include "ssm/kalman.hpp"
#include "ssm/model.hpp"
#include "ssm/pmh.hpp"

namespace ssm {

/// Mass with a nonlinear spring and a Coulomb plus viscous damper, forward
/// Euler at sampling time Ts. State (displacement, velocity); y = x1 + e.
/// Parameters in schema order: k, p, f_c, c_0.
struct DamperConfig {
  double Ts = 0.1;
  double mass = 8.0;
  std::size_t horizon = 1000;
  double sigma_v = 0.01;
  double sigma_e = 0.1;
  double s0 = 0.5;
  double sdot0 = 0.0;
  double k = 2.16;
  double p = 0.58;
  double f_c = 0.01;
  double c_0 = 0.71;

  /// Throws ParameterDomainError when an invariant fails.
  void validate() const;
};

/// Unknown keys raise ParseError; absent keys keep their defaults.
DamperConfig damper_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const DamperConfig& config);

const std::shared_ptr<const ParamSchema>& damper_schema();
ParamVector damper_true_theta(const DamperConfig& config);

/// One Euler step with the process-noise value `v` added to the velocity.
std::array<double, 2> damper_transition(const DamperConfig& config, const ParamVector& theta,
                                        std::array<double, 2> x, double v);
/// log N(y; x1, sigma_e^2).
double damper_observe_logpdf(const DamperConfig& config, double x1, double y);

IndependentPrior damper_priors();
ProposalSpec damper_proposal();

class DamperModel final : public AdaptedSsmModel {
 public:
  explicit DamperModel(DamperConfig config = {});

  const DamperConfig& config() const noexcept { return config_; }

  std::string_view name() const override { return "damper"; }
  const std::shared_ptr<const ParamSchema>& schema() const override { return damper_schema(); }
  std::size_t state_dim() const override { return 2; }
  std::size_t obs_dim() const override { return 1; }

  double log_prior(const ParamVector& theta) const override { return prior_.log_density(theta); }
  ParamVector sample_prior(RngStream& rng) const override { return prior_.sample(rng); }

  void sample_initial(const ParamVector& theta, RngStream& rng, std::span<double> x0) const override;
  void sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t t, RngStream& rng,
                         std::span<double> x_next) const override;
  double log_obs_density(const ParamVector& theta, std::span<const double> x, std::span<const double> y,
                         std::size_t t) const override;
  void sample_observation(const ParamVector& theta, std::span<const double> x, std::size_t t, RngStream& rng,
                          std::span<double> y) const override;

  // y_t depends on x_{t-1} only through the noise-free displacement update,
  // so the adapted transition equals the prior one.
  void sample_transition_cond(const ParamVector& theta, std::span<const double> x_prev, std::span<const double> y,
                              std::size_t t, RngStream& rng, std::span<double> x_next) const override;
  double log_predictive(const ParamVector& theta, std::span<const double> x_prev, std::span<const double> y,
                        std::size_t t) const override;

 private:
  DamperConfig config_;
  IndependentPrior prior_;
};

/// Simulates config.horizon steps at the configured true parameters.
Dataset simulate_damper(const DamperConfig& config, std::uint64_t seed);

}  // namespace ssm

#endif  // SSM_DAMPER_HPP
