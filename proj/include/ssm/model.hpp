#ifndef SSM_MODEL_HPP
#define SSM_MODEL_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssm/dataset.hpp"
#include "ssm/distributions.hpp"
#include "ssm/params.hpp"
#include "ssm/rng.hpp"

namespace ssm {

/// Nonlinear state-space model p(theta), p(x0|theta), p(x_t|x_{t-1},theta),
/// p(y_t|x_t,theta).
///
/// The transition is only ever sampled; the observation density is evaluated
/// point-wise. States and observations are passed as spans of length
/// state_dim() / obs_dim(). Time indices are explicit so time-inhomogeneous
/// models fit the contract. Implementations are immutable after construction.
class SsmModel {
 public:
  virtual ~SsmModel() = default;

  virtual std::string_view name() const = 0;
  virtual const std::shared_ptr<const ParamSchema>& schema() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t obs_dim() const = 0;

  virtual double log_prior(const ParamVector& theta) const = 0;
  virtual ParamVector sample_prior(RngStream& rng) const = 0;

  virtual void sample_initial(const ParamVector& theta, RngStream& rng, std::span<double> x0) const = 0;
  virtual void sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t t,
                                 RngStream& rng, std::span<double> x_next) const = 0;
  /// Finite or -inf; never NaN.
  virtual double log_obs_density(const ParamVector& theta, std::span<const double> x, std::span<const double> y,
                                 std::size_t t) const = 0;
  /// Draws y_t ~ p(y_t|x_t); used by the simulator and model validation.
  virtual void sample_observation(const ParamVector& theta, std::span<const double> x, std::size_t t,
                                  RngStream& rng, std::span<double> y) const = 0;
};

/// Model whose dynamics conditioned on the current observation are available
/// in closed form, enabling the fully adapted auxiliary particle filter.
class AdaptedSsmModel : public SsmModel {
 public:
  /// Draws x_t ~ p(x_t | x_{t-1}, y_t).
  virtual void sample_transition_cond(const ParamVector& theta, std::span<const double> x_prev,
                                      std::span<const double> y, std::size_t t, RngStream& rng,
                                      std::span<double> x_next) const = 0;
  /// log p(y_t | x_{t-1}).
  virtual double log_predictive(const ParamVector& theta, std::span<const double> x_prev,
                                std::span<const double> y, std::size_t t) const = 0;
};

/// Product of independent scalar priors, aligned with a schema.
class IndependentPrior {
 public:
  IndependentPrior(std::shared_ptr<const ParamSchema> schema, std::vector<Distribution> marginals);

  const std::vector<Distribution>& marginals() const noexcept { return marginals_; }
  const Distribution& marginal(std::string_view name) const { return marginals_[schema_->index_of(name)]; }

  double log_density(const ParamVector& theta) const;
  ParamVector sample(RngStream& rng) const;

 private:
  std::shared_ptr<const ParamSchema> schema_;
  std::vector<Distribution> marginals_;
};

struct ValidationFault {
  std::string capability;
  std::size_t probe = 0;
  std::size_t time_index = 0;
  std::string message;
};

struct ValidationReport {
  std::size_t probes = 0;
  std::size_t horizon = 0;
  std::size_t state_dim = 0;
  std::size_t obs_dim = 0;
  bool prior_support_ok = true;
  std::size_t nan_count = 0;
  std::size_t inf_count = 0;
  std::vector<ValidationFault> faults;

  bool ok() const noexcept { return faults.empty(); }
};

/// Runs `probe_count` simulations of length `probe_horizon` at theta and
/// checks every capability's output.
///
/// A NaN observation density, or a capability that throws, raises ModelFault
/// carrying the capability name and time index. Non-finite states and prior
/// support violations are collected in the report.
ValidationReport validate(const SsmModel& model, const ParamVector& theta, std::size_t probe_count, RngStream rng,
                          std::size_t probe_horizon = 50);

/// Simulates x_{0:T} and y_{1:T}. The result carries the truth and theta.
Dataset simulate(const SsmModel& model, const ParamVector& theta, std::size_t horizon, RngStream rng);

}  // namespace ssm

#endif  // SSM_MODEL_HPP
