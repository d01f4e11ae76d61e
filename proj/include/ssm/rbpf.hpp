#ifndef SSM_RBPF_HPP
#define SSM_RBPF_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ssm/dataset.hpp"
#include "ssm/kalman.hpp"
#include "ssm/model.hpp"
#include "ssm/resampling.hpp"
#include "ssm/smc.hpp"

namespace ssm {

/// Conditionally linear-Gaussian (mixed linear/nonlinear) model:
///
///   x^n_{t+1} = f_n(x^n_t) + A_n(x^n_t) x^l_t + v^n_t
///   x^l_{t+1} = f_l(x^n_t) + A_l(x^n_t) x^l_t + v^l_t
///   y_t       = g(x^n_t)   + C(x^n_t) x^l_t   + e_t
///
/// with (v^n, v^l) ~ N(0, [[Q_n, Q_nl], [Q_nl^T, Q_l]]) and e ~ N(0, R).
/// Q_nl defaults to zero. x^n_0 and x^l_0 are independent Gaussians; a zero
/// covariance for x^n_0 makes the initial nonlinear state deterministic.
struct ClgModel {
  using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using MatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  std::size_t dim_nonlinear = 0;
  std::size_t dim_linear = 0;
  std::size_t dim_obs = 0;
  VectorFn f_n;
  MatrixFn A_n;
  VectorFn f_l;
  MatrixFn A_l;
  VectorFn g;
  MatrixFn C;
  Eigen::MatrixXd Q_n;
  Eigen::MatrixXd Q_l;
  Eigen::MatrixXd Q_nl;
  Eigen::MatrixXd R;
  GaussianBelief initial_nonlinear;
  GaussianBelief initial_linear;

  /// Full process-noise covariance [[Q_n, Q_nl], [Q_nl^T, Q_l]].
  Eigen::MatrixXd joint_process_cov() const;
  /// Throws PreconditionError on inconsistent dimensions or covariances.
  void validate() const;
};

/// Models with a conditionally linear-Gaussian structure.
class ConditionallyLinearForm {
 public:
  virtual ~ConditionallyLinearForm() = default;
  virtual ClgModel clg_model(const ParamVector& theta) const = 0;
};

struct RbParticle {
  Eigen::VectorXd x_n;
  GaussianBelief belief;
};

struct RbpfResult {
  LogLikEstimate estimate;
  std::vector<RbParticle> particles;
};

/// Rao-Blackwellized particle filter: particles on x^n, one Kalman filter
/// over x^l per particle.
///
/// Each step: Kalman-update every belief with y_t and weight by the marginal
/// predictive density of y_t, resample, then propagate x^n from its
/// conditionally Gaussian transition and condition the linear belief on the
/// realized x^n_{t+1} jointly with the linear time update.
RbpfResult rbpf_loglik(const ClgModel& model, const Dataset& data, std::size_t particles, Resampler scheme,
                       RngStream rng);

/// The full-state model x = (x^n, x^l) of a CLG model, for running generic
/// particle filters on the same likelihood. It has no parameters.
class ClgJointModel final : public SsmModel {
 public:
  explicit ClgJointModel(ClgModel model);

  std::string_view name() const override { return "clg-joint"; }
  const std::shared_ptr<const ParamSchema>& schema() const override { return schema_; }
  std::size_t state_dim() const override { return model_.dim_nonlinear + model_.dim_linear; }
  std::size_t obs_dim() const override { return model_.dim_obs; }

  double log_prior(const ParamVector&) const override { return 0.0; }
  ParamVector sample_prior(RngStream&) const override { return ParamVector(schema_, {}); }

  void sample_initial(const ParamVector& theta, RngStream& rng, std::span<double> x0) const override;
  void sample_transition(const ParamVector& theta, std::span<const double> x_prev, std::size_t t, RngStream& rng,
                         std::span<double> x_next) const override;
  double log_obs_density(const ParamVector& theta, std::span<const double> x, std::span<const double> y,
                         std::size_t t) const override;
  void sample_observation(const ParamVector& theta, std::span<const double> x, std::size_t t, RngStream& rng,
                          std::span<double> y) const override;

 private:
  ClgModel model_;
  std::shared_ptr<const ParamSchema> schema_;
  Eigen::MatrixXd process_sqrt_;
  Eigen::MatrixXd initial_n_sqrt_;
  Eigen::MatrixXd initial_l_sqrt_;
  Eigen::MatrixXd obs_sqrt_;
  Eigen::LLT<Eigen::MatrixXd> obs_chol_;
  double obs_log_norm_;
};

}  // namespace ssm

#endif  // SSM_RBPF_HPP
