#ifndef SSM_KALMAN_HPP
#define SSM_KALMAN_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ssm/dataset.hpp"
#include "ssm/params.hpp"
#include "ssm/rng.hpp"

namespace ssm {

/// Mean and covariance of a Gaussian over the linear state.
struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Linear-Gaussian state-space model
///   x_0 ~ N(m0, P0),  x_t = A_t x_{t-1} + b_t + v_t,  y_t = C_t x_t + e_t,
/// with v_t ~ N(0, Q_t) and e_t ~ N(0, R_t).
///
/// Each time-varying member holds either a single entry (time-invariant) or
/// one entry per time step t = 1..T.
struct LgssParams {
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::MatrixXd> C;
  std::vector<Eigen::MatrixXd> R;
  Eigen::VectorXd m0;
  Eigen::MatrixXd P0;

  const Eigen::MatrixXd& A_at(std::size_t t) const { return at(A, t); }
  const Eigen::VectorXd& b_at(std::size_t t) const { return at(b, t); }
  const Eigen::MatrixXd& Q_at(std::size_t t) const { return at(Q, t); }
  const Eigen::MatrixXd& C_at(std::size_t t) const { return at(C, t); }
  const Eigen::MatrixXd& R_at(std::size_t t) const { return at(R, t); }

  std::size_t state_dim() const { return static_cast<std::size_t>(m0.size()); }

  /// Checks dimensions and symmetry/definiteness; throws PreconditionError.
  void validate(std::size_t horizon) const;

  /// Time-invariant parameters.
  static LgssParams constant(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::MatrixXd Q, Eigen::MatrixXd C,
                             Eigen::MatrixXd R, Eigen::VectorXd m0, Eigen::MatrixXd P0);

 private:
  template <class T>
  static const T& at(const std::vector<T>& v, std::size_t t) {
    return v.size() == 1 ? v.front() : v.at(t - 1);
  }
};

/// Models whose linear-Gaussian form is available; enables exact likelihoods.
class LinearGaussianForm {
 public:
  virtual ~LinearGaussianForm() = default;
  virtual LgssParams lgss_params(const ParamVector& theta) const = 0;
};

/// Symmetrizes `cov` and clips eigenvalues in [-1e-10, 0) to zero. Throws
/// ssm::Error when a more negative eigenvalue shows the matrix is not PSD.
void enforce_psd(Eigen::MatrixXd& cov);

GaussianBelief predict(const GaussianBelief& belief, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::MatrixXd& Q);

struct KalmanUpdate {
  GaussianBelief belief;
  /// log N(y; C mean, C cov C^T + R).
  double log_lik_increment;
};

/// Joseph-form measurement update. Throws SingularInnovationError when the
/// innovation covariance has condition number above 1e12.
KalmanUpdate update(const GaussianBelief& belief, const Eigen::MatrixXd& C, const Eigen::MatrixXd& R,
                    const Eigen::VectorXd& y);

/// Exact log p(y_{1:T}) by the predict/update recursion.
double log_likelihood(const LgssParams& params, const Dataset& data);

/// Symmetric square root of a PSD matrix (negative round-off eigenvalues clipped).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

/// Draw from N(mean, sqrt_cov * sqrt_cov^T).
Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& sqrt_cov, RngStream& rng);

}  // namespace ssm

#endif  // SSM_KALMAN_HPP
