#include "ssm/rbpf.hpp"

#include <cmath>
#include <numbers>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void require(bool condition, const char* message) {
  if (!condition) throw PreconditionError(message);
}

Eigen::Map<const VectorXd> as_vector(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

// Pseudo-inverse and square root of a PSD matrix from one eigendecomposition.
struct PsdFactors {
  MatrixXd sqrt;
  MatrixXd pinv;
};

PsdFactors psd_factors(const MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const VectorXd& values = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  VectorXd root(values.size()), inverse(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const bool positive = values[i] > cutoff;
    root[i] = positive ? std::sqrt(values[i]) : 0.0;
    inverse[i] = positive ? 1.0 / values[i] : 0.0;
  }
  const MatrixXd& V = eig.eigenvectors();
  return {V * root.asDiagonal() * V.transpose(), V * inverse.asDiagonal() * V.transpose()};
}

RbParticle propagate(const ClgModel& model, const RbParticle& particle, RngStream& rng) {
  const VectorXd& xn = particle.x_n;
  const VectorXd& m = particle.belief.mean;
  const MatrixXd& P = particle.belief.cov;
  const MatrixXd An = model.A_n(xn);
  const MatrixXd Al = model.A_l(xn);

  const VectorXd mean_n = model.f_n(xn) + An * m;
  const VectorXd mean_l = model.f_l(xn) + Al * m;
  const MatrixXd PAnT = P * An.transpose();
  const MatrixXd cov_nn = An * PAnT + model.Q_n;
  const MatrixXd cov_ln = Al * PAnT + model.Q_nl.transpose();
  const MatrixXd cov_ll = Al * P * Al.transpose() + model.Q_l;

  const PsdFactors factors = psd_factors(cov_nn);
  RbParticle out;
  out.x_n = sample_gaussian(mean_n, factors.sqrt, rng);

  // Condition x^l_{t+1} on the realized x^n_{t+1}.
  const MatrixXd gain = cov_ln * factors.pinv;
  out.belief.mean = mean_l + gain * (out.x_n - mean_n);
  out.belief.cov = cov_ll - gain * cov_ln.transpose();
  enforce_psd(out.belief.cov);
  return out;
}

}  // namespace

MatrixXd ClgModel::joint_process_cov() const {
  const auto dn = static_cast<Eigen::Index>(dim_nonlinear);
  const auto dl = static_cast<Eigen::Index>(dim_linear);
  MatrixXd Q(dn + dl, dn + dl);
  Q.topLeftCorner(dn, dn) = Q_n;
  Q.bottomRightCorner(dl, dl) = Q_l;
  Q.topRightCorner(dn, dl) = Q_nl;
  Q.bottomLeftCorner(dl, dn) = Q_nl.transpose();
  return Q;
}

void ClgModel::validate() const {
  const auto dn = static_cast<Eigen::Index>(dim_nonlinear);
  const auto dl = static_cast<Eigen::Index>(dim_linear);
  const auto dy = static_cast<Eigen::Index>(dim_obs);
  require(dn > 0 && dl > 0 && dy > 0, "CLG dimensions must be positive");
  require(f_n && A_n && f_l && A_l && g && C, "CLG model functions must all be set");
  require(Q_n.rows() == dn && Q_n.cols() == dn, "Q_n dimension mismatch");
  require(Q_l.rows() == dl && Q_l.cols() == dl, "Q_l dimension mismatch");
  require(Q_nl.rows() == dn && Q_nl.cols() == dl, "Q_nl dimension mismatch");
  require(R.rows() == dy && R.cols() == dy, "R dimension mismatch");
  require(initial_nonlinear.mean.size() == dn && initial_nonlinear.cov.rows() == dn &&
              initial_nonlinear.cov.cols() == dn,
          "initial nonlinear distribution dimension mismatch");
  require(initial_linear.mean.size() == dl && initial_linear.cov.rows() == dl && initial_linear.cov.cols() == dl,
          "initial linear belief dimension mismatch");

  const MatrixXd Q = joint_process_cov();
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()),
          "process covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> q_eig(Q, Eigen::EigenvaluesOnly);
  require(q_eig.eigenvalues().minCoeff() >= -1e-10 * (1.0 + Q.cwiseAbs().maxCoeff()),
          "process covariance must be PSD");
  Eigen::SelfAdjointEigenSolver<MatrixXd> r_eig(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
  require(r_eig.eigenvalues().minCoeff() > 0.0, "R must be positive definite");
}

RbpfResult rbpf_loglik(const ClgModel& model, const Dataset& data, std::size_t particles, Resampler scheme,
                       RngStream rng) {
  model.validate();
  if (particles < 1) throw PreconditionError("particle count must be >= 1");
  if (data.obs_dim() != model.dim_obs) throw PreconditionError("dataset observation dimension mismatch");
  const std::size_t horizon = data.horizon();
  const RngStream resample_root = rng.child(kResamplePath);
  const MatrixXd initial_sqrt = psd_sqrt(model.initial_nonlinear.cov);

  std::vector<RbParticle> current(particles), next(particles);
  std::vector<double> log_w(particles), weights(particles);
  std::vector<std::size_t> ancestors(particles);

  {
    const RngStream init = rng.child(0);
    const RngStream step = rng.child(1);
    for (std::size_t n = 0; n < particles; ++n) {
      RngStream draw0 = init.child(n);
      const RbParticle start{sample_gaussian(model.initial_nonlinear.mean, initial_sqrt, draw0),
                             model.initial_linear};
      RngStream draw1 = step.child(n);
      current[n] = propagate(model, start, draw1);
    }
  }

  RbpfResult result{{0.0, Method::rbpf, particles, horizon}, {}};
  for (std::size_t t = 1; t <= horizon; ++t) {
    const VectorXd y = as_vector(data.y(t));
    for (std::size_t n = 0; n < particles; ++n) {
      RbParticle& p = current[n];
      auto step = update(p.belief, model.C(p.x_n), model.R, y - model.g(p.x_n));
      p.belief = std::move(step.belief);
      if (std::isnan(step.log_lik_increment)) throw ModelFault("rbpf weight", t, "NaN predictive density");
      log_w[n] = step.log_lik_increment;
    }
    try {
      result.estimate.log_z += normalize_into(log_w, weights);
    } catch (const DegenerateWeightsError&) {
      result.estimate.log_z = -kInf;
      return result;
    }
    if (t == horizon) break;

    RngStream resample_draw = resample_root.child(t + 1);
    resample(scheme, weights, resample_draw, ancestors);
    const RngStream step = rng.child(t + 1);
    for (std::size_t n = 0; n < particles; ++n) {
      RngStream draw = step.child(n);
      next[n] = propagate(model, current[ancestors[n]], draw);
    }
    std::swap(current, next);
  }
  result.particles = std::move(current);
  return result;
}

ClgJointModel::ClgJointModel(ClgModel model)
    : model_(std::move(model)), schema_(std::make_shared<const ParamSchema>()) {
  model_.validate();
  process_sqrt_ = psd_sqrt(model_.joint_process_cov());
  initial_n_sqrt_ = psd_sqrt(model_.initial_nonlinear.cov);
  initial_l_sqrt_ = psd_sqrt(model_.initial_linear.cov);
  obs_sqrt_ = psd_sqrt(model_.R);
  obs_chol_.compute(model_.R);
  obs_log_norm_ = -0.5 * static_cast<double>(model_.dim_obs) * std::log(2.0 * std::numbers::pi) -
                  obs_chol_.matrixLLT().diagonal().array().log().sum();
}

void ClgJointModel::sample_initial(const ParamVector&, RngStream& rng, std::span<double> x0) const {
  const auto dn = static_cast<Eigen::Index>(model_.dim_nonlinear);
  const auto dl = static_cast<Eigen::Index>(model_.dim_linear);
  Eigen::Map<VectorXd> x(x0.data(), dn + dl);
  x.head(dn) = sample_gaussian(model_.initial_nonlinear.mean, initial_n_sqrt_, rng);
  x.tail(dl) = sample_gaussian(model_.initial_linear.mean, initial_l_sqrt_, rng);
}

void ClgJointModel::sample_transition(const ParamVector&, std::span<const double> x_prev, std::size_t,
                                      RngStream& rng, std::span<double> x_next) const {
  const auto dn = static_cast<Eigen::Index>(model_.dim_nonlinear);
  const auto dl = static_cast<Eigen::Index>(model_.dim_linear);
  const auto prev = as_vector(x_prev);
  const VectorXd xn = prev.head(dn);
  const VectorXd xl = prev.tail(dl);
  VectorXd mean(dn + dl);
  mean.head(dn) = model_.f_n(xn) + model_.A_n(xn) * xl;
  mean.tail(dl) = model_.f_l(xn) + model_.A_l(xn) * xl;
  Eigen::Map<VectorXd>(x_next.data(), dn + dl) = sample_gaussian(mean, process_sqrt_, rng);
}

double ClgJointModel::log_obs_density(const ParamVector&, std::span<const double> x, std::span<const double> y,
                                      std::size_t) const {
  const auto dn = static_cast<Eigen::Index>(model_.dim_nonlinear);
  const auto dl = static_cast<Eigen::Index>(model_.dim_linear);
  const auto state = as_vector(x);
  const VectorXd xn = state.head(dn);
  const VectorXd residual = as_vector(y) - model_.g(xn) - model_.C(xn) * state.tail(dl);
  const VectorXd whitened = obs_chol_.matrixL().solve(residual);
  return obs_log_norm_ - 0.5 * whitened.squaredNorm();
}

void ClgJointModel::sample_observation(const ParamVector&, std::span<const double> x, std::size_t, RngStream& rng,
                                       std::span<double> y) const {
  const auto dn = static_cast<Eigen::Index>(model_.dim_nonlinear);
  const auto dl = static_cast<Eigen::Index>(model_.dim_linear);
  const auto state = as_vector(x);
  const VectorXd xn = state.head(dn);
  const VectorXd mean = model_.g(xn) + model_.C(xn) * state.tail(dl);
  Eigen::Map<VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) = sample_gaussian(mean, obs_sqrt_, rng);
}

}  // namespace ssm
