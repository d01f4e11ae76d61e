#include "ssm/kalman.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kNegativeEigenTolerance = 1e-10;

void require(bool condition, const char* message) {
  if (!condition) throw PreconditionError(message);
}

bool is_symmetric(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + m.cwiseAbs().maxCoeff());
}

bool is_psd(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -kNegativeEigenTolerance * (1.0 + m.cwiseAbs().maxCoeff());
}

}  // namespace

LgssParams LgssParams::constant(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::MatrixXd Q, Eigen::MatrixXd C,
                                Eigen::MatrixXd R, Eigen::VectorXd m0, Eigen::MatrixXd P0) {
  LgssParams p;
  p.A = {std::move(A)};
  p.b = {std::move(b)};
  p.Q = {std::move(Q)};
  p.C = {std::move(C)};
  p.R = {std::move(R)};
  p.m0 = std::move(m0);
  p.P0 = std::move(P0);
  return p;
}

void LgssParams::validate(std::size_t horizon) const {
  const auto d = m0.size();
  require(d > 0, "state dimension must be positive");
  require(P0.rows() == d && P0.cols() == d, "P0 dimension mismatch");
  require(is_symmetric(P0) && is_psd(P0), "P0 must be symmetric PSD");
  const auto check_len = [&](std::size_t n, const char* what) {
    if (n != 1 && n != horizon) throw PreconditionError(std::string(what) + " must have 1 or T entries");
  };
  check_len(A.size(), "A");
  check_len(b.size(), "b");
  check_len(Q.size(), "Q");
  check_len(C.size(), "C");
  check_len(R.size(), "R");
  for (std::size_t t = 1; t <= horizon; ++t) {
    require(A_at(t).rows() == d && A_at(t).cols() == d, "A dimension mismatch");
    require(b_at(t).size() == d, "b dimension mismatch");
    require(Q_at(t).rows() == d && Q_at(t).cols() == d, "Q dimension mismatch");
    require(C_at(t).cols() == d, "C dimension mismatch");
    require(R_at(t).rows() == C_at(t).rows() && R_at(t).cols() == C_at(t).rows(), "R dimension mismatch");
    if (t == 1 || Q.size() > 1) require(is_symmetric(Q_at(t)) && is_psd(Q_at(t)), "Q must be symmetric PSD");
    if (t == 1 || R.size() > 1) {
      require(is_symmetric(R_at(t)), "R must be symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R_at(t), Eigen::EigenvaluesOnly);
      require(eig.eigenvalues().minCoeff() > 0.0, "R must be positive definite");
    }
  }
}

void enforce_psd(Eigen::MatrixXd& cov) {
  cov = (0.5 * (cov + cov.transpose())).eval();
  if (cov.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig >= 0.0) return;
  const double scale = 1.0 + cov.cwiseAbs().maxCoeff();
  if (min_eig < -kNegativeEigenTolerance * scale) {
    throw Error("covariance lost positive semidefiniteness (min eigenvalue " + std::to_string(min_eig) + ")");
  }
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  cov = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  cov = (0.5 * (cov + cov.transpose())).eval();
}

GaussianBelief predict(const GaussianBelief& belief, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::MatrixXd& Q) {
  const auto d = belief.mean.size();
  require(A.cols() == d && A.rows() == b.size() && Q.rows() == A.rows() && Q.cols() == A.rows(),
          "predict: dimension mismatch");
  GaussianBelief out{A * belief.mean + b, A * belief.cov * A.transpose() + Q};
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
  return out;
}

KalmanUpdate update(const GaussianBelief& belief, const Eigen::MatrixXd& C, const Eigen::MatrixXd& R,
                    const Eigen::VectorXd& y) {
  const auto d = belief.mean.size();
  const auto p = y.size();
  require(C.cols() == d && C.rows() == p && R.rows() == p && R.cols() == p, "update: dimension mismatch");

  const Eigen::MatrixXd PCt = belief.cov * C.transpose();
  Eigen::MatrixXd S = C * PCt + R;
  S = (0.5 * (S + S.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double max_eig = eig.eigenvalues().maxCoeff();
  if (!(min_eig > 0.0) || max_eig / min_eig > kMaxCondition) {
    throw SingularInnovationError("innovation covariance is numerically singular");
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(S);
  if (chol.info() != Eigen::Success) throw SingularInnovationError("innovation covariance Cholesky failed");

  const Eigen::VectorXd innovation = y - C * belief.mean;
  const Eigen::VectorXd whitened = chol.matrixL().solve(innovation);
  const double log_det = 2.0 * chol.matrixL().nestedExpression().diagonal().array().log().sum();
  const double log_lik =
      -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + log_det + whitened.squaredNorm());

  // K = P C^T S^{-1}
  const Eigen::MatrixXd K = chol.solve(PCt.transpose()).transpose();
  const Eigen::MatrixXd I_KC = Eigen::MatrixXd::Identity(d, d) - K * C;

  KalmanUpdate out{{belief.mean + K * innovation, I_KC * belief.cov * I_KC.transpose() + K * R * K.transpose()},
                   log_lik};
  enforce_psd(out.belief.cov);
  return out;
}

double log_likelihood(const LgssParams& params, const Dataset& data) {
  const std::size_t horizon = data.horizon();
  params.validate(horizon);
  GaussianBelief belief{params.m0, params.P0};
  double total = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    belief = predict(belief, params.A_at(t), params.b_at(t), params.Q_at(t));
    const auto yt = data.y(t);
    const Eigen::Map<const Eigen::VectorXd> y(yt.data(), static_cast<Eigen::Index>(yt.size()));
    auto step = update(belief, params.C_at(t), params.R_at(t), y);
    total += step.log_lik_increment;
    belief = std::move(step.belief);
  }
  return total;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  if (cov.size() == 0) return cov;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& sqrt_cov, RngStream& rng) {
  Eigen::VectorXd z(sqrt_cov.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + sqrt_cov * z;
}

}  // namespace ssm
