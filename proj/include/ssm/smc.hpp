#ifndef SSM_SMC_HPP
#define SSM_SMC_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ssm/dataset.hpp"
#include "ssm/model.hpp"
#include "ssm/resampling.hpp"
#include "ssm/rng.hpp"

namespace ssm {

enum class Method { vanilla, bootstrap, apf, rbpf, kalman };

/// CLI spelling: vanilla, pf, apf, rbpf, kalman.
std::string_view to_string(Method method) noexcept;
/// Accepts the CLI spelling; "bootstrap" is an alias of "pf".
Method parse_method(std::string_view name);

/// Log-domain likelihood estimate log z_hat of p(y_{1:T} | theta).
struct LogLikEstimate {
  double log_z = 0.0;  // finite or -inf, never NaN
  Method method = Method::bootstrap;
  std::size_t particles = 0;
  std::size_t horizon = 0;
};

/// Path index reserved for resampling draws; particle draws at time t use
/// the path (t, n), resampling before time t uses (kResamplePath, t).
inline constexpr std::uint64_t kResamplePath = 0xFFFF'FFFF'FFFF'FF00ull;

/// Particles, log-weights and ancestor indices for t = 0..T.
///
/// ancestors(t)[n] indexes particles(t-1); at t = 1 the ancestors are the
/// identity. Trajectories are recovered by backtracking.
class ParticleSystem {
 public:
  ParticleSystem(std::size_t particles, std::size_t state_dim, std::size_t horizon);

  std::size_t particle_count() const noexcept { return particles_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t horizon() const noexcept { return horizon_; }

  std::span<const double> particles(std::size_t t) const noexcept {
    return {states_.data() + t * particles_ * state_dim_, particles_ * state_dim_};
  }
  std::span<double> particles(std::size_t t) noexcept {
    return {states_.data() + t * particles_ * state_dim_, particles_ * state_dim_};
  }
  std::span<const double> log_weights(std::size_t t) const noexcept {
    return {log_weights_.data() + (t - 1) * particles_, particles_};
  }
  std::span<double> log_weights(std::size_t t) noexcept {
    return {log_weights_.data() + (t - 1) * particles_, particles_};
  }
  std::span<const std::size_t> ancestors(std::size_t t) const noexcept {
    return {ancestors_.data() + (t - 1) * particles_, particles_};
  }
  std::span<std::size_t> ancestors(std::size_t t) noexcept {
    return {ancestors_.data() + (t - 1) * particles_, particles_};
  }

  /// States x_{0:T} (row-major) of the lineage ending in particle `final_index`.
  std::vector<double> trajectory(std::size_t final_index) const;
  /// Trajectory whose final particle is drawn according to the time-T weights.
  std::vector<double> sample_trajectory(RngStream& rng) const;

 private:
  std::size_t particles_;
  std::size_t state_dim_;
  std::size_t horizon_;
  std::vector<double> states_;
  std::vector<double> log_weights_;
  std::vector<std::size_t> ancestors_;
};

/// Simulates N independent trajectories from the prior dynamics and averages
/// their observation likelihoods.
LogLikEstimate vanilla_mc_loglik(const SsmModel& model, const ParamVector& theta, const Dataset& data,
                                 std::size_t particles, RngStream rng);

struct FilterResult {
  LogLikEstimate estimate;
  /// Present when requested and the filter did not degenerate.
  std::optional<ParticleSystem> history;
};

/// Bootstrap particle filter: resample, propagate, weight, with the
/// likelihood estimate prod_t (1/N) sum_n w_t^n accumulated in log space.
/// Total weight collapse yields log_z = -inf.
FilterResult bootstrap_pf(const SsmModel& model, const ParamVector& theta, const Dataset& data,
                          std::size_t particles, Resampler scheme, RngStream rng, bool keep_history = false);

/// Fully adapted auxiliary particle filter: resample on p(y_t | x_{t-1}),
/// propagate from p(x_t | x_{t-1}, y_t).
LogLikEstimate fully_adapted_apf(const AdaptedSsmModel& model, const ParamVector& theta, const Dataset& data,
                                 std::size_t particles, Resampler scheme, RngStream rng);

}  // namespace ssm

#endif  // SSM_SMC_HPP
