#ifndef SSM_DATASET_HPP
#define SSM_DATASET_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ssm/params.hpp"

namespace ssm {

/// Observations y_1..y_T with optional simulation truth.
///
/// Storage is row-major: one row per time step. Observation rows are indexed
/// 1..T, matching the model's time index; truth rows are indexed 0..T.
class Dataset {
 public:
  Dataset(std::size_t obs_dim, std::vector<double> observations);

  std::size_t horizon() const noexcept { return observations_.size() / obs_dim_; }
  std::size_t obs_dim() const noexcept { return obs_dim_; }

  /// Observation at time t, 1 <= t <= T.
  std::span<const double> y(std::size_t t) const noexcept {
    return {observations_.data() + (t - 1) * obs_dim_, obs_dim_};
  }
  std::span<const double> observations() const noexcept { return observations_; }

  bool has_truth() const noexcept { return state_dim_ > 0; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  /// True state at time t, 0 <= t <= T.
  std::span<const double> x_true(std::size_t t) const noexcept {
    return {true_states_.data() + t * state_dim_, state_dim_};
  }
  void set_truth(std::size_t state_dim, std::vector<double> states);

  const std::optional<ParamVector>& theta_true() const noexcept { return theta_true_; }
  void set_theta_true(ParamVector theta) { theta_true_ = std::move(theta); }

  /// First `horizon` observations (and matching truth).
  Dataset truncated(std::size_t horizon) const;

 private:
  std::size_t obs_dim_;
  std::vector<double> observations_;
  std::size_t state_dim_ = 0;
  std::vector<double> true_states_;
  std::optional<ParamVector> theta_true_;
};

// CSV formats: observations `t,y` (or `t,y0,y1,...`) with rows t = 1..T;
// truth `t,x0,x1,...` with rows t = 0..T. Values use 17 significant digits.
void write_observations_csv(std::ostream& out, const Dataset& data);
void write_truth_csv(std::ostream& out, const Dataset& data);
void write_observations_csv(const std::filesystem::path& path, const Dataset& data);
void write_truth_csv(const std::filesystem::path& path, const Dataset& data);

/// Throws ParseError naming the source and line on malformed input.
Dataset read_observations_csv(std::istream& in, const std::string& source_name = "<stream>");
Dataset read_observations_csv(const std::filesystem::path& path);

}  // namespace ssm

#endif  // SSM_DATASET_HPP
