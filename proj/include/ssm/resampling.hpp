#ifndef SSM_RESAMPLING_HPP
#define SSM_RESAMPLING_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ssm/rng.hpp"

namespace ssm {

enum class Resampler { multinomial, stratified, systematic };

std::string_view to_string(Resampler scheme) noexcept;
/// Throws ssm::Error for an unknown name.
Resampler parse_resampler(std::string_view name);

struct NormalizedWeights {
  std::vector<double> weights;
  /// log((1/N) * sum_n exp(log_w_n)), the per-step likelihood factor.
  double log_mean;
};

/// Max-shifted log-sum-exp normalization. Throws DegenerateWeightsError when
/// every entry is -inf.
NormalizedWeights normalize(std::span<const double> log_w);

/// Allocation-free variant writing the normalized weights into `weights`.
double normalize_into(std::span<const double> log_w, std::span<double> weights);

/// log(sum_n exp(v_n)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values) noexcept;

// Ancestor indices are 0-based. Each scheme draws N = weights.size() ancestors
// whose expected copy counts are N * w_i. Stratified and systematic output is
// sorted ascending; multinomial output is in draw order. A weight vector whose
// sum differs from 1 by more than 1e-9 raises PreconditionError.
std::vector<std::size_t> multinomial(std::span<const double> weights, RngStream& rng);
std::vector<std::size_t> stratified(std::span<const double> weights, RngStream& rng);
std::vector<std::size_t> systematic(std::span<const double> weights, RngStream& rng);

void resample(Resampler scheme, std::span<const double> weights, RngStream& rng, std::span<std::size_t> ancestors);
std::vector<std::size_t> resample(Resampler scheme, std::span<const double> weights, RngStream& rng);

}  // namespace ssm

#endif  // SSM_RESAMPLING_HPP
