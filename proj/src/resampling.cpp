#include "ssm/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_probability_vector(std::span<const double> weights) {
  if (weights.empty()) throw PreconditionError("resampling needs at least one weight");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw PreconditionError("weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("weights must sum to one");
}

// Selects the smallest i with u < c_i. Round-off can leave c_{N-1} slightly
// below one; such draws go to the last particle with positive weight.
class CumulativeSearch {
 public:
  explicit CumulativeSearch(std::span<const double> weights) : weights_(weights) {}

  std::size_t advance_to(double u) {
    const std::size_t n = weights_.size();
    while (index_ < n && !(u < cumulative_ + weights_[index_])) {
      cumulative_ += weights_[index_];
      ++index_;
    }
    if (index_ < n) return index_;
    return last_positive();
  }

 private:
  std::size_t last_positive() const {
    for (std::size_t i = weights_.size(); i-- > 0;) {
      if (weights_[i] > 0.0) return i;
    }
    return weights_.size() - 1;
  }

  std::span<const double> weights_;
  std::size_t index_ = 0;
  double cumulative_ = 0.0;
};

void stratified_like(std::span<const double> weights, RngStream& rng, bool shared_offset,
                     std::span<std::size_t> out) {
  const std::size_t n = weights.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double offset = shared_offset ? rng.uniform() : 0.0;
  CumulativeSearch search(weights);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (static_cast<double>(k) + (shared_offset ? offset : rng.uniform())) * inv_n;
    out[k] = search.advance_to(u);
  }
}

void multinomial_into(std::span<const double> weights, RngStream& rng, std::span<std::size_t> out) {
  const std::size_t n = weights.size();
  std::vector<double> cumulative(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += weights[i];
    cumulative[i] = running;
  }
  std::size_t last = n - 1;
  while (last > 0 && weights[last] == 0.0) --last;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    out[k] = it == cumulative.end() ? last : static_cast<std::size_t>(it - cumulative.begin());
  }
}

}  // namespace

std::string_view to_string(Resampler scheme) noexcept {
  switch (scheme) {
    case Resampler::multinomial:
      return "multinomial";
    case Resampler::stratified:
      return "stratified";
    case Resampler::systematic:
      return "systematic";
  }
  return "unknown";
}

Resampler parse_resampler(std::string_view name) {
  if (name == "multinomial") return Resampler::multinomial;
  if (name == "stratified") return Resampler::stratified;
  if (name == "systematic") return Resampler::systematic;
  throw Error("unknown resampler '" + std::string(name) + "'");
}

double log_sum_exp(std::span<const double> values) noexcept {
  double max = kNegInf;
  for (double v : values) max = std::max(max, v);
  if (max == kNegInf) return kNegInf;
  if (max == std::numeric_limits<double>::infinity()) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double normalize_into(std::span<const double> log_w, std::span<double> weights) {
  if (log_w.empty()) throw PreconditionError("cannot normalize an empty weight vector");
  double max = kNegInf;
  for (double v : log_w) {
    if (std::isnan(v)) throw PreconditionError("log-weight is NaN");
    max = std::max(max, v);
  }
  if (max == kNegInf) throw DegenerateWeightsError("all particle weights are zero");
  if (std::isinf(max)) throw PreconditionError("log-weight is +infinity");
  double sum = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    weights[i] = std::exp(log_w[i] - max);
    sum += weights[i];
  }
  for (double& w : weights) w /= sum;
  return max + std::log(sum) - std::log(static_cast<double>(log_w.size()));
}

NormalizedWeights normalize(std::span<const double> log_w) {
  NormalizedWeights out{std::vector<double>(log_w.size()), 0.0};
  out.log_mean = normalize_into(log_w, out.weights);
  return out;
}

void resample(Resampler scheme, std::span<const double> weights, RngStream& rng, std::span<std::size_t> ancestors) {
  check_probability_vector(weights);
  if (ancestors.size() != weights.size()) throw PreconditionError("ancestor buffer size mismatch");
  switch (scheme) {
    case Resampler::multinomial:
      multinomial_into(weights, rng, ancestors);
      return;
    case Resampler::stratified:
      stratified_like(weights, rng, false, ancestors);
      return;
    case Resampler::systematic:
      stratified_like(weights, rng, true, ancestors);
      return;
  }
}

std::vector<std::size_t> resample(Resampler scheme, std::span<const double> weights, RngStream& rng) {
  std::vector<std::size_t> out(weights.size());
  resample(scheme, weights, rng, out);
  return out;
}

std::vector<std::size_t> multinomial(std::span<const double> weights, RngStream& rng) {
  return resample(Resampler::multinomial, weights, rng);
}

std::vector<std::size_t> stratified(std::span<const double> weights, RngStream& rng) {
  return resample(Resampler::stratified, weights, rng);
}

std::vector<std::size_t> systematic(std::span<const double> weights, RngStream& rng) {
  return resample(Resampler::systematic, weights, rng);
}

}  // namespace ssm
