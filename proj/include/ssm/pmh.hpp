#ifndef SSM_PMH_HPP
#define SSM_PMH_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssm/dataset.hpp"
#include "ssm/model.hpp"
#include "ssm/params.hpp"
#include "ssm/resampling.hpp"
#include "ssm/rng.hpp"
#include "ssm/smc.hpp"

namespace ssm {

/// Truncated Gaussian random-walk step for one parameter.
struct WalkSpec {
  double stddev = 1.0;
  double lo = -kInf;
  double hi = kInf;
};

/// Independent per-parameter random walks, keyed by the model schema.
class ProposalSpec {
 public:
  ProposalSpec(std::shared_ptr<const ParamSchema> schema, std::vector<WalkSpec> walks);

  const ParamSchema& schema() const noexcept { return *schema_; }
  const WalkSpec& walk(std::size_t i) const { return walks_.at(i); }
  const WalkSpec& walk(std::string_view name) const { return walks_[schema_->index_of(name)]; }
  void set_stddev(std::string_view name, double stddev);

  bool within_bounds(const ParamVector& theta) const;

 private:
  std::shared_ptr<const ParamSchema> schema_;
  std::vector<WalkSpec> walks_;
};

struct Proposal {
  ParamVector theta;
  /// log q(theta | theta') - log q(theta' | theta).
  double log_q_ratio = 0.0;
};

Proposal propose(const ProposalSpec& spec, const ParamVector& theta, RngStream& rng);
/// log q(theta | theta') - log q(theta' | theta) for the truncated walks.
double log_q_ratio(const ProposalSpec& spec, const ParamVector& theta, const ParamVector& theta_new);

struct AcceptDecision {
  bool accepted = false;
  double alpha = 0.0;
};

/// min(1, exp(log_z' + log_prior' - log_z - log_prior + log_q_ratio)); zero
/// when the proposed estimate or prior is -inf.
double acceptance_probability(double log_z_new, double log_prior_new, double log_z, double log_prior,
                              double log_q_ratio) noexcept;
/// Draws one uniform omega and accepts iff omega < alpha.
AcceptDecision accept_step(double log_z_new, double log_prior_new, double log_z, double log_prior,
                           double log_q_ratio, RngStream& rng);

struct ChainRecord {
  std::size_t m = 0;
  ParamVector theta;
  double log_z = 0.0;
  double alpha = 1.0;
  bool accepted = true;
};

struct StoredTrajectory {
  std::size_t m = 0;
  std::vector<double> states;  // x_{0:T}, row-major
};

struct Chain {
  std::vector<ChainRecord> records;  // M + 1; record 0 is the initialization
  std::uint64_t seed = 0;
  std::size_t particles = 0;
  Resampler resampler = Resampler::systematic;
  Method method = Method::bootstrap;
  std::string model;
  std::vector<StoredTrajectory> trajectories;

  std::size_t iterations() const noexcept { return records.empty() ? 0 : records.size() - 1; }
};

struct PmhOptions {
  std::size_t iterations = 1000;
  std::size_t particles = 256;
  Resampler resampler = Resampler::systematic;
  /// bootstrap or apf; apf requires an AdaptedSsmModel.
  Method method = Method::bootstrap;
  std::uint64_t seed = 0;
  /// Drawn from the prior (restricted to the proposal bounds) when absent.
  std::optional<ParamVector> theta0;
  /// Keep one backtracked trajectory per accepted iteration (bootstrap only).
  bool store_trajectories = false;
  /// Called after every iteration with the new record.
  std::function<void(const ChainRecord&)> on_record;
};

/// Prior draw inside the proposal bounds; rejection over at most `max_tries`.
ParamVector draw_initial_theta(const SsmModel& model, const ProposalSpec& spec, RngStream rng,
                               std::size_t max_tries = 100000);

/// Particle Metropolis-Hastings. On rejection the held (theta, log_z) pair is
/// copied forward unchanged; it is never re-estimated.
Chain run_pmh(const SsmModel& model, const Dataset& data, const ProposalSpec& spec, const PmhOptions& options);

/// Default burn-in: 10% of the iterations.
std::size_t default_burn_in(const Chain& chain) noexcept;

/// Mean of phi(theta[m]) over m >= burn_in.
double expectation(const Chain& chain, const std::function<double(const ParamVector&)>& phi, std::size_t burn_in);

/// Type-7 (linear interpolation) sample quantile; `sorted` must be ascending.
double quantile(const std::vector<double>& sorted, double p);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

Histogram histogram(const std::vector<double>& values, std::size_t bins);

inline constexpr std::array<double, 5> kSummaryQuantiles{0.025, 0.25, 0.5, 0.75, 0.975};

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
  std::array<double, 5> quantiles{};
  Histogram hist;
};

struct ChainDiagnostics {
  double acceptance_rate = 0.0;  // accepted / M over m >= 1
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t kept = 0;
  std::vector<ParamSummary> params;
};

ChainDiagnostics diagnostics(const Chain& chain, std::size_t burn_in, std::size_t bins = 50);

/// Header `m,<param names...>,log_z,alpha,accepted`.
void write_chain_csv(std::ostream& out, const Chain& chain);
nlohmann::ordered_json to_json(const ChainDiagnostics& diag);

}  // namespace ssm

#endif  // SSM_PMH_HPP
