#include "ssm/pmh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

// Stream layout of one chain: iteration m owns child(m) of the chain root.
constexpr std::uint64_t kProposalPath = 0;
constexpr std::uint64_t kFilterPath = 1;
constexpr std::uint64_t kAcceptPath = 2;
constexpr std::uint64_t kTrajectoryPath = 3;
constexpr std::uint64_t kInitialThetaPath = 4;

double log_walk_mass(const WalkSpec& walk, double center) {
  return normal_log_mass((walk.lo - center) / walk.stddev, (walk.hi - center) / walk.stddev);
}

struct Estimate {
  double log_z = 0.0;
  std::optional<ParticleSystem> history;
};

Estimate estimate_log_z(const SsmModel& model, const ParamVector& theta, const Dataset& data,
                        const PmhOptions& options, RngStream rng) {
  if (options.method == Method::apf) {
    const auto& adapted = static_cast<const AdaptedSsmModel&>(model);
    return {fully_adapted_apf(adapted, theta, data, options.particles, options.resampler, rng).log_z, std::nullopt};
  }
  auto result = bootstrap_pf(model, theta, data, options.particles, options.resampler, rng,
                             options.store_trajectories);
  return {result.estimate.log_z, std::move(result.history)};
}

}  // namespace

ProposalSpec::ProposalSpec(std::shared_ptr<const ParamSchema> schema, std::vector<WalkSpec> walks)
    : schema_(std::move(schema)), walks_(std::move(walks)) {
  if (!schema_ || walks_.size() != schema_->size())
    throw PreconditionError("proposal must declare one walk per parameter");
  for (const auto& walk : walks_) {
    if (!(walk.stddev > 0.0) || !std::isfinite(walk.stddev)) throw ParameterDomainError("proposal stddev must be positive");
    if (!(walk.lo < walk.hi)) throw ParameterDomainError("proposal bounds must satisfy lo < hi");
  }
}

void ProposalSpec::set_stddev(std::string_view name, double stddev) {
  if (!(stddev > 0.0) || !std::isfinite(stddev))
    throw ParameterDomainError("proposal stddev for '" + std::string(name) + "' must be positive");
  walks_[schema_->index_of(name)].stddev = stddev;
}

bool ProposalSpec::within_bounds(const ParamVector& theta) const {
  for (std::size_t i = 0; i < walks_.size(); ++i) {
    const double v = theta.get(schema_->name(i));
    if (!(v >= walks_[i].lo && v <= walks_[i].hi)) return false;
  }
  return true;
}

Proposal propose(const ProposalSpec& spec, const ParamVector& theta, RngStream& rng) {
  if (!spec.within_bounds(theta)) throw PreconditionError("current parameter lies outside the proposal bounds");
  Proposal out{theta, 0.0};
  const ParamSchema& schema = spec.schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const WalkSpec& walk = spec.walk(i);
    const double current = theta.get(schema.name(i));
    const double next = sample(TruncatedGaussian{current, walk.stddev, walk.lo, walk.hi}, rng);
    out.theta.set(schema.name(i), next);
  }
  out.log_q_ratio = log_q_ratio(spec, theta, out.theta);
  return out;
}

double log_q_ratio(const ProposalSpec& spec, const ParamVector& theta, const ParamVector& theta_new) {
  const ParamSchema& schema = spec.schema();
  double ratio = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    // The Gaussian kernels are symmetric and cancel; only the truncation masses remain.
    ratio += log_walk_mass(spec.walk(i), theta.get(schema.name(i))) -
             log_walk_mass(spec.walk(i), theta_new.get(schema.name(i)));
  }
  return ratio;
}

double acceptance_probability(double log_z_new, double log_prior_new, double log_z, double log_prior,
                              double log_q_ratio) noexcept {
  if (log_z_new == -kInf || log_prior_new == -kInf) return 0.0;
  const double log_ratio = log_z_new + log_prior_new - log_z - log_prior + log_q_ratio;
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

AcceptDecision accept_step(double log_z_new, double log_prior_new, double log_z, double log_prior,
                           double log_q_ratio, RngStream& rng) {
  const double alpha = acceptance_probability(log_z_new, log_prior_new, log_z, log_prior, log_q_ratio);
  const double omega = rng.uniform();
  return {omega < alpha, alpha};
}

ParamVector draw_initial_theta(const SsmModel& model, const ProposalSpec& spec, RngStream rng,
                               std::size_t max_tries) {
  for (std::size_t i = 0; i < max_tries; ++i) {
    ParamVector theta = model.sample_prior(rng);
    if (spec.within_bounds(theta) && std::isfinite(model.log_prior(theta))) return theta;
  }
  throw PreconditionError("no prior draw fell inside the proposal bounds");
}

Chain run_pmh(const SsmModel& model, const Dataset& data, const ProposalSpec& spec, const PmhOptions& options) {
  if (options.iterations < 1) throw PreconditionError("PMH needs at least one iteration");
  if (options.particles < 1) throw PreconditionError("particle count must be >= 1");
  if (!(spec.schema() == *model.schema())) throw PreconditionError("proposal schema does not match the model");
  if (options.method != Method::bootstrap && options.method != Method::apf)
    throw CapabilityError("PMH supports the pf and apf estimators only");
  if (options.method == Method::apf && dynamic_cast<const AdaptedSsmModel*>(&model) == nullptr)
    throw CapabilityError("model '" + std::string(model.name()) + "' does not provide the adapted dynamics apf needs");
  if (options.method == Method::apf && options.store_trajectories)
    throw PreconditionError("trajectory storage requires the pf estimator");

  const RngStream root(options.seed);
  Chain chain;
  chain.seed = options.seed;
  chain.particles = options.particles;
  chain.resampler = options.resampler;
  chain.method = options.method;
  chain.model = std::string(model.name());
  chain.records.reserve(options.iterations + 1);

  const RngStream init_rng = root.child(0);
  ParamVector theta =
      options.theta0 ? *options.theta0 : draw_initial_theta(model, spec, init_rng.child(kInitialThetaPath));
  if (!(theta.schema() == *model.schema())) throw PreconditionError("initial parameter schema does not match the model");
  double log_prior = model.log_prior(theta);
  if (!std::isfinite(log_prior)) throw PreconditionError("initialization: theta0 lies outside the prior support");
  if (!spec.within_bounds(theta)) throw PreconditionError("initialization: theta0 lies outside the proposal bounds");

  Estimate current = estimate_log_z(model, theta, data, options, init_rng.child(kFilterPath));
  if (!std::isfinite(current.log_z))
    throw PreconditionError("initialization: the particle filter returned a zero likelihood estimate at theta0");
  double log_z = current.log_z;
  if (options.store_trajectories && current.history) {
    RngStream draw = init_rng.child(kTrajectoryPath);
    chain.trajectories.push_back({0, current.history->sample_trajectory(draw)});
  }
  chain.records.push_back({0, theta, log_z, 1.0, true});
  if (options.on_record) options.on_record(chain.records.back());

  for (std::size_t m = 1; m <= options.iterations; ++m) {
    const RngStream step = root.child(m);
    RngStream proposal_rng = step.child(kProposalPath);
    Proposal proposal = propose(spec, theta, proposal_rng);
    const double log_prior_new = model.log_prior(proposal.theta);

    Estimate candidate;
    if (std::isfinite(log_prior_new)) {
      try {
        candidate = estimate_log_z(model, proposal.theta, data, options, step.child(kFilterPath));
      } catch (const ModelFault& fault) {
        throw ModelFault(fault.capability(), fault.time_index(), fmt::format("PMH iteration {}", m));
      }
    } else {
      candidate.log_z = -kInf;
    }

    RngStream accept_rng = step.child(kAcceptPath);
    const AcceptDecision decision =
        accept_step(candidate.log_z, log_prior_new, log_z, log_prior, proposal.log_q_ratio, accept_rng);
    if (decision.accepted) {
      theta = std::move(proposal.theta);
      log_z = candidate.log_z;
      log_prior = log_prior_new;
      if (options.store_trajectories && candidate.history) {
        RngStream draw = step.child(kTrajectoryPath);
        chain.trajectories.push_back({m, candidate.history->sample_trajectory(draw)});
      }
    }
    chain.records.push_back({m, theta, log_z, decision.alpha, decision.accepted});
    if (options.on_record) options.on_record(chain.records.back());
  }
  return chain;
}

std::size_t default_burn_in(const Chain& chain) noexcept { return chain.iterations() / 10; }

double expectation(const Chain& chain, const std::function<double(const ParamVector&)>& phi, std::size_t burn_in) {
  if (burn_in >= chain.records.size()) throw PreconditionError("burn-in leaves no records");
  double sum = 0.0;
  for (std::size_t m = burn_in; m < chain.records.size(); ++m) sum += phi(chain.records[m].theta);
  return sum / static_cast<double>(chain.records.size() - burn_in);
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw PreconditionError("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Histogram histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins < 1) throw PreconditionError("histogram needs at least one bin");
  Histogram out{std::vector<double>(bins + 1), std::vector<std::size_t>(bins, 0)};
  if (values.empty()) return out;
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) out.edges[i] = lo + width * static_cast<double>(i);
  out.edges[bins] = hi;
  for (double v : values) {
    std::size_t bin = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    out.counts[std::min(bin, bins - 1)] += 1;
  }
  return out;
}

ChainDiagnostics diagnostics(const Chain& chain, std::size_t burn_in, std::size_t bins) {
  if (chain.records.empty()) throw PreconditionError("diagnostics of an empty chain");
  if (burn_in >= chain.records.size()) throw PreconditionError("burn-in leaves no records");
  ChainDiagnostics out;
  out.iterations = chain.iterations();
  out.burn_in = burn_in;
  out.kept = chain.records.size() - burn_in;

  std::size_t accepted = 0;
  for (std::size_t m = 1; m < chain.records.size(); ++m) accepted += chain.records[m].accepted ? 1 : 0;
  out.acceptance_rate = out.iterations > 0 ? static_cast<double>(accepted) / static_cast<double>(out.iterations) : 0.0;

  const ParamSchema& schema = chain.records.front().theta.schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    std::vector<double> values;
    values.reserve(out.kept);
    for (std::size_t m = burn_in; m < chain.records.size(); ++m) values.push_back(chain.records[m].theta[i]);

    ParamSummary summary;
    summary.name = schema.name(i);
    double sum = 0.0;
    for (double v : values) sum += v;
    summary.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - summary.mean) * (v - summary.mean);
    summary.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    summary.hist = histogram(values, bins);
    std::sort(values.begin(), values.end());
    for (std::size_t q = 0; q < kSummaryQuantiles.size(); ++q) summary.quantiles[q] = quantile(values, kSummaryQuantiles[q]);
    out.params.push_back(std::move(summary));
  }
  return out;
}

void write_chain_csv(std::ostream& out, const Chain& chain) {
  if (chain.records.empty()) return;
  const ParamSchema& schema = chain.records.front().theta.schema();
  out << "m";
  for (const auto& name : schema.names()) out << ',' << name;
  out << ",log_z,alpha,accepted\n";
  for (const auto& record : chain.records) {
    out << record.m;
    for (double v : record.theta.values()) out << fmt::format(",{:.17g}", v);
    out << fmt::format(",{:.17g},{:.17g},{}\n", record.log_z, record.alpha, record.accepted ? 1 : 0);
  }
}

nlohmann::ordered_json to_json(const ChainDiagnostics& diag) {
  nlohmann::ordered_json doc;
  doc["acceptance_rate"] = diag.acceptance_rate;
  doc["iterations"] = diag.iterations;
  doc["burn_in"] = diag.burn_in;
  doc["kept"] = diag.kept;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& p : diag.params) {
    nlohmann::ordered_json entry;
    entry["mean"] = p.mean;
    entry["stddev"] = p.stddev;
    nlohmann::ordered_json quantiles;
    for (std::size_t q = 0; q < kSummaryQuantiles.size(); ++q)
      quantiles[fmt::format("{:g}", 100.0 * kSummaryQuantiles[q])] = p.quantiles[q];
    entry["quantiles"] = quantiles;
    entry["histogram"] = {{"edges", p.hist.edges}, {"counts", p.hist.counts}};
    params[p.name] = entry;
  }
  doc["parameters"] = params;
  return doc;
}

}  // namespace ssm
