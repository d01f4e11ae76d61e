#include "ssm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "ssm/errors.hpp"
#include "ssm/kalman.hpp"
#include "ssm/manifest.hpp"
#include "ssm/parallel.hpp"
#include "ssm/pmh.hpp"
#include "ssm/rbpf.hpp"
#include "ssm/registry.hpp"
#include "ssm/smc.hpp"

namespace ssm::cli {
namespace {

namespace fs = std::filesystem;

/// Semantically invalid flags that CLI11 cannot check on its own.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommonFlags {
  std::string model = "damper";
  std::string config;
  std::uint64_t seed = 0;
  std::string output;
};

struct SimulateFlags {
  CommonFlags common;
  std::size_t end_time = 0;  // 0: take the horizon from the model config
};

struct LoglikFlags {
  CommonFlags common;
  std::string obs_file;
  std::string method = "pf";
  std::size_t particles = 256;
  std::size_t reps = 1;
  std::string theta;
  std::string resampler = "systematic";
  std::size_t bins = 50;
};

struct SampleFlags {
  CommonFlags common;
  std::string target = "posterior";
  std::string obs_file;
  std::string method = "pf";
  std::size_t samples = 1000;
  std::size_t particles = 256;
  std::string resampler = "systematic";
  std::string proposal;
  std::string theta0;
  std::optional<std::size_t> burn_in;
  std::size_t bins = 50;
  std::string trajectory_file;
};

void add_common(CLI::App& cmd, CommonFlags& flags, bool with_config = true) {
  std::vector<std::string> names;
  for (const auto& entry : model_registry()) names.push_back(entry.name);
  cmd.add_option("--model", flags.model, "Model name")->check(CLI::IsMember(names))->capture_default_str();
  if (with_config) cmd.add_option("--config", flags.config, "Model config JSON file")->check(CLI::ExistingFile);
  cmd.add_option("--seed", flags.seed, "Random seed")->capture_default_str();
  cmd.add_option("-o,--output-file", flags.output, "Output file")->required();
}

std::vector<std::string> resampler_names() { return {"multinomial", "stratified", "systematic"}; }

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ModelInstance load_model(const CommonFlags& flags, std::vector<fs::path>& inputs) {
  nlohmann::json config;
  if (!flags.config.empty()) {
    config = read_json_file(flags.config);
    inputs.emplace_back(flags.config);
  }
  return find_model(flags.model).make(config);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

fs::path sibling(const fs::path& output, std::string_view suffix) {
  return output.parent_path() / (output.stem().string() + std::string(suffix));
}

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

ParamVector parse_theta_flag(const std::string& text, const ParamVector& base, const char* flag) {
  try {
    return parse_param_assignments(text, base);
  } catch (const Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

nlohmann::ordered_json theta_json(const ParamVector& theta) {
  nlohmann::ordered_json doc;
  for (std::size_t i = 0; i < theta.size(); ++i) doc[theta.schema().name(i)] = theta[i];
  return doc;
}

void warn_particles(std::ostream& err, std::size_t particles, std::size_t horizon) {
  if (4 * particles < horizon) {
    err << fmt::format("warning: N = {} particles is below T/4 = {}; the likelihood estimate will be very noisy\n",
                       particles, horizon / 4);
  }
}

Dataset load_observations(const std::string& path, const SsmModel& model, std::vector<fs::path>& inputs) {
  Dataset data = read_observations_csv(fs::path(path));
  inputs.emplace_back(path);
  if (data.obs_dim() != model.obs_dim()) {
    throw Error(fmt::format("'{}' has {} observation columns, model '{}' expects {}", path, data.obs_dim(),
                            model.name(), model.obs_dim()));
  }
  return data;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const SimulateFlags& flags, const std::vector<std::string>& args, std::ostream& out) {
  RunManifest manifest;
  manifest.subcommand = "simulate";
  manifest.arguments = args;
  manifest.seed = flags.common.seed;
  manifest.started_at = utc_timestamp();

  const ModelInstance instance = load_model(flags.common, manifest.inputs);
  const std::size_t horizon = flags.end_time > 0 ? flags.end_time : instance.horizon;
  if (horizon == 0) throw UsageError("the horizon must be at least 1");

  const Dataset data = simulate(*instance.model, instance.true_theta, horizon, RngStream(flags.common.seed));
  const fs::path obs_path(flags.common.output);
  const fs::path truth_path = sibling(obs_path, ".truth.csv");
  write_observations_csv(obs_path, data);
  write_truth_csv(truth_path, data);

  manifest.flags = {{"model", flags.common.model},
                    {"config", instance.config},
                    {"end_time", horizon},
                    {"theta", theta_json(instance.true_theta)}};
  manifest.outputs = {obs_path, truth_path};
  manifest.finished_at = utc_timestamp();
  manifest.write(manifest_path(obs_path));
  out << fmt::format("wrote {} observations to {}\n", horizon, obs_path.string());
  return kExitOk;
}

// ------------------------------------------------------------------ loglik

struct Estimator {
  std::function<double(const RngStream&)> run;
};

Estimator make_estimator(const SsmModel& model, const ParamVector& theta, const Dataset& data, Method method,
                         std::size_t particles, Resampler scheme) {
  switch (method) {
    case Method::vanilla:
      return {[&, particles](const RngStream& rng) {
        return vanilla_mc_loglik(model, theta, data, particles, rng).log_z;
      }};
    case Method::bootstrap:
      return {[&, particles, scheme](const RngStream& rng) {
        return bootstrap_pf(model, theta, data, particles, scheme, rng).estimate.log_z;
      }};
    case Method::apf: {
      const auto* adapted = dynamic_cast<const AdaptedSsmModel*>(&model);
      if (adapted == nullptr)
        throw CapabilityError(fmt::format("method apf needs model '{}' to provide the adapted transition "
                                          "p(x_t | x_t-1, y_t) and predictive p(y_t | x_t-1)",
                                          model.name()));
      return {[adapted, &theta, &data, particles, scheme](const RngStream& rng) {
        return fully_adapted_apf(*adapted, theta, data, particles, scheme, rng).log_z;
      }};
    }
    case Method::rbpf: {
      const auto* form = dynamic_cast<const ConditionallyLinearForm*>(&model);
      if (form == nullptr)
        throw CapabilityError(
            fmt::format("method rbpf needs model '{}' to provide a conditionally linear-Gaussian form", model.name()));
      auto clg = std::make_shared<const ClgModel>(form->clg_model(theta));
      return {[clg, &data, particles, scheme](const RngStream& rng) {
        return rbpf_loglik(*clg, data, particles, scheme, rng).estimate.log_z;
      }};
    }
    case Method::kalman: {
      const auto* form = dynamic_cast<const LinearGaussianForm*>(&model);
      if (form == nullptr)
        throw CapabilityError(
            fmt::format("method kalman needs model '{}' to provide a linear-Gaussian form", model.name()));
      const double exact = log_likelihood(form->lgss_params(theta), data);
      return {[exact](const RngStream&) { return exact; }};
    }
  }
  throw Error("unhandled method");
}

nlohmann::ordered_json loglik_summary(const std::vector<double>& log_z) {
  std::vector<double> sorted = log_z;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(log_z.size());
  // Shifted by the first replicate so identical replicates give exactly zero variance.
  const double shift = std::isfinite(log_z.front()) ? log_z.front() : 0.0;
  double mean = 0.0;
  for (double v : log_z) mean += v - shift;
  mean = shift + mean / n;
  double ss = 0.0;
  for (double v : log_z) ss += (v - mean) * (v - mean);
  const double variance = log_z.size() > 1 ? ss / (n - 1.0) : 0.0;

  // Moments of z_hat relative to the largest replicate, so T = 1000 does not underflow.
  const double top = sorted.back();
  double w_mean = 0.0;
  double w_sq = 0.0;
  if (std::isfinite(top)) {
    for (double v : log_z) {
      const double w = std::exp(v - top);
      w_mean += w;
      w_sq += w * w;
    }
    w_mean /= n;
    w_sq /= n;
  }
  const double z_var = log_z.size() > 1 ? (w_sq - w_mean * w_mean) * n / (n - 1.0) : 0.0;

  nlohmann::ordered_json doc;
  nlohmann::ordered_json lz;
  lz["mean"] = mean;
  lz["variance"] = variance;
  nlohmann::ordered_json q;
  for (double p : kSummaryQuantiles) q[fmt::format("{:g}", 100.0 * p)] = quantile(sorted, p);
  lz["quantiles"] = q;
  doc["log_z"] = lz;
  nlohmann::ordered_json zh;
  zh["log_mean"] = std::isfinite(top) ? top + std::log(w_mean) : -kInf;
  zh["relative_variance"] = w_mean > 0.0 ? z_var / (w_mean * w_mean) : std::nan("");
  zh["standard_error_relative"] = w_mean > 0.0 ? std::sqrt(z_var / n) / w_mean : std::nan("");
  doc["z_hat"] = zh;
  return doc;
}

int cmd_loglik(const LoglikFlags& flags, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  RunManifest manifest;
  manifest.subcommand = "loglik";
  manifest.arguments = args;
  manifest.seed = flags.common.seed;
  manifest.started_at = utc_timestamp();

  const ModelInstance instance = load_model(flags.common, manifest.inputs);
  const SsmModel& model = *instance.model;
  const Dataset data = load_observations(flags.obs_file, model, manifest.inputs);
  const ParamVector theta = parse_theta_flag(flags.theta, instance.true_theta, "--theta");
  const Method method = parse_method(flags.method);
  const Resampler scheme = parse_resampler(flags.resampler);
  if (method == Method::bootstrap || method == Method::apf || method == Method::rbpf)
    warn_particles(err, flags.particles, data.horizon());

  const Estimator estimator = make_estimator(model, theta, data, method, flags.particles, scheme);
  std::vector<double> log_z(flags.reps);
  const RngStream root(flags.common.seed);
  parallel_for(flags.reps, [&](std::size_t r) { log_z[r] = estimator.run(root.child(r)); });

  const fs::path table_path(flags.common.output);
  const fs::path summary_path = sibling(table_path, ".summary.json");
  const fs::path hist_path = sibling(table_path, ".hist.csv");
  {
    auto file = open_output(table_path);
    file << "rep,log_z\n";
    for (std::size_t r = 0; r < log_z.size(); ++r) file << fmt::format("{},{:.17g}\n", r, log_z[r]);
    finish_output(file, table_path);
  }
  {
    nlohmann::ordered_json summary;
    summary["model"] = flags.common.model;
    summary["method"] = std::string(to_string(method));
    summary["particles"] = flags.particles;
    summary["reps"] = flags.reps;
    summary["horizon"] = data.horizon();
    summary["resampler"] = std::string(to_string(scheme));
    summary["theta"] = theta_json(theta);
    summary.update(loglik_summary(log_z));
    auto file = open_output(summary_path);
    file << summary.dump(2) << '\n';
    finish_output(file, summary_path);
  }
  {
    std::vector<double> finite;
    for (double v : log_z)
      if (std::isfinite(v)) finite.push_back(v);
    const Histogram hist = histogram(finite, flags.bins);
    auto file = open_output(hist_path);
    file << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
      file << fmt::format("{:.17g},{:.17g},{}\n", hist.edges[b], hist.edges[b + 1], hist.counts[b]);
    finish_output(file, hist_path);
  }

  manifest.flags = {{"model", flags.common.model},
                    {"config", instance.config},
                    {"obs_file", flags.obs_file},
                    {"method", std::string(to_string(method))},
                    {"nparticles", flags.particles},
                    {"reps", flags.reps},
                    {"theta", theta_json(theta)},
                    {"resampler", std::string(to_string(scheme))},
                    {"bins", flags.bins}};
  manifest.outputs = {table_path, summary_path, hist_path};
  manifest.finished_at = utc_timestamp();
  manifest.write(manifest_path(table_path));
  out << fmt::format("wrote {} log-likelihood replicates to {}\n", flags.reps, table_path.string());
  return kExitOk;
}

// ------------------------------------------------------------------ sample

ProposalSpec apply_proposal_overrides(ProposalSpec spec, const std::string& text) {
  if (text.empty()) return spec;
  std::vector<double> current;
  for (std::size_t i = 0; i < spec.schema().size(); ++i) current.push_back(spec.walk(i).stddev);
  const auto shared = std::make_shared<const ParamSchema>(spec.schema());
  const ParamVector stddevs = parse_theta_flag(text, ParamVector(shared, current), "--proposal");
  try {
    for (std::size_t i = 0; i < stddevs.size(); ++i) spec.set_stddev(shared->name(i), stddevs[i]);
  } catch (const Error& e) {
    throw UsageError(std::string("--proposal: ") + e.what());
  }
  return spec;
}

void write_trajectories(const fs::path& path, const Chain& chain, std::size_t state_dim) {
  auto file = open_output(path);
  file << "m,t";
  for (std::size_t d = 0; d < state_dim; ++d) file << ",x" << d;
  file << '\n';
  for (const auto& traj : chain.trajectories) {
    const std::size_t steps = traj.states.size() / state_dim;
    for (std::size_t t = 0; t < steps; ++t) {
      file << traj.m << ',' << t;
      for (std::size_t d = 0; d < state_dim; ++d) file << fmt::format(",{:.17g}", traj.states[t * state_dim + d]);
      file << '\n';
    }
  }
  finish_output(file, path);
}

int cmd_sample(const SampleFlags& flags, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  RunManifest manifest;
  manifest.subcommand = "sample";
  manifest.arguments = args;
  manifest.seed = flags.common.seed;
  manifest.started_at = utc_timestamp();

  const ModelInstance instance = load_model(flags.common, manifest.inputs);
  const SsmModel& model = *instance.model;
  const Dataset data = load_observations(flags.obs_file, model, manifest.inputs);
  const ProposalSpec proposal = apply_proposal_overrides(instance.proposal, flags.proposal);
  if (flags.burn_in && *flags.burn_in > flags.samples) throw UsageError("--burn-in must not exceed --nsamples");

  PmhOptions options;
  options.iterations = flags.samples;
  options.particles = flags.particles;
  options.resampler = parse_resampler(flags.resampler);
  options.method = parse_method(flags.method);
  options.seed = flags.common.seed;
  options.store_trajectories = !flags.trajectory_file.empty();
  if (options.store_trajectories && options.method == Method::apf)
    throw UsageError("--trajectory-file requires --method pf");
  if (!flags.theta0.empty()) options.theta0 = parse_theta_flag(flags.theta0, instance.true_theta, "--theta0");
  warn_particles(err, flags.particles, data.horizon());

  const Chain chain = run_pmh(model, data, proposal, options);
  const std::size_t burn_in = flags.burn_in.value_or(default_burn_in(chain));
  const ChainDiagnostics diag = diagnostics(chain, burn_in, flags.bins);

  const fs::path chain_path(flags.common.output);
  const fs::path summary_path = sibling(chain_path, ".summary.json");
  {
    auto file = open_output(chain_path);
    write_chain_csv(file, chain);
    finish_output(file, chain_path);
  }
  {
    nlohmann::ordered_json summary;
    summary["model"] = flags.common.model;
    summary["method"] = std::string(to_string(options.method));
    summary["particles"] = flags.particles;
    summary["resampler"] = std::string(to_string(options.resampler));
    summary["horizon"] = data.horizon();
    summary["theta0"] = theta_json(chain.records.front().theta);
    summary.update(to_json(diag));
    auto file = open_output(summary_path);
    file << summary.dump(2) << '\n';
    finish_output(file, summary_path);
  }
  manifest.outputs = {chain_path, summary_path};
  if (options.store_trajectories) {
    write_trajectories(flags.trajectory_file, chain, model.state_dim());
    manifest.outputs.emplace_back(flags.trajectory_file);
  }

  nlohmann::ordered_json walks;
  for (std::size_t i = 0; i < proposal.schema().size(); ++i) {
    const WalkSpec& w = proposal.walk(i);
    walks[proposal.schema().name(i)] = {{"stddev", w.stddev},
                                        {"lo", std::isfinite(w.lo) ? nlohmann::json(w.lo) : nlohmann::json("-inf")},
                                        {"hi", std::isfinite(w.hi) ? nlohmann::json(w.hi) : nlohmann::json("inf")}};
  }
  manifest.flags = {{"target", flags.target},
                    {"model", flags.common.model},
                    {"config", instance.config},
                    {"obs_file", flags.obs_file},
                    {"method", std::string(to_string(options.method))},
                    {"nsamples", flags.samples},
                    {"nparticles", flags.particles},
                    {"resampler", std::string(to_string(options.resampler))},
                    {"proposal", walks},
                    {"theta0", theta_json(chain.records.front().theta)},
                    {"burn_in", burn_in},
                    {"bins", flags.bins},
                    {"trajectory_file", flags.trajectory_file}};
  manifest.finished_at = utc_timestamp();
  manifest.write(manifest_path(chain_path));
  out << fmt::format("wrote {} records to {} (acceptance rate {:.3f})\n", chain.records.size(), chain_path.string(),
                     diag.acceptance_rate);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Sequential Monte Carlo likelihood estimation and particle Metropolis-Hastings", "ssm-smc");
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate observations and the true states");
  add_common(*simulate_cmd, sim.common);
  simulate_cmd->add_option("--end-time", sim.end_time, "Number of time steps T (default: from the config)")
      ->check(CLI::PositiveNumber);

  LoglikFlags ll;
  auto* loglik_cmd = app.add_subcommand("loglik", "Replicate log-likelihood estimates at a fixed theta");
  add_common(*loglik_cmd, ll.common);
  loglik_cmd->add_option("--obs-file", ll.obs_file, "Observation CSV")->required()->check(CLI::ExistingFile);
  loglik_cmd->add_option("--method", ll.method, "Estimator")
      ->check(CLI::IsMember({"vanilla", "pf", "bootstrap", "apf", "rbpf", "kalman"}))
      ->capture_default_str();
  loglik_cmd->add_option("--nparticles", ll.particles, "Particles N")->check(CLI::PositiveNumber)->capture_default_str();
  loglik_cmd->add_option("--reps", ll.reps, "Replicates R")->check(CLI::PositiveNumber)->capture_default_str();
  loglik_cmd->add_option("--theta", ll.theta, "Parameter overrides, e.g. k=2,p=0.5 (default: config values)");
  loglik_cmd->add_option("--resampler", ll.resampler, "Resampling scheme")
      ->check(CLI::IsMember(resampler_names()))
      ->capture_default_str();
  loglik_cmd->add_option("--bins", ll.bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();

  SampleFlags sm;
  auto* sample_cmd = app.add_subcommand("sample", "Particle Metropolis-Hastings over the model parameters");
  add_common(*sample_cmd, sm.common);
  sample_cmd->add_option("--target", sm.target, "Sampling target")
      ->check(CLI::IsMember({"posterior"}))
      ->capture_default_str();
  sample_cmd->add_option("--obs-file", sm.obs_file, "Observation CSV")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--nsamples", sm.samples, "PMH iterations M")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--nparticles", sm.particles, "Particles N")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--method", sm.method, "Likelihood estimator inside PMH")
      ->check(CLI::IsMember({"pf", "bootstrap", "apf"}))
      ->capture_default_str();
  sample_cmd->add_option("--resampler", sm.resampler, "Resampling scheme")
      ->check(CLI::IsMember(resampler_names()))
      ->capture_default_str();
  sample_cmd->add_option("--proposal", sm.proposal, "Random-walk stddev overrides, e.g. k=0.02,p=0.01");
  sample_cmd->add_option("--theta0", sm.theta0, "Initial parameters (unnamed entries: config values)");
  sample_cmd->add_option("--burn-in", sm.burn_in, "Records excluded from the summary (default: 10% of M)");
  sample_cmd->add_option("--bins", sm.bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--trajectory-file", sm.trajectory_file,
                         "Write one backtracked state trajectory per accepted iteration");

  std::vector<std::string> argv_storage{"ssm-smc"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(sim, args, out);
    if (loglik_cmd->parsed()) return cmd_loglik(ll, args, out, err);
    if (sample_cmd->parsed()) return cmd_sample(sm, args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ssm::cli
