// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ssm/damper.hpp"
#include "ssm/kalman.hpp"
#include "ssm/parallel.hpp"
#include "ssm/pmh.hpp"
#include "ssm/rbpf.hpp"
#include "ssm/reference_models.hpp"
#include "ssm/resampling.hpp"
#include "ssm/smc.hpp"
#include "clg_instances.hpp"
#include "cli_support.hpp"
#include "lgss_grid.hpp"
#include "support.hpp"

using namespace ssm;
using namespace ssm::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Replicate log_z values on child(r) of `root`, in parallel.
std::vector<double> replicate(std::size_t reps, const RngStream& root, const std::function<double(RngStream)>& run) {
  std::vector<double> out(reps);
  parallel_for(reps, [&](std::size_t r) { out[r] = run(root.child(r)); });
  return out;
}

// mean of z_hat / z_exact within 4 SE of one.
Outcome unbiased(const std::vector<double>& log_z, double exact) {
  const auto m = moments(ratios(log_z, exact));
  const double dev = std::abs(m.mean - 1.0);
  return {dev <= 4.0 * m.se, fmt::format("mean ratio {:.5f}, |dev| {:.2e}, 4SE {:.2e}", m.mean, dev, 4.0 * m.se)};
}

ScalarLgssModel lgss_model() { return ScalarLgssModel(ScalarLgssConfig{}); }

Outcome criterion_1() {
  const ScalarLgssModel model = lgss_model();
  const ParamVector theta = model.true_theta();
  const Dataset data = simulate(model, theta, 20, RngStream(101));
  const double exact = log_likelihood(model.lgss_params(theta), data);
  const auto log_z = replicate(10000, RngStream(1), [&](RngStream rng) {
    return bootstrap_pf(model, theta, data, 500, Resampler::systematic, rng).estimate.log_z;
  });
  return unbiased(log_z, exact);
}

Outcome criterion_2() {
  const ScalarLgssModel model = lgss_model();
  const ParamVector theta = model.true_theta();
  const Dataset data = simulate(model, theta, 5, RngStream(102));
  const double exact = log_likelihood(model.lgss_params(theta), data);
  const auto log_z = replicate(
      200, RngStream(2), [&](RngStream rng) { return vanilla_mc_loglik(model, theta, data, 100000, rng).log_z; });
  return unbiased(log_z, exact);
}

Outcome criterion_3() {
  DamperConfig cfg;
  cfg.horizon = 200;
  const DamperModel model(cfg);
  const ParamVector theta = damper_true_theta(cfg);
  const Dataset data = simulate_damper(cfg, 103);
  const RngStream root(3);
  const auto pf = replicate(1000, root, [&](RngStream rng) {
    return bootstrap_pf(model, theta, data, 256, Resampler::systematic, rng).estimate.log_z;
  });
  const auto vanilla =
      replicate(1000, root, [&](RngStream rng) { return vanilla_mc_loglik(model, theta, data, 256, rng).log_z; });

  // Common scale: z_hat relative to exp(max over both runs).
  const double ref = std::max(*std::max_element(pf.begin(), pf.end()), *std::max_element(vanilla.begin(), vanilla.end()));
  const auto m_pf = moments(ratios(pf, ref));
  const auto m_van = moments(ratios(vanilla, ref));
  const bool variance_ok = m_pf.variance <= m_van.variance / 5.0;
  const double gap = std::abs(m_pf.mean - m_van.mean);
  const double tol = 4.0 * std::hypot(m_pf.se, m_van.se);
  return {variance_ok && gap <= tol,
          fmt::format("Var ratio vanilla/pf {:.1f}, mean gap {:.3e} vs 4SE {:.3e}", m_van.variance / m_pf.variance, gap,
                      tol)};
}

Outcome criterion_4() {
  const std::array<double, 3> w{0.5, 0.3, 0.2};
  constexpr std::size_t kTrials = 100000;
  std::array<std::array<double, 3>, 3> var{};
  std::array<std::array<double, 3>, 3> var_se{};
  bool ok = true;
  std::string detail;
  const std::array<Resampler, 3> schemes{Resampler::multinomial, Resampler::stratified, Resampler::systematic};
  for (std::size_t s = 0; s < 3; ++s) {
    std::array<std::vector<double>, 3> fractions;
    RngStream rng(400 + s);
    for (std::size_t trial = 0; trial < kTrials; ++trial) {
      const auto ancestors = resample(schemes[s], w, rng);
      std::array<double, 3> counts{};
      for (std::size_t a : ancestors) counts[a] += 1.0;
      for (std::size_t i = 0; i < 3; ++i) fractions[i].push_back(counts[i] / 3.0);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const auto m = moments(fractions[i]);
      if (std::abs(m.mean - w[i]) > 4.0 * m.se + 1e-15) {
        ok = false;
        detail += fmt::format(" {} weight {} mean {:.5f};", to_string(schemes[s]), i, m.mean);
      }
      var[s][i] = m.variance;
      var_se[s][i] = variance_se(fractions[i]);
    }
  }
  // systematic <= stratified <= multinomial, one-sided at 4 SE.
  for (std::size_t i = 0; i < 3; ++i) {
    if (var[2][i] - var[1][i] > 4.0 * std::hypot(var_se[2][i], var_se[1][i])) ok = false;
    if (var[1][i] - var[0][i] > 4.0 * std::hypot(var_se[1][i], var_se[0][i])) ok = false;
  }
  detail += fmt::format(" copy-fraction variance of weight 0.5: multinomial {:.4f}, stratified {:.4f}, systematic {:.4f}",
                        var[0][0], var[1][0], var[2][0]);
  return {ok, detail};
}

Outcome criterion_5() {
  ScalarLgssConfig cfg;
  cfg.horizon = 100;
  const ScalarLgssModel model(cfg);
  const Dataset data = simulate(model, model.true_theta(), 100, RngStream(105));
  const LgssGridPosterior grid(model, data, 2000);

  PmhOptions options;
  options.iterations = 20000;
  options.particles = 200;
  options.seed = 5;
  const Chain chain = run_pmh(model, data, ProposalSpec(model.schema(), {WalkSpec{0.1, -1.0, 1.0}}), options);
  const std::size_t burn = default_burn_in(chain);
  std::vector<double> phi;
  for (std::size_t m = burn; m < chain.records.size(); ++m) phi.push_back(chain.records[m].theta[0]);
  const double ks = grid.ks_distance(phi);
  const double mean_err = std::abs(moments(phi).mean - grid.mean());
  return {ks < 0.05 && mean_err < 0.02,
          fmt::format("KS {:.4f}, posterior mean error {:.4f}, grid mean {:.4f}", ks, mean_err, grid.mean())};
}

Outcome criterion_6() {
  DamperConfig cfg;
  cfg.horizon = 100;
  const DamperModel model(cfg);
  const Dataset data = simulate_damper(cfg, 106);
  PmhOptions options;
  options.iterations = 1000;
  options.particles = 64;
  options.seed = 6;
  const Chain chain = run_pmh(model, data, damper_proposal(), options);
  std::size_t rejected = 0;
  std::size_t violations = 0;
  for (std::size_t m = 1; m < chain.records.size(); ++m) {
    const ChainRecord& now = chain.records[m];
    if (now.accepted) continue;
    ++rejected;
    const ChainRecord& held = chain.records[m - 1];
    bool same = std::bit_cast<std::uint64_t>(now.log_z) == std::bit_cast<std::uint64_t>(held.log_z);
    for (std::size_t i = 0; i < now.theta.size(); ++i)
      same = same && std::bit_cast<std::uint64_t>(now.theta[i]) == std::bit_cast<std::uint64_t>(held.theta[i]);
    violations += same ? 0 : 1;
  }
  return {chain.records.size() == 1001 && rejected > 0 && violations == 0,
          fmt::format("{} rejected iterations, {} changed the held pair", rejected, violations)};
}

Outcome criterion_7() {
  const ScalarLgssModel model = lgss_model();
  const ParamVector theta = model.true_theta();
  const Dataset data = simulate(model, theta, 100, RngStream(107));
  const RngStream root(7);
  const auto boot = replicate(1000, root, [&](RngStream rng) {
    return bootstrap_pf(model, theta, data, 64, Resampler::systematic, rng).estimate.log_z;
  });
  const auto apf = replicate(
      1000, root, [&](RngStream rng) { return fully_adapted_apf(model, theta, data, 64, Resampler::systematic, rng).log_z; });
  const double v_boot = moments(boot).variance;
  const double v_apf = moments(apf).variance;
  const bool variance_ok = v_apf <= v_boot + 4.0 * std::hypot(variance_se(apf), variance_se(boot));

  // Both estimators at the criterion-1 settings.
  const Dataset small = simulate(model, theta, 20, RngStream(101));
  const double exact = log_likelihood(model.lgss_params(theta), small);
  const auto boot_u = replicate(10000, RngStream(71), [&](RngStream rng) {
    return bootstrap_pf(model, theta, small, 500, Resampler::systematic, rng).estimate.log_z;
  });
  const auto apf_u = replicate(10000, RngStream(72), [&](RngStream rng) {
    return fully_adapted_apf(model, theta, small, 500, Resampler::systematic, rng).log_z;
  });
  const Outcome ub = unbiased(boot_u, exact);
  const Outcome ua = unbiased(apf_u, exact);
  return {variance_ok && ub.pass && ua.pass,
          fmt::format("Var log z: apf {:.4f}, bootstrap {:.4f}; unbiased bootstrap [{}], apf [{}]", v_apf, v_boot,
                      ub.detail, ua.detail)};
}

Outcome criterion_8() {
  RngStream rng(2718);
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const ClgModel model = deterministic_nonlinear_instance(rng);
    const ClgJointModel joint(model);
    const Dataset data = simulate(joint, ParamVector(), 25, rng.child(instance));
    const double exact = induced_kalman_log_z(model, data);
    const double log_z = rbpf_loglik(model, data, 1, Resampler::systematic, RngStream(instance)).estimate.log_z;
    worst = std::max(worst, std::abs(log_z - exact));
  }
  return {worst < 1e-8, fmt::format("max |log z_rbpf - log z_kalman| = {:.3e} over 20 instances", worst)};
}

Outcome criterion_9() {
  DamperConfig cfg;
  cfg.horizon = 500;
  const DamperModel model(cfg);
  const Dataset data = simulate_damper(cfg, 109);
  PmhOptions options;
  options.iterations = 10000;
  options.particles = 256;
  options.seed = 9;
  // From a distant prior draw the N = 256 estimate is so noisy (var log z in the
  // thousands) that the chain freezes on one lucky overestimate; start at theta*.
  const ParamVector star = damper_true_theta(cfg);
  options.theta0 = star;
  const Chain chain = run_pmh(model, data, damper_proposal(), options);
  const ChainDiagnostics diag = diagnostics(chain, default_burn_in(chain));
  int inside = 0;
  std::string detail;
  for (std::size_t i = 0; i < diag.params.size(); ++i) {
    const auto& p = diag.params[i];
    const bool in = star[i] >= p.quantiles.front() && star[i] <= p.quantiles.back();
    inside += in ? 1 : 0;
    detail += fmt::format("{} {} in [{:.4g}, {:.4g}]{}; ", p.name, star[i], p.quantiles.front(), p.quantiles.back(),
                          in ? "" : " MISS");
  }
  const bool rate_ok = diag.acceptance_rate >= 0.05 && diag.acceptance_rate <= 0.6;
  return {inside >= 3 && rate_ok, detail + fmt::format("acceptance {:.3f}", diag.acceptance_rate)};
}

Outcome criterion_10() {
  TempDir dir;
  const std::string obs = dir / "obs.csv";
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--model", "damper", "--end-time", "100", "--seed", "10", "-o", obs},
      {"loglik", "--obs-file", obs, "--method", "pf", "--nparticles", "64", "--reps", "24", "--seed", "10", "-o",
       dir / "pf.csv"},
      {"loglik", "--obs-file", obs, "--method", "vanilla", "--nparticles", "64", "--reps", "24", "--seed", "10", "-o",
       dir / "vanilla.csv"},
      {"loglik", "--obs-file", obs, "--method", "apf", "--nparticles", "64", "--reps", "24", "--seed", "10", "-o",
       dir / "apf.csv"},
      {"sample", "--obs-file", obs, "--nsamples", "100", "--nparticles", "64", "--seed", "7", "--trajectory-file",
       dir / "traj.csv", "-o", dir / "chain.csv"},
  };
  std::map<std::string, std::string> reference;
  std::size_t compared = 0;
  for (int threads : {1, 2, 4}) {
    ThreadsEnv env(threads);
    for (int repeat = 0; repeat < 2; ++repeat) {
      clear_dir(dir.path());
      for (const auto& args : commands) {
        const CliResult r = run_cli(args);
        if (r.code != 0) return {false, fmt::format("{} exited {}: {}", args.front(), r.code, r.err)};
      }
      auto files = snapshot(dir.path());
      if (reference.empty()) {
        reference = std::move(files);
      } else {
        if (files != reference)
          return {false, fmt::format("outputs differ at SSM_SMC_THREADS={} (run {})", threads, repeat + 1)};
        ++compared;
      }
    }
  }
  return {true, fmt::format("{} files byte-identical across {} repeated runs at 1, 2 and 4 threads", reference.size(),
                            compared + 1)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"PF unbiased vs Kalman (LGSS, T=20, N=500, 1e4 reps)", criterion_1},
      {"vanilla MC unbiased (LGSS, T=5, N=1e5, 200 reps)", criterion_2},
      {"damper PF vs vanilla variance (T=200, N=256, R=1000)", criterion_3},
      {"resampling unbiased and variance ordered", criterion_4},
      {"PMH matches the grid posterior (LGSS, M=2e4, N=200)", criterion_5},
      {"rejections keep the held pair bitwise", criterion_6},
      {"APF variance <= bootstrap variance, both unbiased", criterion_7},
      {"RBPF with N=1 equals Kalman on deterministic x^n", criterion_8},
      {"damper PMH end to end (T=500, M=1e4, N=256)", criterion_9},
      {"CLI outputs independent of thread count", criterion_10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += outcome.pass ? 0 : 1;
    std::cout << fmt::format("criterion {:2}: {} - {} ({:.1f} s) {}\n", i + 1, outcome.pass ? "PASS" : "FAIL",
                             criteria[i].first, secs, outcome.detail)
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
