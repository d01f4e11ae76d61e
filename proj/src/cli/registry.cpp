#include "ssm/registry.hpp"

#include "ssm/damper.hpp"
#include "ssm/errors.hpp"
#include "ssm/reference_models.hpp"

namespace ssm {
namespace {

const nlohmann::json& or_empty(const nlohmann::json& config) {
  static const nlohmann::json empty = nlohmann::json::object();
  return config.is_null() ? empty : config;
}

ModelInstance make_damper(const nlohmann::json& config) {
  const DamperConfig cfg = damper_config_from_json(or_empty(config));
  return {std::make_shared<DamperModel>(cfg), damper_true_theta(cfg), cfg.horizon, damper_proposal(), to_json(cfg)};
}

ModelInstance make_lgss(const nlohmann::json& config) {
  const ScalarLgssConfig cfg = scalar_lgss_config_from_json(or_empty(config));
  auto model = std::make_shared<ScalarLgssModel>(cfg);
  ProposalSpec proposal(model->schema(), {WalkSpec{0.1, cfg.phi_lo, cfg.phi_hi}});
  return {model, model->true_theta(), cfg.horizon, std::move(proposal), to_json(cfg)};
}

ModelInstance make_clg(const nlohmann::json& config) {
  const ClgDemoConfig cfg = clg_demo_config_from_json(or_empty(config));
  auto model = std::make_shared<ClgDemoModel>(cfg);
  ProposalSpec proposal(model->schema(), {WalkSpec{0.1, -1.0, 1.0}});
  return {model, model->true_theta(), cfg.horizon, std::move(proposal), to_json(cfg)};
}

}  // namespace

const std::vector<ModelEntry>& model_registry() {
  static const std::vector<ModelEntry> entries{
      {"damper", "nonlinear spring-damper, parameters k, p, f_c, c_0", make_damper},
      {"lgss", "scalar linear-Gaussian AR(1) observed in noise, parameter phi", make_lgss},
      {"clg", "mixed linear/nonlinear model for the Rao-Blackwellized filter, parameter a", make_clg},
  };
  return entries;
}

const ModelEntry& find_model(std::string_view name) {
  std::string known;
  for (const auto& entry : model_registry()) {
    if (entry.name == name) return entry;
    known += (known.empty() ? "" : ", ") + entry.name;
  }
  throw Error("unknown model '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace ssm
