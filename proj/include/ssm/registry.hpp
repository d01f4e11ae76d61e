#ifndef SSM_REGISTRY_HPP
#define SSM_REGISTRY_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssm/model.hpp"
#include "ssm/pmh.hpp"

namespace ssm {

/// A model built from its JSON config, with the defaults the CLI needs.
struct ModelInstance {
  std::shared_ptr<const SsmModel> model;
  ParamVector true_theta;
  std::size_t horizon = 0;
  ProposalSpec proposal;
  nlohmann::ordered_json config;  // fully resolved, defaults filled in
};

struct ModelEntry {
  std::string name;
  std::string summary;
  /// `config` may be null for the embedded defaults.
  std::function<ModelInstance(const nlohmann::json& config)> make;
};

/// damper, lgss, clg.
const std::vector<ModelEntry>& model_registry();
/// Throws ssm::Error naming the registered models when `name` is unknown.
const ModelEntry& find_model(std::string_view name);

}  // namespace ssm

#endif  // SSM_REGISTRY_HPP
