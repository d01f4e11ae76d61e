#ifndef SSM_PARAMS_HPP
#define SSM_PARAMS_HPP

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssm {

/// Ordered, fixed set of parameter names declared by a model.
class ParamSchema {
 public:
  ParamSchema() = default;
  explicit ParamSchema(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  /// Position of `name`; throws ssm::Error for an undeclared name.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;

  friend bool operator==(const ParamSchema&, const ParamSchema&) = default;

 private:
  std::vector<std::string> names_;
};

/// Named real vector of static model parameters.
///
/// Values are keyed by the owning model's schema. Positional access exists for
/// hot loops inside the model that declared the schema; everything crossing a
/// module boundary goes through names.
class ParamVector {
 public:
  ParamVector() : schema_(std::make_shared<const ParamSchema>()) {}
  ParamVector(std::shared_ptr<const ParamSchema> schema, std::vector<double> values);
  ParamVector(std::shared_ptr<const ParamSchema> schema,
              std::initializer_list<std::pair<std::string_view, double>> named);

  const ParamSchema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const ParamSchema>& schema_ptr() const noexcept { return schema_; }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double at(std::size_t i) const { return values_.at(i); }
  double get(std::string_view name) const { return values_[schema_->index_of(name)]; }
  void set(std::string_view name, double value) { values_[schema_->index_of(name)] = value; }
  void set(std::size_t i, double value) { values_.at(i) = value; }

  /// Bitwise equality of schema names and values.
  friend bool operator==(const ParamVector& a, const ParamVector& b);

 private:
  std::shared_ptr<const ParamSchema> schema_;
  std::vector<double> values_;
};

/// Parses "name=value,name=value" against `base`, overriding the named entries.
ParamVector parse_param_assignments(std::string_view text, ParamVector base);

}  // namespace ssm

#endif  // SSM_PARAMS_HPP
