#include "ssm/params.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>

#include "ssm/errors.hpp"

namespace ssm {

ParamSchema::ParamSchema(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (std::find(names_.begin(), names_.begin() + static_cast<std::ptrdiff_t>(i), names_[i]) !=
        names_.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw Error("duplicate parameter name '" + names_[i] + "'");
    }
  }
}

std::size_t ParamSchema::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error("undeclared parameter '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool ParamSchema::contains(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

ParamVector::ParamVector(std::shared_ptr<const ParamSchema> schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  if (values_.size() != schema_->size()) {
    throw Error("parameter vector has " + std::to_string(values_.size()) + " values but schema declares " +
                std::to_string(schema_->size()));
  }
}

ParamVector::ParamVector(std::shared_ptr<const ParamSchema> schema,
                         std::initializer_list<std::pair<std::string_view, double>> named)
    : schema_(std::move(schema)), values_(schema_->size(), 0.0) {
  if (named.size() != schema_->size()) throw Error("every declared parameter must be assigned");
  std::vector<bool> seen(values_.size(), false);
  for (const auto& [name, value] : named) {
    const std::size_t i = schema_->index_of(name);
    if (seen[i]) throw Error("parameter '" + std::string(name) + "' assigned twice");
    seen[i] = true;
    values_[i] = value;
  }
}

bool operator==(const ParamVector& a, const ParamVector& b) {
  if (!(a.schema() == b.schema())) return false;
  return a.values_.size() == b.values_.size() &&
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0;
}

ParamVector parse_param_assignments(std::string_view text, ParamVector base) {
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected name=value, got '" + std::string(item) + "'");
    const std::string_view name = item.substr(0, eq);
    const std::string_view number = item.substr(eq + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec != std::errc{} || ptr != number.data() + number.size()) {
      throw ParseError("invalid number '" + std::string(number) + "' for parameter '" + std::string(name) + "'");
    }
    base.set(name, value);
  }
  return base;
}

}  // namespace ssm
