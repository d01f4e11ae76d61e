#include "ssm/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "ssm/errors.hpp"

namespace ssm {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  for (;;) {
    const auto comma = line.find(',');
    fields.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::string column_name(char prefix, std::size_t i, std::size_t dim) {
  return dim == 1 && prefix == 'y' ? std::string(1, prefix) : fmt::format("{}{}", prefix, i);
}

}  // namespace

Dataset::Dataset(std::size_t obs_dim, std::vector<double> observations)
    : obs_dim_(obs_dim), observations_(std::move(observations)) {
  if (obs_dim_ == 0) throw PreconditionError("observation dimension must be positive");
  if (observations_.empty() || observations_.size() % obs_dim_ != 0) {
    throw PreconditionError("dataset needs T >= 1 complete observation rows");
  }
}

void Dataset::set_truth(std::size_t state_dim, std::vector<double> states) {
  if (state_dim == 0 || states.size() != state_dim * (horizon() + 1)) {
    throw PreconditionError("truth must hold T+1 states of equal dimension");
  }
  state_dim_ = state_dim;
  true_states_ = std::move(states);
}

Dataset Dataset::truncated(std::size_t new_horizon) const {
  if (new_horizon == 0 || new_horizon > horizon()) throw PreconditionError("invalid truncation horizon");
  Dataset out(obs_dim_, {observations_.begin(), observations_.begin() + static_cast<std::ptrdiff_t>(new_horizon * obs_dim_)});
  if (has_truth()) {
    out.set_truth(state_dim_, {true_states_.begin(),
                               true_states_.begin() + static_cast<std::ptrdiff_t>((new_horizon + 1) * state_dim_)});
  }
  out.theta_true_ = theta_true_;
  return out;
}

void write_observations_csv(std::ostream& out, const Dataset& data) {
  out << 't';
  for (std::size_t i = 0; i < data.obs_dim(); ++i) out << ',' << column_name('y', i, data.obs_dim());
  out << '\n';
  for (std::size_t t = 1; t <= data.horizon(); ++t) {
    out << t;
    for (double v : data.y(t)) out << ',' << fmt::format("{:.17g}", v);
    out << '\n';
  }
}

void write_truth_csv(std::ostream& out, const Dataset& data) {
  if (!data.has_truth()) throw PreconditionError("dataset carries no truth");
  out << 't';
  for (std::size_t i = 0; i < data.state_dim(); ++i) out << ',' << column_name('x', i, data.state_dim());
  out << '\n';
  for (std::size_t t = 0; t <= data.horizon(); ++t) {
    out << t;
    for (double v : data.x_true(t)) out << ',' << fmt::format("{:.17g}", v);
    out << '\n';
  }
}

void write_observations_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_observations_csv(out, data);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_truth_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_truth_csv(out, data);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Dataset read_observations_csv(std::istream& in, const std::string& source_name) {
  const auto fail = [&](std::size_t line_no, const std::string& message) -> ParseError {
    return ParseError(fmt::format("{}:{}: {}", source_name, line_no, message));
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw fail(1, "empty file, expected header 't,y'");
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header[0]) != "t") throw fail(line_no, "header must start with 't,y'");
  const std::size_t dim = header.size() - 1;
  for (std::size_t i = 0; i < dim; ++i) {
    if (trim(header[i + 1]) != column_name('y', i, dim)) {
      throw fail(line_no, "unexpected column '" + std::string(trim(header[i + 1])) + "'");
    }
  }

  std::vector<double> values;
  std::size_t expected_t = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_commas(row);
    if (fields.size() != dim + 1) {
      throw fail(line_no, fmt::format("expected {} fields, found {}", dim + 1, fields.size()));
    }
    std::size_t t = 0;
    const auto tf = trim(fields[0]);
    const auto [tp, tec] = std::from_chars(tf.data(), tf.data() + tf.size(), t);
    if (tec != std::errc{} || tp != tf.data() + tf.size()) throw fail(line_no, "invalid time index");
    if (t != expected_t) throw fail(line_no, fmt::format("expected t={}, found t={}", expected_t, t));
    ++expected_t;
    for (std::size_t i = 1; i <= dim; ++i) {
      const auto f = trim(fields[i]);
      double v = 0.0;
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        throw fail(line_no, "invalid number '" + std::string(f) + "'");
      }
      values.push_back(v);
    }
  }
  if (values.empty()) throw fail(line_no, "no observation rows");
  return Dataset(dim, std::move(values));
}

Dataset read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_observations_csv(in, path.string());
}

}  // namespace ssm
