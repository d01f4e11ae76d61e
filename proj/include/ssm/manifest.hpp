#ifndef SSM_MANIFEST_HPP
#define SSM_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ssm {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Library version and `git describe` of the build.
std::string version_string();

/// Everything needed to reproduce a CLI run.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> arguments;  // argv after the program name
  nlohmann::ordered_json flags;        // resolved flag values
  std::uint64_t seed = 0;
  std::string started_at;  // ISO-8601 UTC
  std::string finished_at;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;

  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::string utc_timestamp();

}  // namespace ssm

#endif  // SSM_MANIFEST_HPP
