#include "ssm/manifest.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "ssm/errors.hpp"

#ifndef SSM_VERSION
#define SSM_VERSION "0.0.0"
#endif
#ifndef SSM_GIT_DESCRIBE
#define SSM_GIT_DESCRIBE "unknown"
#endif

namespace ssm {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  void add(const char* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &length) != 1) throw Error("SHA-256 final failed");
    std::string out;
    for (unsigned int i = 0; i < length; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 hash;
  hash.add(bytes.data(), bytes.size());
  return hash.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for hashing");
  Sha256 hash;
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    hash.add(buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return hash.hex();
}

std::string version_string() { return std::string(SSM_VERSION) + " (" + SSM_GIT_DESCRIBE + ")"; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["subcommand"] = subcommand;
  doc["arguments"] = arguments;
  doc["flags"] = flags;
  doc["seed"] = seed;
  doc["version"] = version_string();
  doc["started_at"] = started_at;
  doc["finished_at"] = finished_at;
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& path : inputs) in.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
  doc["inputs"] = in;
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& path : outputs) out.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
  doc["outputs"] = out;
  return doc;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_json().dump(2) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace ssm
