#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace kgsim {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kToolVersion = "0.3.0";

/// Record of one subcommand run. `config` holds every resolved option, so
/// passing the manifest back through --config reruns the same computation.
struct RunManifest {
  std::string subcommand;  // e.g. "evaluate ablate"
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // path -> sha256 hex
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  std::uint64_t peak_rss_kb = 0;
};

void to_json(nlohmann::json& out, const RunManifest& manifest);
void from_json(const nlohmann::json& in, RunManifest& manifest);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Peak resident set size of this process in KiB.
std::uint64_t peak_rss_kb();

/// Times a run and writes its manifest on completion.
class ManifestRecorder {
 public:
  ManifestRecorder(std::string subcommand, nlohmann::json config, std::uint64_t seed);

  /// Digests a file input; directories digest every regular file inside.
  void add_input(const std::filesystem::path& path);
  void write(const std::filesystem::path& dir);

  const RunManifest& manifest() const { return manifest_; }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

RunManifest read_manifest(const std::filesystem::path& path);
bool is_manifest(const nlohmann::json& document);

}  // namespace kgsim
