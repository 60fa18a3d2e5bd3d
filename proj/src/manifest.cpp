#include "kgsim/manifest.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <sys/resource.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <vector>

#include "kgsim/types.hpp"

namespace kgsim {

void to_json(nlohmann::json& out, const RunManifest& m) {
  out = nlohmann::json{{"subcommand", m.subcommand},
                       {"config", m.config},
                       {"seed", m.seed},
                       {"input_digests", m.input_digests},
                       {"tool_version", m.tool_version},
                       {"wall_seconds", m.wall_seconds},
                       {"peak_rss_kb", m.peak_rss_kb}};
}

void from_json(const nlohmann::json& in, RunManifest& m) {
  in.at("subcommand").get_to(m.subcommand);
  m.config = in.at("config");
  m.seed = in.value("seed", std::uint64_t{0});
  m.input_digests = in.value("input_digests", std::map<std::string, std::string>{});
  m.tool_version = in.value("tool_version", std::string{});
  m.wall_seconds = in.value("wall_seconds", 0.0);
  m.peak_rss_kb = in.value("peak_rss_kb", std::uint64_t{0});
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for hashing", path.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 unavailable");
  std::vector<char> buffer(std::size_t{1} << 20);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::string hex;
  for (unsigned i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::uint64_t peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<std::uint64_t>(usage.ru_maxrss);
}

ManifestRecorder::ManifestRecorder(std::string subcommand, nlohmann::json config, std::uint64_t seed)
    : start_(std::chrono::steady_clock::now()) {
  manifest_.subcommand = std::move(subcommand);
  manifest_.config = std::move(config);
  manifest_.seed = seed;
}

void ManifestRecorder::add_input(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().filename() != kManifestFile) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) manifest_.input_digests[file.string()] = sha256_file(file);
  } else {
    manifest_.input_digests[path.string()] = sha256_file(path);
  }
}

void ManifestRecorder::write(const std::filesystem::path& dir) {
  manifest_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  manifest_.peak_rss_kb = peak_rss_kb();
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / kManifestFile);
  if (!out) throw IoError(fmt::format("cannot write manifest in '{}'", dir.string()));
  out << nlohmann::json(manifest_).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open manifest '{}'", path.string()));
  return nlohmann::json::parse(in).get<RunManifest>();
}

bool is_manifest(const nlohmann::json& document) {
  return document.is_object() && document.contains("subcommand") && document.contains("config");
}

}  // namespace kgsim
