#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kgsim/types.hpp"

namespace kgsim::testing {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(KGSIM_TEST_DATA) / name; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kgsim_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace kgsim::testing
