#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgsim::csv {

/// Shortest-safe full precision (17 significant digits) for golden files.
std::string number(double value);

/// Splits one CSV line on commas. Fields never contain quotes or commas here.
std::vector<std::string_view> split(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);

}  // namespace kgsim::csv
