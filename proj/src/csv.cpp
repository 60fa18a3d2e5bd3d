#include "kgsim/csv.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

#include "kgsim/types.hpp"

namespace kgsim::csv {

std::string number(double value) { return fmt::format("{:.17g}", value); }

std::vector<std::string_view> split(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error(fmt::format("missing CSV column '{}'", name));
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IoError(fmt::format("'{}' is empty", path.string()));
  for (auto field : split(line)) table.header.emplace_back(field);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto& row = table.rows.emplace_back();
    for (auto field : split(line)) row.emplace_back(field);
  }
  return table;
}

}  // namespace kgsim::csv
