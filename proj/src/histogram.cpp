#include "kgsim/histogram.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>

#include "kgsim/csv.hpp"
#include "kgsim/types.hpp"

namespace kgsim {

void DegreeHistogram::add(std::uint64_t degree, std::uint64_t count) {
  if (degree == 0 || count == 0) return;
  counts_[degree] += count;
  entities_ += count;
  facts_ += degree * count;
}

std::uint64_t DegreeHistogram::count(std::uint64_t degree) const {
  const auto it = counts_.find(degree);
  return it == counts_.end() ? 0 : it->second;
}

double DegreeHistogram::probability(std::uint64_t degree) const {
  if (entities_ == 0) return 0.0;
  return static_cast<double>(count(degree)) / static_cast<double>(entities_);
}

std::vector<std::pair<std::uint64_t, double>> DegreeHistogram::normalized() const {
  std::vector<std::pair<std::uint64_t, double>> out;
  out.reserve(counts_.size());
  for (const auto& [degree, count] : counts_) {
    out.emplace_back(degree, static_cast<double>(count) / static_cast<double>(entities_));
  }
  return out;
}

void write_histogram_csv(const std::filesystem::path& path, const DegreeHistogram& histogram) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << "degree,count,probability\n";
  for (const auto& [degree, count] : histogram.counts()) {
    out << degree << ',' << count << ',' << csv::number(histogram.probability(degree)) << '\n';
  }
  if (!out) throw IoError(fmt::format("write failed on '{}'", path.string()));
}

DegreeHistogram read_histogram_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::size_t degree_col = table.column("degree");
  const std::size_t count_col = table.column("count");
  DegreeHistogram histogram;
  for (const auto& row : table.rows) {
    histogram.add(std::stoull(row.at(degree_col)), std::stoull(row.at(count_col)));
  }
  return histogram;
}

}  // namespace kgsim
