#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace kgsim {

/// Sparse degree -> entity count map.
class DegreeHistogram {
 public:
  DegreeHistogram() = default;

  template <typename Range>
  static DegreeHistogram from_degrees(const Range& degrees) {
    DegreeHistogram histogram;
    for (auto degree : degrees) {
      if (degree > 0) histogram.add(static_cast<std::uint64_t>(degree));
    }
    return histogram;
  }

  void add(std::uint64_t degree, std::uint64_t count = 1);

  const std::map<std::uint64_t, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(std::uint64_t degree) const;
  std::uint64_t entities() const { return entities_; }
  /// Sum of degree * count, i.e. the facts covered.
  std::uint64_t facts() const { return facts_; }
  std::uint64_t max_degree() const { return counts_.empty() ? 0 : counts_.rbegin()->first; }
  bool empty() const { return entities_ == 0; }

  double probability(std::uint64_t degree) const;
  std::vector<std::pair<std::uint64_t, double>> normalized() const;

  friend bool operator==(const DegreeHistogram&, const DegreeHistogram&) = default;

 private:
  std::map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t entities_ = 0;
  std::uint64_t facts_ = 0;
};

/// Columns `degree,count,probability`.
void write_histogram_csv(const std::filesystem::path& path, const DegreeHistogram& histogram);
DegreeHistogram read_histogram_csv(const std::filesystem::path& path);

}  // namespace kgsim
