#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kgsim {

/// Term -> dense id map with first-appearance ids. Once the in-memory table
/// reaches `spill_threshold` terms it is written to a sorted run file under
/// `spill_dir` and cleared; lookups then also binary-search the memory-mapped
/// runs. Runs are merged into one when more than `max_runs` accumulate.
class TermDictionary {
 public:
  struct Options {
    std::size_t spill_threshold = 0;  // 0 keeps everything in memory
    std::filesystem::path spill_dir;
    std::size_t max_runs = 8;
  };

  TermDictionary();
  explicit TermDictionary(Options options);
  ~TermDictionary();
  TermDictionary(TermDictionary&&) noexcept;
  TermDictionary& operator=(TermDictionary&&) noexcept;

  /// Returns the id of `term` and whether it was newly assigned.
  std::pair<std::uint32_t, bool> intern(std::string_view term);
  std::optional<std::uint32_t> find(std::string_view term) const;

  std::size_t size() const { return next_id_; }
  std::size_t run_count() const;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view text) const { return std::hash<std::string_view>{}(text); }
  };
  class Run;

  void spill();
  void merge_runs();
  std::filesystem::path next_run_path();

  Options options_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> memory_;
  std::vector<std::unique_ptr<Run>> runs_;
  std::uint32_t next_id_ = 0;
  std::size_t run_serial_ = 0;
};

}  // namespace kgsim
