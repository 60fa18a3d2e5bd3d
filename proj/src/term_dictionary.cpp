#include "kgsim/term_dictionary.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <unistd.h>

#include <fmt/format.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <queue>

#include "kgsim/types.hpp"

namespace kgsim {

// Run layout: records [u32 id][u32 length][bytes], sorted by term, followed by
// one u64 offset per record and a trailing u64 record count.
class TermDictionary::Run {
 public:
  explicit Run(std::filesystem::path path) : path_(std::move(path)) {
    const int fd = ::open(path_.c_str(), O_RDONLY);
    if (fd < 0) throw IoError(fmt::format("cannot open dictionary run '{}'", path_.string()));
    size_ = std::filesystem::file_size(path_);
    void* base = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
    ::close(fd);
    if (base == MAP_FAILED) throw IoError(fmt::format("cannot map dictionary run '{}'", path_.string()));
    data_ = static_cast<const unsigned char*>(base);
    std::memcpy(&count_, data_ + size_ - 8, 8);
    offsets_ = data_ + size_ - 8 - 8 * count_;
  }
  ~Run() {
    ::munmap(const_cast<unsigned char*>(data_), size_);
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  std::uint64_t count() const { return count_; }

  std::pair<std::string_view, std::uint32_t> record(std::uint64_t index) const {
    std::uint64_t offset;
    std::memcpy(&offset, offsets_ + 8 * index, 8);
    std::uint32_t id;
    std::uint32_t length;
    std::memcpy(&id, data_ + offset, 4);
    std::memcpy(&length, data_ + offset + 4, 4);
    return {std::string_view(reinterpret_cast<const char*>(data_ + offset + 8), length), id};
  }

  std::optional<std::uint32_t> find(std::string_view term) const {
    std::uint64_t lo = 0;
    std::uint64_t hi = count_;
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      const auto [key, id] = record(mid);
      const int cmp = key.compare(term);
      if (cmp == 0) return id;
      if (cmp < 0) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return std::nullopt;
  }

 private:
  std::filesystem::path path_;
  const unsigned char* data_ = nullptr;
  std::size_t size_ = 0;
  std::uint64_t count_ = 0;
  const unsigned char* offsets_ = nullptr;
};

namespace {

class RunWriter {
 public:
  explicit RunWriter(const std::filesystem::path& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (file_ == nullptr) throw IoError(fmt::format("cannot create dictionary run '{}'", path.string()));
  }
  ~RunWriter() {
    if (file_ != nullptr) std::fclose(file_);
  }

  void add(std::string_view term, std::uint32_t id) {
    offsets_.push_back(position_);
    const auto length = static_cast<std::uint32_t>(term.size());
    write(&id, 4);
    write(&length, 4);
    write(term.data(), term.size());
  }

  void finish() {
    for (std::uint64_t offset : offsets_) write(&offset, 8);
    const std::uint64_t count = offsets_.size();
    write(&count, 8);
    if (std::fclose(file_) != 0) throw IoError(fmt::format("cannot close '{}'", path_.string()));
    file_ = nullptr;
  }

 private:
  void write(const void* bytes, std::size_t size) {
    if (size != 0 && std::fwrite(bytes, 1, size, file_) != size) {
      throw IoError(fmt::format("short write to '{}'", path_.string()));
    }
    position_ += size;
  }

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t position_ = 0;
};

}  // namespace

TermDictionary::TermDictionary() = default;
TermDictionary::TermDictionary(Options options) : options_(std::move(options)) {
  if (options_.spill_threshold > 0) {
    if (options_.spill_dir.empty()) options_.spill_dir = std::filesystem::temp_directory_path();
    std::filesystem::create_directories(options_.spill_dir);
  }
}
TermDictionary::~TermDictionary() = default;
TermDictionary::TermDictionary(TermDictionary&&) noexcept = default;
TermDictionary& TermDictionary::operator=(TermDictionary&&) noexcept = default;

std::size_t TermDictionary::run_count() const { return runs_.size(); }

std::optional<std::uint32_t> TermDictionary::find(std::string_view term) const {
  if (auto it = memory_.find(term); it != memory_.end()) return it->second;
  for (auto run = runs_.rbegin(); run != runs_.rend(); ++run) {
    if (auto id = (*run)->find(term)) return id;
  }
  return std::nullopt;
}

std::pair<std::uint32_t, bool> TermDictionary::intern(std::string_view term) {
  if (auto id = find(term)) return {*id, false};
  if (next_id_ == std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("dictionary overflow: more than 2^32-1 distinct terms");
  }
  const std::uint32_t id = next_id_++;
  memory_.emplace(std::string(term), id);
  if (options_.spill_threshold > 0 && memory_.size() >= options_.spill_threshold) spill();
  return {id, true};
}

std::filesystem::path TermDictionary::next_run_path() {
  return options_.spill_dir /
         fmt::format("kgsim-dict-{}-{}-{}.run", ::getpid(), static_cast<const void*>(this), run_serial_++);
}

void TermDictionary::spill() {
  std::vector<std::pair<std::string_view, std::uint32_t>> sorted(memory_.begin(), memory_.end());
  std::sort(sorted.begin(), sorted.end());
  const auto path = next_run_path();
  {
    RunWriter writer(path);
    for (const auto& [term, id] : sorted) writer.add(term, id);
    writer.finish();
  }
  memory_.clear();
  runs_.push_back(std::make_unique<Run>(path));
  if (runs_.size() > options_.max_runs) merge_runs();
}

void TermDictionary::merge_runs() {
  using Cursor = std::pair<std::size_t, std::uint64_t>;  // run, record index
  auto greater = [this](const Cursor& a, const Cursor& b) {
    return runs_[a.first]->record(a.second).first > runs_[b.first]->record(b.second).first;
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(greater)> heap(greater);
  for (std::size_t r = 0; r < runs_.size(); ++r) {
    if (runs_[r]->count() > 0) heap.emplace(r, 0);
  }
  const auto path = next_run_path();
  {
    RunWriter writer(path);
    while (!heap.empty()) {
      auto [r, index] = heap.top();
      heap.pop();
      const auto [term, id] = runs_[r]->record(index);
      writer.add(term, id);
      if (index + 1 < runs_[r]->count()) heap.emplace(r, index + 1);
    }
    writer.finish();
  }
  runs_.clear();
  runs_.push_back(std::make_unique<Run>(path));
}

}  // namespace kgsim
