#pragma once

// Binary edge stream: a flat sequence of little-endian uint32 triples
// (subject, relationship, object) with no header. Dictionaries live next to
// it as text files where line i (0-based) holds the term with id i.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgsim/types.hpp"

namespace kgsim {

inline constexpr const char* kEdgesFile = "edges.bin";
inline constexpr const char* kEntitiesFile = "entities.txt";
inline constexpr const char* kRelationshipsFile = "relationships.txt";
inline constexpr std::size_t kEdgeBytes = 12;

class EdgeWriter {
 public:
  explicit EdgeWriter(const std::filesystem::path& path);
  ~EdgeWriter();
  EdgeWriter(const EdgeWriter&) = delete;
  EdgeWriter& operator=(const EdgeWriter&) = delete;

  void push(const Edge& edge);
  void close();
  std::uint64_t count() const { return count_; }

 private:
  void flush();

  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
  std::vector<unsigned char> buffer_;
  std::uint64_t count_ = 0;
};

/// Either a file on disk or an in-memory span; consumers see blocks of edges.
class EdgeSource {
 public:
  static EdgeSource from_file(std::filesystem::path path);
  static EdgeSource from_span(std::span<const Edge> edges);

  void for_each_block(const std::function<void(std::span<const Edge>)>& visit) const;

  std::uint64_t size() const;

 private:
  std::filesystem::path path_;
  std::span<const Edge> edges_;
  bool in_memory_ = false;
};

void write_edges(const std::filesystem::path& path, std::span<const Edge> edges);
std::vector<Edge> read_edges(const std::filesystem::path& path);

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace kgsim
