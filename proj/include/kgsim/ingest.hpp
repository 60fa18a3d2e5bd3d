#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kgsim/types.hpp"

namespace kgsim {

/// A triple survives iff its object is not a literal, subject and object both
/// start with `entity_prefix` (blank nodes always match), and, when an
/// allowlist is given, its predicate is on it.
struct IngestFilter {
  std::string entity_prefix;
  std::optional<std::unordered_set<std::string>> keep_predicates;
};

struct IngestOptions {
  IngestFilter filter;
  bool dedup = false;
  unsigned threads = 1;
  std::size_t block_bytes = std::size_t{16} << 20;
  std::size_t spill_threshold = 0;  // entity count that triggers on-disk dictionary runs
  std::filesystem::path spill_dir;
};

struct IngestSummary {
  std::uint64_t lines = 0;
  std::uint64_t facts = 0;
  std::uint64_t entities = 0;
  std::uint64_t relationships = 0;
  std::uint64_t literals_removed = 0;
  std::uint64_t external_removed = 0;
  std::uint64_t predicate_filtered = 0;
  std::uint64_t duplicates_removed = 0;
  std::uint64_t malformed = 0;
  bool gzip = false;

  friend bool operator==(const IngestSummary&, const IngestSummary&) = default;
};

void to_json(nlohmann::json& out, const IngestSummary& summary);
void from_json(const nlohmann::json& in, IngestSummary& summary);

/// Receives the ingest output in stream order. New dictionary terms are
/// reported before the first edge that uses them, in id order.
class IngestSink {
 public:
  virtual ~IngestSink() = default;
  virtual void on_entity(EntityId id, std::string_view iri) = 0;
  virtual void on_relationship(RelationId id, std::string_view iri) = 0;
  virtual void on_edge(const Edge& edge) = 0;
};

/// Raw byte input; gzip is detected from the magic bytes of files.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  /// Returns 0 at end of stream; throws IoError on failure.
  virtual std::size_t read(char* buffer, std::size_t capacity) = 0;
  virtual bool compressed() const { return false; }
};

std::unique_ptr<ByteSource> open_file_source(const std::filesystem::path& path);
std::unique_ptr<ByteSource> open_memory_source(std::string_view bytes);

IngestSummary parse_ntriples(ByteSource& input, const IngestOptions& options, IngestSink& sink);

/// Fully materialized ingest result, for small inputs and tests.
struct EdgeStream {
  std::vector<Edge> edges;
  std::vector<std::string> entities;
  std::vector<std::string> relationships;
  IngestSummary summary;
};

EdgeStream parse_ntriples(std::string_view text, const IngestOptions& options);

/// Streams `input` into `out_dir` as edges.bin + entities.txt + relationships.txt.
IngestSummary ingest_to_directory(const std::filesystem::path& input, const IngestOptions& options,
                                  const std::filesystem::path& out_dir);

}  // namespace kgsim
