#include "kgsim/ingest.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "kgsim/edge_stream.hpp"
#include "kgsim/ntriples.hpp"
#include "kgsim/term_dictionary.hpp"

namespace kgsim {

void to_json(nlohmann::json& out, const IngestSummary& s) {
  out = nlohmann::json{{"lines", s.lines},
                       {"facts", s.facts},
                       {"entities", s.entities},
                       {"relationships", s.relationships},
                       {"literals_removed", s.literals_removed},
                       {"external_removed", s.external_removed},
                       {"predicate_filtered", s.predicate_filtered},
                       {"duplicates_removed", s.duplicates_removed},
                       {"malformed", s.malformed},
                       {"gzip", s.gzip}};
}

void from_json(const nlohmann::json& in, IngestSummary& s) {
  s.lines = in.value("lines", std::uint64_t{0});
  s.facts = in.at("facts").get<std::uint64_t>();
  s.entities = in.at("entities").get<std::uint64_t>();
  s.relationships = in.value("relationships", std::uint64_t{0});
  s.literals_removed = in.at("literals_removed").get<std::uint64_t>();
  s.external_removed = in.at("external_removed").get<std::uint64_t>();
  s.predicate_filtered = in.value("predicate_filtered", std::uint64_t{0});
  s.duplicates_removed = in.value("duplicates_removed", std::uint64_t{0});
  s.malformed = in.at("malformed").get<std::uint64_t>();
  s.gzip = in.value("gzip", false);
}

namespace {

class GzFileSource final : public ByteSource {
 public:
  explicit GzFileSource(const std::filesystem::path& path) : path_(path) {
    {
      std::ifstream probe(path, std::ios::binary);
      if (!probe) throw IoError(fmt::format("cannot open '{}'", path.string()));
      unsigned char magic[2] = {0, 0};
      probe.read(reinterpret_cast<char*>(magic), 2);
      compressed_ = probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
    }
    // gzread passes uncompressed files through unchanged.
    file_ = gzopen(path.c_str(), "rb");
    if (file_ == nullptr) throw IoError(fmt::format("cannot open '{}'", path.string()));
    gzbuffer(file_, 1 << 20);
  }
  ~GzFileSource() override {
    if (file_ != nullptr) gzclose(file_);
  }

  std::size_t read(char* buffer, std::size_t capacity) override {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(capacity, 1u << 30));
    const int got = gzread(file_, buffer, chunk);
    if (got < 0) {
      int code = 0;
      const char* message = gzerror(file_, &code);
      throw IoError(fmt::format("read error on '{}': {}", path_.string(), message));
    }
    return static_cast<std::size_t>(got);
  }

  bool compressed() const override { return compressed_; }

 private:
  std::filesystem::path path_;
  gzFile file_ = nullptr;
  bool compressed_ = false;
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(std::string_view bytes) : bytes_(bytes) {}
  std::size_t read(char* buffer, std::size_t capacity) override {
    const std::size_t n = std::min(capacity, bytes_.size() - pos_);
    std::memcpy(buffer, bytes_.data() + pos_, n);
    pos_ += n;
    return n;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

enum class Verdict : std::uint8_t { keep, empty, malformed, literal, external, predicate };

struct ClassifiedLine {
  Verdict verdict = Verdict::empty;
  ntriples::Triple triple;
};

bool is_internal(const ntriples::Term& term, std::string_view prefix) {
  if (term.kind == ntriples::TermKind::blank_node) return true;
  return term.kind == ntriples::TermKind::iri && term.text.starts_with(prefix);
}

ClassifiedLine classify(std::string_view line, const IngestFilter& filter) {
  const auto parsed = ntriples::parse_line(line);
  if (parsed.kind == ntriples::LineKind::empty) return {Verdict::empty, {}};
  if (parsed.kind == ntriples::LineKind::malformed) return {Verdict::malformed, {}};
  const auto& t = parsed.triple;
  if (t.object.kind == ntriples::TermKind::literal) return {Verdict::literal, {}};
  if (!is_internal(t.subject, filter.entity_prefix) || !is_internal(t.object, filter.entity_prefix)) {
    return {Verdict::external, {}};
  }
  if (filter.keep_predicates && !filter.keep_predicates->contains(std::string(t.predicate.text))) {
    return {Verdict::predicate, {}};
  }
  return {Verdict::keep, t};
}

void classify_range(std::string_view text, const IngestFilter& filter, std::vector<ClassifiedLine>& out) {
  out.clear();
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(classify(text.substr(start, end - start), filter));
    start = end + 1;
  }
}

struct EdgeHash {
  std::size_t operator()(const Edge& e) const {
    std::uint64_t h = e.subject;
    h = h * 0x9E3779B97F4A7C15ull ^ e.relationship;
    h = h * 0x9E3779B97F4A7C15ull ^ e.object;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

class Merger {
 public:
  Merger(const IngestOptions& options, IngestSink& sink)
      : options_(options),
        sink_(sink),
        entities_(TermDictionary::Options{options.spill_threshold, options.spill_dir, 8}) {}

  void consume(const std::vector<ClassifiedLine>& lines) {
    for (const auto& line : lines) {
      if (line.verdict != Verdict::empty) ++summary_.lines;
      switch (line.verdict) {
        case Verdict::empty: break;
        case Verdict::malformed: ++summary_.malformed; break;
        case Verdict::literal: ++summary_.literals_removed; break;
        case Verdict::external: ++summary_.external_removed; break;
        case Verdict::predicate: ++summary_.predicate_filtered; break;
        case Verdict::keep: keep(line.triple); break;
      }
    }
  }

  IngestSummary finish() {
    summary_.entities = entities_.size();
    summary_.relationships = relationships_.size();
    return summary_;
  }

 private:
  void keep(const ntriples::Triple& t) {
    Edge edge;
    edge.subject = entity(t.subject.text);
    auto [rel, fresh_rel] = relationships_.intern(t.predicate.text);
    if (fresh_rel) sink_.on_relationship(rel, t.predicate.text);
    edge.relationship = rel;
    edge.object = entity(t.object.text);
    if (options_.dedup && !seen_.insert(edge).second) {
      ++summary_.duplicates_removed;
      return;
    }
    ++summary_.facts;
    sink_.on_edge(edge);
  }

  EntityId entity(std::string_view text) {
    auto [id, fresh] = entities_.intern(text);
    if (fresh) sink_.on_entity(id, text);
    return id;
  }

  const IngestOptions& options_;
  IngestSink& sink_;
  TermDictionary entities_;
  TermDictionary relationships_;
  std::unordered_set<Edge, EdgeHash> seen_;
  IngestSummary summary_;
};

/// Splits `text` into at most `parts` ranges that end on line boundaries.
std::vector<std::string_view> split_lines(std::string_view text, unsigned parts) {
  std::vector<std::string_view> ranges;
  std::size_t start = 0;
  for (unsigned p = 1; p <= parts && start < text.size(); ++p) {
    std::size_t end = text.size();
    if (p < parts) {
      const std::size_t target = start + (text.size() - start) / (parts - p + 1);
      const std::size_t newline = text.find('\n', target);
      end = newline == std::string_view::npos ? text.size() : newline + 1;
    }
    ranges.push_back(text.substr(start, end - start));
    start = end;
  }
  return ranges;
}

}  // namespace

std::unique_ptr<ByteSource> open_file_source(const std::filesystem::path& path) {
  return std::make_unique<GzFileSource>(path);
}

std::unique_ptr<ByteSource> open_memory_source(std::string_view bytes) {
  return std::make_unique<MemorySource>(bytes);
}

IngestSummary parse_ntriples(ByteSource& input, const IngestOptions& options, IngestSink& sink) {
  const unsigned threads = std::max(1u, options.threads);
  const std::size_t block = std::max<std::size_t>(options.block_bytes, 1024);
  Merger merger(options, sink);
  std::vector<std::vector<ClassifiedLine>> parsed(threads);

  std::string buffer;
  std::string carry;
  bool eof = false;
  while (!eof) {
    buffer.assign(carry);
    const std::size_t have = buffer.size();
    buffer.resize(have + block);
    std::size_t filled = have;
    while (filled < buffer.size()) {
      const std::size_t got = input.read(buffer.data() + filled, buffer.size() - filled);
      if (got == 0) {
        eof = true;
        break;
      }
      filled += got;
    }
    buffer.resize(filled);
    carry.clear();
    std::string_view text(buffer);
    if (!eof) {
      const std::size_t last = text.rfind('\n');
      if (last == std::string_view::npos) {
        // A single line longer than the block: keep reading into the carry.
        carry = std::move(buffer);
        continue;
      }
      carry.assign(text.substr(last + 1));
      text = text.substr(0, last + 1);
    }

    const auto ranges = split_lines(text, threads);
    if (ranges.size() <= 1) {
      classify_range(ranges.empty() ? std::string_view{} : ranges[0], options.filter, parsed[0]);
    } else {
      std::vector<std::jthread> workers;
      workers.reserve(ranges.size());
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        workers.emplace_back([&, i] { classify_range(ranges[i], options.filter, parsed[i]); });
      }
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) merger.consume(parsed[i]);
  }
  IngestSummary summary = merger.finish();
  summary.gzip = input.compressed();
  return summary;
}

namespace {

class CollectingSink final : public IngestSink {
 public:
  explicit CollectingSink(EdgeStream& out) : out_(out) {}
  void on_entity(EntityId, std::string_view iri) override { out_.entities.emplace_back(iri); }
  void on_relationship(RelationId, std::string_view iri) override { out_.relationships.emplace_back(iri); }
  void on_edge(const Edge& edge) override { out_.edges.push_back(edge); }

 private:
  EdgeStream& out_;
};

class DirectorySink final : public IngestSink {
 public:
  explicit DirectorySink(const std::filesystem::path& dir)
      : edges_(dir / kEdgesFile),
        entities_(dir / kEntitiesFile, std::ios::binary),
        relationships_(dir / kRelationshipsFile, std::ios::binary) {
    if (!entities_ || !relationships_) throw IoError(fmt::format("cannot write dictionaries in '{}'", dir.string()));
  }
  void on_entity(EntityId, std::string_view iri) override { entities_ << iri << '\n'; }
  void on_relationship(RelationId, std::string_view iri) override { relationships_ << iri << '\n'; }
  void on_edge(const Edge& edge) override { edges_.push(edge); }

  void close() {
    edges_.close();
    entities_.close();
    relationships_.close();
    if (!entities_ || !relationships_) throw IoError("dictionary write failed");
  }

 private:
  EdgeWriter edges_;
  std::ofstream entities_;
  std::ofstream relationships_;
};

}  // namespace

EdgeStream parse_ntriples(std::string_view text, const IngestOptions& options) {
  EdgeStream stream;
  CollectingSink sink(stream);
  auto source = open_memory_source(text);
  stream.summary = parse_ntriples(*source, options, sink);
  return stream;
}

IngestSummary ingest_to_directory(const std::filesystem::path& input, const IngestOptions& options,
                                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto source = open_file_source(input);
  DirectorySink sink(out_dir);
  const IngestSummary summary = parse_ntriples(*source, options, sink);
  sink.close();
  spdlog::info("ingest: {} facts, {} entities, {} relationships ({} literals, {} external, {} malformed)",
               summary.facts, summary.entities, summary.relationships, summary.literals_removed,
               summary.external_removed, summary.malformed);
  return summary;
}

}  // namespace kgsim
