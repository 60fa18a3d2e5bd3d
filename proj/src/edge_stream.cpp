#include "kgsim/edge_stream.hpp"

#include <fmt/format.h>

#include <fstream>

namespace kgsim {

namespace {

constexpr std::size_t kBlockEdges = 1 << 16;

void put_u32(unsigned char* out, std::uint32_t value) {
  out[0] = static_cast<unsigned char>(value);
  out[1] = static_cast<unsigned char>(value >> 8);
  out[2] = static_cast<unsigned char>(value >> 16);
  out[3] = static_cast<unsigned char>(value >> 24);
}

std::uint32_t get_u32(const unsigned char* in) {
  return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

}  // namespace

Role parse_role(std::string_view text) {
  if (text == "out" || text == "OUT") return Role::out;
  if (text == "in" || text == "IN") return Role::in;
  throw std::invalid_argument(fmt::format("unknown role '{}' (expected in|out)", text));
}

EdgeWriter::EdgeWriter(const std::filesystem::path& path) : path_(path) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  buffer_.reserve(kBlockEdges * kEdgeBytes);
}

EdgeWriter::~EdgeWriter() {
  try {
    close();
  } catch (...) {
  }
}

void EdgeWriter::push(const Edge& edge) {
  const std::size_t at = buffer_.size();
  buffer_.resize(at + kEdgeBytes);
  put_u32(buffer_.data() + at, edge.subject);
  put_u32(buffer_.data() + at + 4, edge.relationship);
  put_u32(buffer_.data() + at + 8, edge.object);
  ++count_;
  if (buffer_.size() >= kBlockEdges * kEdgeBytes) flush();
}

void EdgeWriter::flush() {
  if (buffer_.empty()) return;
  if (std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size()) {
    throw IoError(fmt::format("short write to '{}'", path_.string()));
  }
  buffer_.clear();
}

void EdgeWriter::close() {
  if (file_ == nullptr) return;
  flush();
  const int rc = std::fclose(file_);
  file_ = nullptr;
  if (rc != 0) throw IoError(fmt::format("cannot close '{}'", path_.string()));
}

EdgeSource EdgeSource::from_file(std::filesystem::path path) {
  EdgeSource source;
  source.path_ = std::move(path);
  return source;
}

EdgeSource EdgeSource::from_span(std::span<const Edge> edges) {
  EdgeSource source;
  source.edges_ = edges;
  source.in_memory_ = true;
  return source;
}

std::uint64_t EdgeSource::size() const {
  if (in_memory_) return edges_.size();
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path_, ec);
  if (ec) throw IoError(fmt::format("cannot stat '{}': {}", path_.string(), ec.message()));
  return bytes / kEdgeBytes;
}

void EdgeSource::for_each_block(const std::function<void(std::span<const Edge>)>& visit) const {
  if (in_memory_) {
    for (std::size_t at = 0; at < edges_.size(); at += kBlockEdges) {
      visit(edges_.subspan(at, std::min(kBlockEdges, edges_.size() - at)));
    }
    return;
  }
  std::FILE* file = std::fopen(path_.c_str(), "rb");
  if (file == nullptr) throw IoError(fmt::format("cannot open '{}'", path_.string()));
  std::vector<unsigned char> raw(kBlockEdges * kEdgeBytes);
  std::vector<Edge> block;
  block.reserve(kBlockEdges);
  for (;;) {
    const std::size_t got = std::fread(raw.data(), 1, raw.size(), file);
    if (got % kEdgeBytes != 0) {
      std::fclose(file);
      throw IoError(fmt::format("'{}' is truncated (size not a multiple of {})", path_.string(), kEdgeBytes));
    }
    block.clear();
    for (std::size_t at = 0; at < got; at += kEdgeBytes) {
      block.push_back({get_u32(&raw[at]), get_u32(&raw[at + 4]), get_u32(&raw[at + 8])});
    }
    if (!block.empty()) visit(block);
    if (got < raw.size()) break;
  }
  const bool failed = std::ferror(file) != 0;
  std::fclose(file);
  if (failed) throw IoError(fmt::format("read error on '{}'", path_.string()));
}

void write_edges(const std::filesystem::path& path, std::span<const Edge> edges) {
  EdgeWriter writer(path);
  for (const Edge& edge : edges) writer.push(edge);
  writer.close();
}

std::vector<Edge> read_edges(const std::filesystem::path& path) {
  std::vector<Edge> edges;
  EdgeSource::from_file(path).for_each_block(
      [&](std::span<const Edge> block) { edges.insert(edges.end(), block.begin(), block.end()); });
  return edges;
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw IoError(fmt::format("write failed on '{}'", path.string()));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace kgsim
