#include <doctest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "kgsim/edge_stream.hpp"
#include "kgsim/histogram.hpp"
#include "kgsim/term_dictionary.hpp"

using namespace kgsim;
using namespace kgsim::testing;

TEST_CASE("edge stream is little-endian uint32 triples without header") {
  const auto dir = scratch("edges");
  const std::vector<Edge> edges{{1, 2, 3}, {0x01020304, 0, kNoEntity}};
  write_edges(dir / kEdgesFile, edges);
  const auto bytes = slurp(dir / kEdgesFile);
  REQUIRE(bytes.size() == 2 * kEdgeBytes);
  const unsigned char expected[] = {1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 4, 3, 2, 1, 0, 0, 0, 0, 255, 255, 255, 255};
  for (std::size_t i = 0; i < bytes.size(); ++i) CHECK(static_cast<unsigned char>(bytes[i]) == expected[i]);
  CHECK(read_edges(dir / kEdgesFile) == edges);
}

TEST_CASE("edge source visits every edge in order") {
  const auto dir = scratch("edge_source");
  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < 100'000; ++i) edges.push_back({i, i % 7, i * 3});
  write_edges(dir / kEdgesFile, edges);
  for (const auto& source : {EdgeSource::from_file(dir / kEdgesFile), EdgeSource::from_span(edges)}) {
    std::vector<Edge> seen;
    source.for_each_block([&](std::span<const Edge> block) { seen.insert(seen.end(), block.begin(), block.end()); });
    CHECK(source.size() == edges.size());
    CHECK(seen == edges);
  }
}

TEST_CASE("truncated edge file is an I/O error") {
  const auto dir = scratch("edges_truncated");
  spit(dir / kEdgesFile, std::string(13, '\0'));
  CHECK_THROWS_AS(read_edges(dir / kEdgesFile), IoError);
}

TEST_CASE("dictionary lines round-trip") {
  const auto dir = scratch("lines");
  const std::vector<std::string> lines{"http://a/x", "_:b0", "p:y"};
  write_lines(dir / kEntitiesFile, lines);
  CHECK(read_lines(dir / kEntitiesFile) == lines);
}

TEST_CASE("term dictionary assigns first-appearance ids") {
  TermDictionary dict;
  CHECK(dict.intern("b") == std::pair<std::uint32_t, bool>{0, true});
  CHECK(dict.intern("a") == std::pair<std::uint32_t, bool>{1, true});
  CHECK(dict.intern("b") == std::pair<std::uint32_t, bool>{0, false});
  CHECK(dict.find("a") == 1u);
  CHECK_FALSE(dict.find("c").has_value());
  CHECK(dict.size() == 2);
}

TEST_CASE("spilling dictionary matches the in-memory one") {
  const auto dir = scratch("spill");
  TermDictionary memory;
  TermDictionary spilled(TermDictionary::Options{7, dir, 3});
  std::mt19937_64 rng(11);
  std::vector<std::string> terms;
  for (int i = 0; i < 5000; ++i) terms.push_back("http://e/" + std::to_string(rng() % 900));
  for (const auto& t : terms) CHECK(memory.intern(t) == spilled.intern(t));
  CHECK(spilled.size() == memory.size());
  CHECK(spilled.run_count() >= 1);
  CHECK(spilled.run_count() <= 4);
  for (const auto& t : terms) CHECK(spilled.find(t) == memory.find(t));
  CHECK_FALSE(spilled.find("http://e/missing").has_value());
}

TEST_CASE("spill run files are removed with the dictionary") {
  const auto dir = scratch("spill_cleanup");
  {
    TermDictionary dict(TermDictionary::Options{2, dir, 8});
    for (int i = 0; i < 20; ++i) dict.intern("t" + std::to_string(i));
    CHECK(!std::filesystem::is_empty(dir));
  }
  CHECK(std::filesystem::is_empty(dir));
}

TEST_CASE("degree histogram counts and normalizes") {
  const std::vector<int> degrees{2, 1, 0, 1, 5};
  const auto h = DegreeHistogram::from_degrees(degrees);
  CHECK(h.entities() == 4);
  CHECK(h.facts() == 9);
  CHECK(h.count(1) == 2);
  CHECK(h.count(3) == 0);
  CHECK(h.max_degree() == 5);
  CHECK(h.probability(1) == doctest::Approx(0.5));
  double total = 0.0;
  for (const auto& [k, p] : h.normalized()) total += p;
  CHECK(total == doctest::Approx(1.0));

  const auto dir = scratch("histogram");
  write_histogram_csv(dir / "h.csv", h);
  CHECK(read_histogram_csv(dir / "h.csv") == h);
  CHECK(slurp(dir / "h.csv").starts_with("degree,count,probability\n1,2,0.5\n"));
}

TEST_CASE("histogram invariants on random degree lists") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> degrees(1 + rng() % 200);
    std::uint64_t facts = 0;
    std::uint64_t entities = 0;
    for (auto& d : degrees) {
      d = rng() % 30;
      facts += d;
      entities += d > 0 ? 1 : 0;
    }
    const auto h = DegreeHistogram::from_degrees(degrees);
    std::uint64_t count_sum = 0;
    std::uint64_t weighted = 0;
    for (const auto& [k, c] : h.counts()) {
      count_sum += c;
      weighted += k * c;
    }
    CHECK(count_sum == entities);
    CHECK(h.entities() == entities);
    CHECK(weighted == facts);
    CHECK(h.facts() == facts);
  }
}
