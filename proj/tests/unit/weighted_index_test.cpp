#include <doctest.h>

#include <cmath>
#include <random>

#include "kgsim/weighted_index.hpp"

using namespace kgsim;

namespace {

DegreeWeightedIndex build(double alpha, std::size_t size, std::uint64_t seed) {
  DegreeWeightedIndex index(alpha);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < size; ++i) index.add(static_cast<EntityId>(i + 100));
  for (int i = 0; i < 4000; ++i) index.increment(rng() % size);
  return index;
}

}  // namespace

TEST_CASE("total is the sum of k^alpha") {
  for (double alpha : {0.0, 0.3, 1.0}) {
    const auto index = build(alpha, 37, 1);
    double sum = 0.0;
    std::uint64_t degrees = 0;
    for (std::size_t s = 0; s < index.size(); ++s) {
      CHECK(index.weight(s) == doctest::Approx(std::pow(index.degree(s), alpha)));
      sum += std::pow(index.degree(s), alpha);
      degrees += index.degree(s);
    }
    CHECK(index.total() == doctest::Approx(sum).epsilon(1e-12));
    CHECK(degrees == 37 + 4000);
  }
}

TEST_CASE("slots keep their entities") {
  DegreeWeightedIndex index(1.0);
  CHECK(index.total() == 0.0);
  CHECK(index.add(7) == 0);
  CHECK(index.add(3) == 1);
  index.increment(1);
  CHECK(index.entity(1) == 3);
  CHECK(index.degree(1) == 2);
  CHECK(index.find(0.0) == 0);
  CHECK(index.find(0.5) == 1);
  CHECK(index.find(0.999999) == 1);
}

TEST_CASE("sampling frequencies follow the weights") {
  for (double alpha : {0.0, 0.5, 1.0}) {
    CAPTURE(alpha);
    const auto index = build(alpha, 50, 2);
    Rng rng(99);
    constexpr int kDraws = 200'000;
    std::vector<int> hits(index.size(), 0);
    for (int i = 0; i < kDraws; ++i) ++hits[index.sample(rng)];
    double chi2 = 0.0;
    for (std::size_t s = 0; s < index.size(); ++s) {
      const double expected = kDraws * index.weight(s) / index.total();
      chi2 += (hits[s] - expected) * (hits[s] - expected) / expected;
    }
    // 49 degrees of freedom; the 99.99th percentile is about 94.
    CHECK(chi2 < 94.0);
  }
}

TEST_CASE("zero exponent samples uniformly regardless of degree") {
  DegreeWeightedIndex index(0.0);
  index.add(0);
  index.add(1);
  for (int i = 0; i < 1000; ++i) index.increment(0);
  CHECK(index.total() == 2.0);
  CHECK(index.find(0.25) == 0);
  CHECK(index.find(0.75) == 1);
}
