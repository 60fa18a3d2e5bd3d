#include <doctest.h>

#include <cmath>

#include "kgsim/theory.hpp"
#include "kgsim/types.hpp"

using namespace kgsim;
using namespace kgsim::theory;

// Reference values come from tests/oracles/theory_values.py.

TEST_CASE("relationship-count distribution, many shallow relationships") {
  const auto dist = relationship_count_distribution(25, 0.05);
  CHECK(dist.at(1) == doctest::Approx(0.010845987).epsilon(1e-6));
  CHECK(dist.at(2) == doctest::Approx(0.011189525).epsilon(1e-6));
  CHECK(dist.constants[0] == doctest::Approx(91.2));
  CHECK(dist.constants.back() == 0.0);
}

TEST_CASE("relationship-count distribution, high superficiality") {
  const auto dist = relationship_count_distribution(25, 0.95);
  CHECK(dist.at(1) == doctest::Approx(0.9498956).epsilon(1e-6));
  CHECK(dist.at(1) + dist.at(2) + dist.at(3) == doctest::Approx(0.9998888).epsilon(1e-6));
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    if (dist.probabilities[i] > dist.probabilities[argmax]) argmax = i;
  }
  CHECK(argmax == 0);
}

TEST_CASE("superficiality one puts every entity in one relationship") {
  const auto dist = relationship_count_distribution(7, 1.0);
  CHECK(dist.at(1) == 1.0);
  for (int r = 2; r <= 7; ++r) CHECK(dist.at(r) == 0.0);
}

TEST_CASE("distribution sums to one across the domain") {
  for (double sigma : {0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 0.9, 0.99, 1.0}) {
    for (int n : {1, 2, 3, 5, 10, 25, 100, 400, 1000}) {
      if (!in_domain(n, sigma)) continue;
      CAPTURE(sigma);
      CAPTURE(n);
      const auto dist = relationship_count_distribution(n, sigma);
      double total = 0.0;
      for (double p : dist.probabilities) {
        CHECK(p >= 0.0);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("domain checks") {
  CHECK_FALSE(in_domain(10, 0.05));
  CHECK(in_domain(20, 0.05) == false);
  CHECK(in_domain(21, 0.05));
  CHECK_THROWS_AS(relationship_count_distribution(10, 0.05), DomainError);
  try {
    check_domain(10, 0.05);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    const std::string message = e.what();
    CHECK(message.find("n > 1/sigma - 1") != std::string::npos);
    CHECK(message.find("19") != std::string::npos);
  }
  CHECK_THROWS_AS(check_domain(0, 0.5), DomainError);
  CHECK_THROWS_AS(check_domain(5, 0.0), DomainError);
  CHECK_THROWS_AS(check_domain(5, 1.5), DomainError);
}

TEST_CASE("misdescribed proportion for three relationships or fewer") {
  CHECK(misdescribed_proportion(200, 0.3, 3) == doctest::Approx(0.6549173).epsilon(1e-6));
  CHECK(misdescribed_proportion(200, 0.5, 3) == doctest::Approx(0.8750024).epsilon(1e-6));
  CHECK(misdescribed_proportion(200, 0.7, 3) == doctest::Approx(0.9731636).epsilon(1e-6));
  CHECK(misdescribed_proportion(200, 0.95, 3) == doctest::Approx(0.9998767).epsilon(1e-6));
  CHECK_THROWS_AS(misdescribed_proportion(5, 0.5, 6), DomainError);
}

TEST_CASE("misdescribed proportion approaches its large-n limit") {
  CHECK(misdescribed_limit(0.5, 3) == 0.875);
  CHECK(misdescribed_limit(1.0, 1) == 1.0);
  for (double sigma : {0.2, 0.5, 0.8}) {
    const double limit = misdescribed_limit(sigma, 3);
    const double gap_small = std::abs(misdescribed_proportion(100, sigma, 3) - limit);
    const double gap_large = std::abs(misdescribed_proportion(10000, sigma, 3) - limit);
    CHECK(gap_large < gap_small);
    CHECK(gap_large < 1e-3);
  }
}

TEST_CASE("misdescribed proportion is monotone in superficiality") {
  for (int n : {50, 200}) {
    double previous = 0.0;
    for (int j = 1; j <= 99; ++j) {
      const double sigma = j / 100.0;
      if (!in_domain(n, sigma)) continue;
      const double value = misdescribed_proportion(n, sigma, 3);
      CHECK(value >= previous);
      previous = value;
    }
  }
}

TEST_CASE("power-law exponent") {
  CHECK(powerlaw_exponent(0.85) == doctest::Approx(2.176470588));
  CHECK(powerlaw_exponent(1.0) == 2.0);
  CHECK(powerlaw_exponent(0.5) == 3.0);
  CHECK_THROWS_AS(powerlaw_exponent(0.0), DomainError);
}

TEST_CASE("expected maximum degree") {
  CHECK(mean_max_degree(0.5, 0.5, std::exp(4.0)) == doctest::Approx(5.828427).epsilon(1e-6));
  CHECK(mean_max_degree(0.3, 0.6, 1.0) == doctest::Approx(1.0));
  CHECK(mean_max_degree(1.0, 0.85, 1e6) == doctest::Approx(125892.54).epsilon(1e-6));
  CHECK(mean_max_degree(0.0, 0.85, 1e6) == doctest::Approx(79.28789).epsilon(1e-6));
}

TEST_CASE("heatmap grid") {
  const int ns[] = {10, 50};
  const double sigmas[] = {0.05, 0.5};
  const auto grid = heatmap_grid(ns, sigmas, 3);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].n == 10);
  CHECK(grid[0].sigma == 0.05);
  CHECK_FALSE(grid[0].defined);
  CHECK(std::isnan(grid[0].value));
  CHECK(grid[1].defined);
  CHECK(grid[1].value == doctest::Approx(misdescribed_proportion(50, 0.05, 3)));
  CHECK(grid[3].value == doctest::Approx(misdescribed_proportion(50, 0.5, 3)));
}
