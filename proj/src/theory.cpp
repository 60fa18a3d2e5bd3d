#include "kgsim/theory.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "kgsim/types.hpp"

namespace kgsim::theory {

namespace {

// Below this margin n*sigma - 1 is treated as zero.
constexpr double kDenominatorFloor = 1e-12;
constexpr double kLinearCutoff = 1e-9;

bool relationship_constraint(int n, double sigma) { return static_cast<double>(n) > 1.0 / sigma - 1.0; }

}  // namespace

bool in_domain(int n, double sigma) {
  if (n < 1 || !(sigma > 0.0) || sigma > 1.0) return false;
  if (sigma == 1.0) return true;
  return relationship_constraint(n, sigma) && n * sigma - 1.0 > kDenominatorFloor;
}

void check_domain(int n, double sigma) {
  if (n < 1) throw DomainError(fmt::format("n must be >= 1 (got {})", n));
  if (!(sigma > 0.0) || sigma > 1.0) throw DomainError(fmt::format("sigma must lie in (0, 1] (got {})", sigma));
  if (sigma == 1.0) return;
  if (!relationship_constraint(n, sigma)) {
    throw DomainError(fmt::format("constraint n > 1/sigma - 1 violated: n = {}, sigma = {} requires n > {:g}", n,
                                  sigma, 1.0 / sigma - 1.0));
  }
  if (!(n * sigma - 1.0 > kDenominatorFloor)) {
    throw DomainError(fmt::format(
        "K_i = (1 - sigma)/(n*sigma - 1)*(n - i) is undefined or negative: n = {}, sigma = {} gives n*sigma = {:g}, "
        "need n*sigma > 1",
        n, sigma, n * sigma));
  }
}

RelationshipCountDistribution relationship_count_distribution(int n, double sigma) {
  check_domain(n, sigma);
  RelationshipCountDistribution dist;
  dist.n = n;
  dist.sigma = sigma;
  dist.probabilities.assign(static_cast<std::size_t>(n), 0.0);
  dist.constants.assign(static_cast<std::size_t>(n), 0.0);
  if (sigma == 1.0) {
    dist.probabilities[0] = 1.0;
    return dist;
  }
  const double scale = (1.0 - sigma) / (n * sigma - 1.0);
  for (int i = 1; i <= n; ++i) dist.constants[static_cast<std::size_t>(i - 1)] = scale * (n - i);

  // log P(r) = sum_{i<r} log K_i - sum_{i<=r} log(1 + K_i)
  double log_numerator = 0.0;
  double log_denominator = 0.0;
  for (int r = 1; r <= n; ++r) {
    const double k_r = dist.constants[static_cast<std::size_t>(r - 1)];
    log_denominator += std::log1p(k_r);
    dist.probabilities[static_cast<std::size_t>(r - 1)] = std::exp(log_numerator - log_denominator);
    if (k_r > 0.0) {
      log_numerator += std::log(k_r);
    } else {
      log_numerator = -std::numeric_limits<double>::infinity();
    }
  }
  return dist;
}

double misdescribed_proportion(int n, double sigma, int r_max) {
  if (r_max < 1 || r_max > n) {
    throw DomainError(fmt::format("r_max must lie in [1, n] (got r_max = {}, n = {})", r_max, n));
  }
  const auto dist = relationship_count_distribution(n, sigma);
  double total = 0.0;
  for (int r = 1; r <= r_max; ++r) total += dist.at(r);
  return total;
}

double misdescribed_limit(double sigma, int r_max) {
  if (!(sigma > 0.0) || sigma > 1.0) throw DomainError(fmt::format("sigma must lie in (0, 1] (got {})", sigma));
  return 1.0 - std::pow(1.0 - sigma, r_max);
}

double powerlaw_exponent(double beta) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw DomainError(fmt::format("power-law exponent needs 0 < beta <= 1 (got {}); beta = 0 has no preferential growth",
                                  beta));
  }
  return 1.0 + 1.0 / beta;
}

double mean_max_degree(double alpha, double beta, double t) {
  if (1.0 - alpha < kLinearCutoff) return std::pow(t, beta);
  const double base = beta * std::pow(1.0 - beta, alpha - 1.0) * (1.0 - alpha) * std::log(t) + 1.0;
  return std::pow(base, 1.0 / (1.0 - alpha));
}

std::vector<HeatmapCell> heatmap_grid(std::span<const int> n_values, std::span<const double> sigma_values,
                                      int r_max) {
  std::vector<HeatmapCell> grid;
  grid.reserve(n_values.size() * sigma_values.size());
  for (double sigma : sigma_values) {
    for (int n : n_values) {
      HeatmapCell cell{n, sigma, std::numeric_limits<double>::quiet_NaN(), false};
      if (in_domain(n, sigma) && r_max >= 1 && r_max <= n) {
        cell.value = misdescribed_proportion(n, sigma, r_max);
        cell.defined = true;
      }
      grid.push_back(cell);
    }
  }
  return grid;
}

}  // namespace kgsim::theory
