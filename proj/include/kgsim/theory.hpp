#pragma once

// Closed-form results of the superficiality model. Pure functions; nothing
// here simulates.

#include <span>
#include <vector>

namespace kgsim::theory {

/// Distribution of the number of distinct relationships per entity for n
/// homogeneous relationships with superficiality sigma.
struct RelationshipCountDistribution {
  int n = 0;
  double sigma = 1.0;
  std::vector<double> probabilities;  // probabilities[r - 1] = P(r), r = 1..n
  std::vector<double> constants;      // constants[i - 1] = K_i, i = 1..n (K_n = 0)

  double at(int r) const { return probabilities.at(static_cast<std::size_t>(r - 1)); }
};

/// True when (n, sigma) admits the closed form: n > 1/sigma - 1 and, below
/// sigma = 1, n * sigma > 1 so that every K_i is finite and non-negative.
bool in_domain(int n, double sigma);

/// Throws DomainError naming the violated constraint.
void check_domain(int n, double sigma);

RelationshipCountDistribution relationship_count_distribution(int n, double sigma);

/// P(r_e <= r_max).
double misdescribed_proportion(int n, double sigma, int r_max);

/// Limit of misdescribed_proportion as n grows: 1 - (1 - sigma)^r_max.
double misdescribed_limit(double sigma, int r_max);

/// Degree exponent 1 + 1/beta of linear preferential attachment.
double powerlaw_exponent(double beta);

/// Expected maximum degree after t facts for attachment exponent alpha and
/// attachment probability beta; t^beta at alpha = 1.
double mean_max_degree(double alpha, double beta, double t);

struct HeatmapCell {
  int n = 0;
  double sigma = 0.0;
  double value = 0.0;
  bool defined = false;
};

/// Row-major over sigma_values, then n_values.
std::vector<HeatmapCell> heatmap_grid(std::span<const int> n_values, std::span<const double> sigma_values,
                                      int r_max);

}  // namespace kgsim::theory
