#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kgsim/generator.hpp"
#include "kgsim/histogram.hpp"
#include "kgsim/stats.hpp"

namespace kgsim {

struct KlResult {
  double value = 0.0;
  double epsilon = 0.0;       // floor substituted for candidate-empty degrees
  std::size_t floored = 0;    // reference degrees missing from the candidate
  std::size_t support = 0;    // reference degrees evaluated
};

/// KL(reference || candidate) in nats over the reference support. Degrees the
/// candidate lacks get probability epsilon = 1 / (10 N_candidate) before the
/// candidate is renormalized. Throws DomainError on an empty histogram.
KlResult kl_divergence(const DegreeHistogram& reference, const DegreeHistogram& candidate);

struct TailFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::size_t bins = 0;
};

/// Least-squares power-law exponent of the density on logarithmic bins
/// [b_j, b_{j+1}) with b_0 = k_min and b_{j+1} = max(b_j + 1, floor(b_j * ratio)).
TailFit fit_tail_exponent(const DegreeHistogram& histogram, std::uint64_t k_min, double bin_ratio = 2.0);

inline constexpr std::uint64_t kHeadDegrees = 50;

struct DivergenceEntry {
  Variant variant = Variant::multiplex_param;
  Role role = Role::out;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  KlResult kl;
  std::vector<double> head_reference;  // P(k) for k = 1..kHeadDegrees
  std::vector<double> head_generated;
};

struct DivergenceReport {
  std::vector<DivergenceEntry> entries;

  /// Mean KL over seeds for one (variant, role).
  double mean_kl(Variant variant, Role role) const;
};

/// Generates `variant` from the fitted stats at scale * |F| steps and compares
/// its global degree histogram to the reference one.
DivergenceEntry compare_to_real(const LoadedStats& reference, Role role, Variant variant, std::uint64_t seed,
                                double scale);

DivergenceReport ablate(const LoadedStats& reference, std::span<const Role> roles, std::span<const Variant> variants,
                        std::span<const std::uint64_t> seeds, double scale, unsigned threads = 1);

/// divergence.csv (variant,role,kl,epsilon; means over seeds),
/// divergence_seeds.csv (per run) and head.csv (k <= 50 table).
void write_divergence(const std::filesystem::path& dir, const DivergenceReport& report);

struct HomogeneousRun {
  double sigma = 0.0;
  DegreeHistogram degrees;              // global degree P(k)
  std::vector<double> relationships;    // empirical P(r) = M_r / m, r = 1..n
  std::vector<double> theory;           // closed form P(r)
  std::uint64_t exceptional = 0;
};

inline constexpr std::uint32_t kHomogeneousRelationships = 25;
inline constexpr double kHomogeneousBeta = 0.85;
inline constexpr double kHomogeneousAlpha = 1.0;

HomogeneousRun homogeneous_experiment(double sigma, std::uint64_t steps, std::uint64_t seed);

/// Columns k,P_k,r,P_r_emp,P_r_theory; short columns are left blank.
void write_homogeneous_csv(const std::filesystem::path& path, const HomogeneousRun& figure);

struct LawCheck {
  std::string law;
  std::string subject;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string note;
};

struct TelemetryReport {
  std::size_t runs = 0;
  std::uint64_t steps = 0;
  std::vector<LawCheck> checks;

  bool passed() const;
};

/// Checks the linear-growth laws of m, m_r and F_r (3-sigma bands on the
/// seed mean), the variance of m (25%, with >= 30 runs) and, for homogeneous
/// single-role configs inside the closed-form domain, M_i/m against P(i)
/// within 0.02.
TelemetryReport telemetry_checks(std::span<const SimulationTelemetry> runs, const GenerationConfig& config);

void to_json(nlohmann::json& out, const TelemetryReport& report);

struct LongitudinalRow {
  std::string label;
  Role role = Role::out;
  double sigma = 0.0;
  std::uint32_t relationships = 0;
  std::uint64_t entities = 0;
  std::uint64_t facts = 0;
  std::uint64_t max_degree = 0;
};

std::vector<LongitudinalRow> longitudinal_report(std::span<const std::pair<std::string, GraphSummary>> snapshots);

/// Columns label,role,sigma,n,entities,facts,k_max.
void write_longitudinal_csv(const std::filesystem::path& path, std::span<const LongitudinalRow> rows);

/// Runs `task(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace kgsim
