#include "kgsim/evaluate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "kgsim/csv.hpp"
#include "kgsim/theory.hpp"

namespace kgsim {

KlResult kl_divergence(const DegreeHistogram& reference, const DegreeHistogram& candidate) {
  if (reference.empty() || candidate.empty()) throw DomainError("KL divergence of an empty histogram");
  KlResult result;
  result.epsilon = 1.0 / (10.0 * static_cast<double>(candidate.entities()));
  for (const auto& [degree, count] : reference.counts()) {
    if (candidate.count(degree) == 0) ++result.floored;
  }
  const double normalizer = 1.0 + result.epsilon * static_cast<double>(result.floored);
  double total = 0.0;
  for (const auto& [degree, count] : reference.counts()) {
    const double p = static_cast<double>(count) / static_cast<double>(reference.entities());
    const std::uint64_t q_count = candidate.count(degree);
    const double q = (q_count > 0 ? static_cast<double>(q_count) / static_cast<double>(candidate.entities())
                                  : result.epsilon) /
                     normalizer;
    total += p * std::log(p / q);
  }
  result.value = std::max(total, 0.0);
  result.support = reference.counts().size();
  return result;
}

TailFit fit_tail_exponent(const DegreeHistogram& histogram, std::uint64_t k_min, double bin_ratio) {
  if (k_min < 1 || !(bin_ratio > 1.0)) throw std::invalid_argument("tail fit needs k_min >= 1 and ratio > 1");
  const double n = static_cast<double>(histogram.entities());
  std::vector<std::pair<double, double>> points;
  auto it = histogram.counts().lower_bound(k_min);
  for (std::uint64_t lo = k_min; lo <= histogram.max_degree();) {
    const std::uint64_t hi = std::max(lo + 1, static_cast<std::uint64_t>(std::floor(static_cast<double>(lo) * bin_ratio)));
    std::uint64_t count = 0;
    for (; it != histogram.counts().end() && it->first < hi; ++it) count += it->second;
    if (count > 0) {
      const double width = static_cast<double>(hi - lo);
      const double center = std::sqrt(static_cast<double>(lo) * static_cast<double>(hi - 1));
      points.emplace_back(std::log(center), std::log(static_cast<double>(count) / (width * n)));
    }
    lo = hi;
  }
  if (points.size() < 2) throw DomainError("tail fit needs at least two non-empty bins");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {-slope, (sy - slope * sx) / m, points.size()};
}

double DivergenceReport::mean_kl(Variant variant, Role role) const {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& e : entries) {
    if (e.variant == variant && e.role == role) {
      total += e.kl.value;
      ++count;
    }
  }
  return count == 0 ? std::nan("") : total / static_cast<double>(count);
}

namespace {

std::vector<double> head(const DegreeHistogram& histogram) {
  std::vector<double> out;
  for (std::uint64_t k = 1; k <= kHeadDegrees; ++k) out.push_back(histogram.probability(k));
  return out;
}

}  // namespace

DivergenceEntry compare_to_real(const LoadedStats& reference, Role role, Variant variant, std::uint64_t seed,
                                double scale) {
  const auto found = reference.global_histograms.find(role);
  if (found == reference.global_histograms.end()) {
    throw DomainError(fmt::format("no {} reference histogram", role_name(role)));
  }
  if (!(scale > 0.0)) throw DomainError("empty generation: scale must be > 0");
  const auto steps = static_cast<std::uint64_t>(std::llround(scale * static_cast<double>(reference.summary.facts)));
  if (steps == 0) throw DomainError("empty generation: scale * |F| rounds to 0 steps");

  const auto config = ablation_variant(reference.profiles, reference.summary, role, variant, steps, seed);
  const auto generated = generate(config);
  const auto histogram = DegreeHistogram::from_degrees(global_degrees(generated.edges, role));

  DivergenceEntry entry;
  entry.variant = variant;
  entry.role = role;
  entry.seed = seed;
  entry.steps = steps;
  entry.kl = kl_divergence(found->second, histogram);
  entry.head_reference = head(found->second);
  entry.head_generated = head(histogram);
  return entry;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

DivergenceReport ablate(const LoadedStats& reference, std::span<const Role> roles, std::span<const Variant> variants,
                        std::span<const std::uint64_t> seeds, double scale, unsigned threads) {
  DivergenceReport report;
  report.entries.resize(roles.size() * variants.size() * seeds.size());
  parallel_for(report.entries.size(), threads, [&](std::size_t i) {
    const std::size_t s = i % seeds.size();
    const std::size_t v = (i / seeds.size()) % variants.size();
    const std::size_t r = i / (seeds.size() * variants.size());
    report.entries[i] = compare_to_real(reference, roles[r], variants[v], seeds[s], scale);
  });
  return report;
}

void write_divergence(const std::filesystem::path& dir, const DivergenceReport& report) {
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "divergence.csv");
  std::ofstream runs(dir / "divergence_seeds.csv");
  std::ofstream heads(dir / "head.csv");
  if (!summary || !runs || !heads) throw IoError(fmt::format("cannot write divergence files in '{}'", dir.string()));
  summary << "variant,role,kl,epsilon\n";
  runs << "variant,role,seed,steps,kl,epsilon,floored\n";
  heads << "variant,role,seed,k,P_k_reference,P_k_generated\n";

  std::vector<std::pair<Variant, Role>> seen;
  for (const auto& e : report.entries) {
    runs << variant_name(e.variant) << ',' << role_name(e.role) << ',' << e.seed << ',' << e.steps << ','
         << csv::number(e.kl.value) << ',' << csv::number(e.kl.epsilon) << ',' << e.kl.floored << '\n';
    for (std::size_t k = 0; k < e.head_reference.size(); ++k) {
      heads << variant_name(e.variant) << ',' << role_name(e.role) << ',' << e.seed << ',' << k + 1 << ','
            << csv::number(e.head_reference[k]) << ',' << csv::number(e.head_generated[k]) << '\n';
    }
    if (std::find(seen.begin(), seen.end(), std::pair{e.variant, e.role}) == seen.end()) {
      seen.emplace_back(e.variant, e.role);
    }
  }
  for (const auto& [variant, role] : seen) {
    double epsilon = 0.0;
    std::size_t count = 0;
    for (const auto& e : report.entries) {
      if (e.variant == variant && e.role == role) {
        epsilon += e.kl.epsilon;
        ++count;
      }
    }
    summary << variant_name(variant) << ',' << role_name(role) << ',' << csv::number(report.mean_kl(variant, role))
            << ',' << csv::number(epsilon / static_cast<double>(count)) << '\n';
  }
}

HomogeneousRun homogeneous_experiment(double sigma, std::uint64_t steps, std::uint64_t seed) {
  auto config = GenerationConfig::homogeneous(kHomogeneousRelationships, kHomogeneousBeta, kHomogeneousAlpha, sigma, steps, seed);
  const auto run = generate(config);
  HomogeneousRun figure;
  figure.sigma = sigma;
  figure.degrees = DegreeHistogram::from_degrees(global_degrees(run.edges, Role::out));
  const auto& last = run.telemetry.last();
  for (std::uint32_t r = 1; r <= kHomogeneousRelationships; ++r) {
    figure.relationships.push_back(static_cast<double>(last.multiplicity[r]) / static_cast<double>(last.entities));
  }
  figure.theory = theory::relationship_count_distribution(static_cast<int>(kHomogeneousRelationships), sigma).probabilities;
  figure.exceptional = last.exceptional;
  return figure;
}

void write_homogeneous_csv(const std::filesystem::path& path, const HomogeneousRun& figure) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << "k,P_k,r,P_r_emp,P_r_theory\n";
  const auto pk = figure.degrees.normalized();
  const std::size_t rows = std::max(pk.size(), figure.relationships.size());
  for (std::size_t i = 0; i < rows; ++i) {
    if (i < pk.size()) out << pk[i].first << ',' << csv::number(pk[i].second);
    else out << ',';
    out << ',';
    if (i < figure.relationships.size()) {
      out << i + 1 << ',' << csv::number(figure.relationships[i]) << ',' << csv::number(figure.theory[i]);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

bool TelemetryReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const LawCheck& c) { return c.skipped || c.passed; });
}

namespace {

struct SeedStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

SeedStats seed_stats(const std::vector<double>& values) {
  SeedStats s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= static_cast<double>(values.size() - 1);
  }
  return s;
}

LawCheck band(std::string law, std::string subject, double observed, double expected, double tolerance) {
  LawCheck check{std::move(law), std::move(subject), observed, expected, tolerance, false, false, {}};
  check.passed = std::abs(observed - expected) <= tolerance;
  return check;
}

bool homogeneous(const GenerationConfig& config, Role role) {
  const auto& first = config.relationships.front();
  return std::all_of(config.relationships.begin(), config.relationships.end(), [&](const RelationshipParameters& r) {
    return std::abs(r.rho - first.rho) < 1e-12 && r.role(role).beta == first.role(role).beta;
  });
}

}  // namespace

TelemetryReport telemetry_checks(std::span<const SimulationTelemetry> runs, const GenerationConfig& config) {
  TelemetryReport report;
  report.runs = runs.size();
  report.steps = config.steps;
  if (runs.empty() || config.steps == 0) {
    report.checks.push_back({"entities", "m(t)/t", 0, 0, 0, false, true, "no runs or zero steps"});
    return report;
  }
  const double t = static_cast<double>(config.steps);
  const double root_runs = std::sqrt(static_cast<double>(runs.size()));
  const auto roles = config.active_roles();
  const std::uint32_t n = config.relationship_count();

  // Per-step new-entity count X: given r, each role independently creates an
  // entity with probability (1 - beta) sigma.
  double a = 0.0;
  double second_moment = 0.0;
  for (const auto& rel : config.relationships) {
    double mean_given_r = 0.0;
    double square_given_r = 0.0;
    for (Role role : roles) {
      const double p = (1.0 - rel.role(role).beta) * config.sigma(role);
      square_given_r += p + 2.0 * mean_given_r * p;
      mean_given_r += p;
    }
    a += rel.rho * mean_given_r;
    second_moment += rel.rho * square_given_r;
  }
  const double step_variance = second_moment - a * a;

  std::vector<double> growth;
  for (const auto& run : runs) {
    growth.push_back(static_cast<double>(run.last().entities - run.samples.front().entities) / t);
  }
  const auto m_stats = seed_stats(growth);
  report.checks.push_back(
      band("entities_mean", "(m(T)-m(0))/T", m_stats.mean, a, 3.0 * std::sqrt(step_variance / t) / root_runs));
  if (runs.size() >= 30) {
    auto check = band("entities_variance", "Var[m(T)]/T", m_stats.variance * t, step_variance, 0.25 * step_variance);
    report.checks.push_back(check);
  } else {
    report.checks.push_back(
        {"entities_variance", "Var[m(T)]/T", 0, step_variance, 0, false, true, "needs >= 30 runs"});
  }

  for (RelationId r = 0; r < n; ++r) {
    const double rho = config.relationships[r].rho;
    std::vector<double> facts;
    for (const auto& run : runs) facts.push_back(static_cast<double>(run.last().facts[r] - run.samples.front().facts[r]) / t);
    report.checks.push_back(band("facts", fmt::format("F_r{}", r), seed_stats(facts).mean, rho,
                                 3.0 * std::sqrt(rho * (1.0 - rho) / t) / root_runs));
    for (Role role : roles) {
      const double c = rho * (1.0 - config.relationships[r].role(role).beta);
      std::vector<double> attached;
      for (const auto& run : runs) {
        attached.push_back(
            static_cast<double>(run.attached(run.last(), r, role) - run.attached(run.samples.front(), r, role)) / t);
      }
      const std::string subject =
          roles.size() > 1 ? fmt::format("m_r{}_{}", r, role_name(role)) : fmt::format("m_r{}", r);
      report.checks.push_back(
          band("relationship_entities", subject, seed_stats(attached).mean, c, 3.0 * std::sqrt(c * (1.0 - c) / t) / root_runs));
    }
  }

  const Role role = roles.front();
  const double sigma = config.sigma(role);
  if (roles.size() == 1 && homogeneous(config, role) && theory::in_domain(static_cast<int>(n), sigma)) {
    const auto dist = theory::relationship_count_distribution(static_cast<int>(n), sigma);
    for (std::uint32_t i = 1; i <= n; ++i) {
      std::vector<double> share;
      for (const auto& run : runs) {
        share.push_back(static_cast<double>(run.last().multiplicity[i]) / static_cast<double>(run.last().entities));
      }
      report.checks.push_back(band("relationship_count", fmt::format("M_{}/m", i), seed_stats(share).mean,
                                   dist.at(static_cast<int>(i)), 0.02));
    }
  } else {
    report.checks.push_back({"relationship_count", "M_i/m", 0, 0, 0, false, true,
                             "closed form needs homogeneous single-role parameters inside its domain"});
  }

  std::uint64_t exceptional = 0;
  for (const auto& run : runs) exceptional += run.last().exceptional;
  LawCheck info{"exceptional_fraction", "exceptional/T",
                static_cast<double>(exceptional) / (t * static_cast<double>(runs.size())), 0, 0, true, true,
                "informational"};
  report.checks.push_back(info);
  return report;
}

void to_json(nlohmann::json& out, const TelemetryReport& report) {
  auto checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json entry{{"law", c.law},         {"subject", c.subject},     {"observed", c.observed},
                         {"expected", c.expected}, {"tolerance", c.tolerance}, {"passed", c.passed},
                         {"skipped", c.skipped}};
    if (!c.note.empty()) entry["note"] = c.note;
    checks.push_back(std::move(entry));
  }
  out = nlohmann::json{{"runs", report.runs}, {"steps", report.steps}, {"passed", report.passed()}, {"checks", checks}};
}

std::vector<LongitudinalRow> longitudinal_report(std::span<const std::pair<std::string, GraphSummary>> snapshots) {
  std::vector<LongitudinalRow> rows;
  for (const auto& [label, summary] : snapshots) {
    for (Role role : {Role::in, Role::out}) {
      const auto& rs = summary.role(role);
      if (!rs) continue;
      rows.push_back({label, role, rs->sigma, summary.relationships, rs->entities, summary.facts, rs->max_degree});
    }
  }
  return rows;
}

void write_longitudinal_csv(const std::filesystem::path& path, std::span<const LongitudinalRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << "label,role,sigma,n,entities,facts,k_max\n";
  for (const auto& r : rows) {
    out << r.label << ',' << role_name(r.role) << ',' << csv::number(r.sigma) << ',' << r.relationships << ','
        << r.entities << ',' << r.facts << ',' << r.max_degree << '\n';
  }
}

}  // namespace kgsim
