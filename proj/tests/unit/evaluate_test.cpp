#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "helpers.hpp"
#include "kgsim/evaluate.hpp"
#include "kgsim/theory.hpp"

using namespace kgsim;
using namespace kgsim::testing;

namespace {

DegreeHistogram histogram(std::initializer_list<std::pair<std::uint64_t, std::uint64_t>> counts) {
  DegreeHistogram h;
  for (const auto& [k, c] : counts) h.add(k, c);
  return h;
}

}  // namespace

TEST_CASE("KL divergence of two small histograms") {
  // 0.5 ln(0.5/0.75) + 0.5 ln(0.5/0.25)
  const auto kl = kl_divergence(histogram({{1, 1}, {2, 1}}), histogram({{1, 3}, {2, 1}}));
  CHECK(kl.value == doctest::Approx(0.1438410362));
  CHECK(kl.floored == 0);
  CHECK(kl.support == 2);
  CHECK(kl.epsilon == doctest::Approx(0.025));
}

TEST_CASE("KL divergence of identical histograms is zero") {
  const auto h = histogram({{1, 10}, {2, 4}, {7, 1}});
  CHECK(kl_divergence(h, h).value == doctest::Approx(0.0));
}

TEST_CASE("degrees missing from the candidate get the floor") {
  // candidate {0.5, 0.5, 1/40} renormalized by 1.025
  const auto kl = kl_divergence(histogram({{1, 1}, {2, 1}, {3, 2}}), histogram({{1, 2}, {2, 2}}));
  CHECK(kl.floored == 1);
  CHECK(kl.epsilon == doctest::Approx(0.025));
  CHECK(kl.value == doctest::Approx(1.1759851591));
}

TEST_CASE("KL divergence of an empty histogram is a domain error") {
  CHECK_THROWS_AS(kl_divergence(DegreeHistogram{}, histogram({{1, 1}})), DomainError);
  CHECK_THROWS_AS(kl_divergence(histogram({{1, 1}}), DegreeHistogram{}), DomainError);
}

TEST_CASE("KL divergence is non-negative") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    DegreeHistogram p;
    DegreeHistogram q;
    for (int i = 0; i < 20; ++i) {
      p.add(1 + rng() % 15, 1 + rng() % 5);
      q.add(1 + rng() % 15, 1 + rng() % 5);
    }
    CHECK(kl_divergence(p, q).value >= 0.0);
  }
}

TEST_CASE("tail exponent of an exact power law") {
  DegreeHistogram h;
  for (std::uint64_t k = 1; k <= 100000; ++k) {
    const auto count = static_cast<std::uint64_t>(std::llround(1e12 * std::pow(static_cast<double>(k), -2.5)));
    if (count > 0) h.add(k, count);
  }
  const auto fit = fit_tail_exponent(h, 10);
  CHECK(fit.exponent == doctest::Approx(2.5).epsilon(0.03));
  CHECK(fit.bins >= 5);
  CHECK_THROWS(fit_tail_exponent(histogram({{1, 5}}), 10));
}

TEST_CASE("comparison against a reference needs a non-empty generation") {
  LoadedStats stats;
  stats.summary.facts = 10;
  stats.summary.relationships = 1;
  stats.summary.out = RoleSummary{Role::out, 5, 3, 1.0, 0.5, {0.5}, true};
  RelationshipProfile p;
  p.facts = 10;
  p.rho = 1.0;
  p.out = RoleProfile{5, 3, 0.5, 1.0, AlphaFit::exact};
  stats.profiles = {p};
  stats.global_histograms[Role::out] = histogram({{1, 3}, {3, 1}, {4, 1}});
  CHECK_THROWS_WITH_AS(compare_to_real(stats, Role::out, Variant::multiplex_param, 1, 0.0),
                       doctest::Contains("empty generation"), DomainError);

  const auto entry = compare_to_real(stats, Role::out, Variant::simplex_linear, 1, 100.0);
  CHECK(entry.steps == 1000);
  CHECK(entry.head_reference.size() == kHeadDegrees);
  CHECK(entry.head_reference[0] == doctest::Approx(0.6));
  CHECK(entry.kl.value >= 0.0);

  const Role roles[] = {Role::out};
  const Variant variants[] = {Variant::multiplex_param, Variant::simplex_param};
  const std::uint64_t seeds[] = {1, 2, 3};
  const auto serial = ablate(stats, roles, variants, seeds, 50.0, 1);
  const auto parallel = ablate(stats, roles, variants, seeds, 50.0, 4);
  REQUIRE(serial.entries.size() == 6);
  for (std::size_t i = 0; i < serial.entries.size(); ++i) {
    CHECK(serial.entries[i].kl.value == parallel.entries[i].kl.value);
    CHECK(serial.entries[i].seed == parallel.entries[i].seed);
  }
  const double mean = (serial.entries[3].kl.value + serial.entries[4].kl.value + serial.entries[5].kl.value) / 3.0;
  CHECK(serial.mean_kl(Variant::simplex_param, Role::out) == doctest::Approx(mean));

  const auto dir = scratch("divergence");
  write_divergence(dir, serial);
  CHECK(slurp(dir / "divergence.csv").starts_with("variant,role,kl,epsilon\n"));
  CHECK(std::filesystem::exists(dir / "divergence_seeds.csv"));
  CHECK(std::filesystem::exists(dir / "head.csv"));
}

TEST_CASE("figure experiment carries the closed form alongside the simulation") {
  const auto figure = homogeneous_experiment(0.5, 20000, 3);
  const auto dist = theory::relationship_count_distribution(kHomogeneousRelationships, 0.5);
  REQUIRE(figure.theory.size() == kHomogeneousRelationships);
  REQUIRE(figure.relationships.size() == kHomogeneousRelationships);
  double total = 0.0;
  for (std::size_t i = 0; i < figure.theory.size(); ++i) {
    CHECK(figure.theory[i] == dist.probabilities[i]);
    total += figure.relationships[i];
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(figure.degrees.facts() == 20000 + kHomogeneousRelationships);

  const auto path = scratch("fig3a") / "fig.csv";
  write_homogeneous_csv(path, figure);
  CHECK(slurp(path).starts_with("k,P_k,r,P_r_emp,P_r_theory\n"));
}

TEST_CASE("longitudinal table") {
  GraphSummary early;
  early.facts = 100;
  early.relationships = 4;
  early.out = RoleSummary{Role::out, 30, 12, 0.5, 0.0, {}, true};
  GraphSummary late = early;
  late.facts = 400;
  late.out->sigma = 0.4;
  late.in = RoleSummary{Role::in, 80, 20, 0.7, 0.0, {}, true};
  const std::vector<std::pair<std::string, GraphSummary>> snapshots{{"2019", early}, {"2024", late}};
  const auto rows = longitudinal_report(snapshots);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == "2019");
  CHECK(rows[0].sigma == 0.5);
  CHECK(rows[1].label == "2024");
  CHECK(rows[1].role == Role::in);
  CHECK(rows[2].role == Role::out);
  const auto path = scratch("longitudinal") / "l.csv";
  write_longitudinal_csv(path, rows);
  CHECK(slurp(path).starts_with("label,role,sigma,n,entities,facts,k_max\n2019,out,0.5,4,30,100,12\n"));
}

TEST_CASE("parallel_for visits each index once and propagates errors") {
  std::vector<int> seen(1000, 0);
  parallel_for(seen.size(), 4, [&](std::size_t i) { ++seen[i]; });
  for (int v : seen) CHECK(v == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 5) throw DomainError("boom");
                               }),
                  DomainError);
}

TEST_CASE("telemetry report JSON") {
  TelemetryReport report;
  report.runs = 2;
  report.checks.push_back({"entities_mean", "m", 0.5, 0.5, 0.01, true, false, ""});
  const nlohmann::json j = report;
  CHECK(j.at("runs") == 2);
  CHECK(report.passed());
  report.checks.push_back({"facts", "r0", 0.1, 0.5, 0.01, false, false, ""});
  CHECK_FALSE(report.passed());
}
