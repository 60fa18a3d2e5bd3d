#include "kgsim/stats.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "kgsim/csv.hpp"
#include "kgsim/theory.hpp"

namespace kgsim {

std::string_view alpha_fit_name(AlphaFit status) {
  switch (status) {
    case AlphaFit::exact: return "exact";
    case AlphaFit::clamped_low: return "clamped_low";
    case AlphaFit::clamped_high: return "clamped_high";
    case AlphaFit::degenerate: return "degenerate";
  }
  return "exact";
}

namespace {

AlphaFit parse_alpha_fit(std::string_view name) {
  for (auto status : {AlphaFit::exact, AlphaFit::clamped_low, AlphaFit::clamped_high, AlphaFit::degenerate}) {
    if (alpha_fit_name(status) == name) return status;
  }
  throw std::invalid_argument(fmt::format("unknown alpha status '{}'", name));
}

constexpr int kScanIntervals = 256;

}  // namespace

AlphaEstimate fit_alpha(double beta, double facts, double observed_kmax) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument(fmt::format("fit_alpha: beta {} not in [0,1)", beta));
  if (!(facts >= 2.0)) throw std::invalid_argument(fmt::format("fit_alpha: need at least 2 facts (got {})", facts));
  if (!(observed_kmax >= 1.0 && observed_kmax <= facts)) {
    throw std::invalid_argument(fmt::format("fit_alpha: observed k_max {} outside [1, {}]", observed_kmax, facts));
  }
  if (beta == 0.0) return {0.0, AlphaFit::degenerate};

  const double target = std::log(observed_kmax);
  auto gap = [&](double alpha) { return std::log(theory::mean_max_degree(alpha, beta, facts)) - target; };

  const double low = gap(0.0);
  if (low > 0.0) return {0.0, AlphaFit::clamped_low};
  if (low == 0.0) return {0.0, AlphaFit::exact};
  if (gap(1.0) < 0.0) return {1.0, AlphaFit::clamped_high};

  // The prediction is monotone in alpha for realistic fact counts but not for
  // tiny ones, so bracket the first crossing before bisecting.
  double lo = 0.0;
  double hi = 1.0;
  for (int j = 1; j <= kScanIntervals; ++j) {
    const double alpha = static_cast<double>(j) / kScanIntervals;
    if (gap(alpha) >= 0.0) {
      hi = alpha;
      lo = static_cast<double>(j - 1) / kScanIntervals;
      break;
    }
  }
  while (hi - lo > kAlphaTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), AlphaFit::exact};
}

void estimate_rho(std::vector<RelationshipProfile>& profiles, std::uint64_t facts) {
  std::uint64_t total = 0;
  for (const auto& p : profiles) total += p.facts;
  if (facts == 0 || total == 0) throw DomainError("no facts");
  if (total != facts) {
    throw std::logic_error(fmt::format("relationship facts sum to {} but the graph has {}", total, facts));
  }
  for (auto& p : profiles) p.rho = static_cast<double>(p.facts) / static_cast<double>(facts);
}

void estimate_beta(std::vector<RelationshipProfile>& profiles) {
  for (auto& p : profiles) {
    for (Role role : {Role::out, Role::in}) {
      auto& rp = p.role(role);
      if (!rp) continue;
      if (p.facts == 0) {
        rp->beta = 0.0;
        continue;
      }
      if (rp->entities == 0) {
        throw std::logic_error(fmt::format("relationship {} has {} facts but no {} entities", p.id, p.facts,
                                           role_name(role)));
      }
      if (rp->entities > p.facts) {
        throw std::logic_error(fmt::format("relationship {} has more {} entities than facts", p.id, role_name(role)));
      }
      rp->beta = 1.0 - static_cast<double>(rp->entities) / static_cast<double>(p.facts);
    }
  }
}

SigmaEstimate estimate_sigma(std::uint64_t entities, std::span<const RelationshipProfile> profiles, Role role) {
  std::uint64_t attached = 0;
  std::size_t n = 0;
  for (const auto& p : profiles) {
    const auto& rp = p.role(role);
    if (!rp) continue;
    attached += rp->entities;
    ++n;
  }
  if (attached == 0) throw DomainError(fmt::format("no {} entities attached to any relationship", role_name(role)));
  SigmaEstimate estimate;
  estimate.sigma = static_cast<double>(entities) / static_cast<double>(attached);
  estimate.relationship_constraint = static_cast<double>(n) > 1.0 / estimate.sigma - 1.0;
  return estimate;
}

void estimate_alpha(std::vector<RelationshipProfile>& profiles) {
  for (auto& p : profiles) {
    for (Role role : {Role::out, Role::in}) {
      auto& rp = p.role(role);
      if (!rp) continue;
      if (p.facts < 2) {
        rp->alpha = 0.0;
        rp->alpha_status = AlphaFit::degenerate;
        continue;
      }
      const auto fit = fit_alpha(rp->beta, static_cast<double>(p.facts), static_cast<double>(rp->max_degree));
      rp->alpha = fit.alpha;
      rp->alpha_status = fit.status;
    }
  }
}

RoleHistograms build_histograms(const DegreeTables& tables) {
  RoleHistograms out;
  out.global = DegreeHistogram::from_degrees(tables.global);
  out.per_relationship.resize(tables.per_relationship.size());
  for (std::size_t r = 0; r < tables.per_relationship.size(); ++r) {
    for (const auto& [entity, degree] : tables.per_relationship[r].degrees) out.per_relationship[r].add(degree);
  }
  return out;
}

GraphFit fit_graph(const EdgeSource& edges, std::span<const Role> roles, unsigned groups,
                   std::span<const std::string> relationship_names) {
  GraphFit fit;
  std::map<RelationId, RelationshipProfile> by_id;
  std::map<Role, std::pair<std::uint64_t, std::uint64_t>> role_totals;  // entities, k_max

  for (Role role : roles) {
    RoleHistograms histograms;
    std::vector<std::uint32_t> global;
    std::uint32_t relationship_count = 0;
    scan_degrees(
        edges, role, groups,
        [&](std::vector<DegreeTable>&& tables) {
          for (const auto& table : tables) {
            if (table.relationship >= histograms.per_relationship.size()) {
              histograms.per_relationship.resize(table.relationship + 1);
            }
            auto& histogram = histograms.per_relationship[table.relationship];
            for (const auto& [entity, degree] : table.degrees) histogram.add(degree);
            if (table.degrees.empty()) continue;
            auto& profile = by_id[table.relationship];
            profile.id = table.relationship;
            if (table.relationship < relationship_names.size()) profile.name = relationship_names[table.relationship];
            const std::uint64_t facts = histogram.facts();
            if (profile.facts != 0 && profile.facts != facts) {
              throw std::logic_error(fmt::format("relationship {} has {} facts in one role and {} in the other",
                                                 table.relationship, profile.facts, facts));
            }
            profile.facts = facts;
            profile.role(role) = RoleProfile{histogram.entities(), histogram.max_degree(), 0.0, 0.0, AlphaFit::exact};
          }
        },
        global, relationship_count);
    histograms.per_relationship.resize(std::max<std::size_t>(histograms.per_relationship.size(), relationship_count));
    histograms.global = DegreeHistogram::from_degrees(global);
    role_totals[role] = {histograms.global.entities(), histograms.global.max_degree()};
    fit.summary.relationships = std::max(fit.summary.relationships, relationship_count);
    fit.histograms[role] = std::move(histograms);
  }

  for (auto& [id, profile] : by_id) fit.profiles.push_back(std::move(profile));
  std::uint64_t facts = 0;
  for (const auto& p : fit.profiles) facts += p.facts;
  estimate_rho(fit.profiles, facts);
  estimate_beta(fit.profiles);
  estimate_alpha(fit.profiles);

  fit.summary.facts = facts;
  fit.summary.relationships = static_cast<std::uint32_t>(fit.profiles.size());
  for (Role role : roles) {
    const auto [entities, kmax] = role_totals[role];
    if (entities == 0) continue;
    RoleSummary rs;
    rs.role = role;
    rs.entities = entities;
    rs.max_degree = kmax;
    const auto sigma = estimate_sigma(entities, fit.profiles, role);
    rs.sigma = sigma.sigma;
    rs.relationship_constraint = sigma.relationship_constraint;
    for (const auto& p : fit.profiles) {
      const double c = p.role(role) ? p.rho * (1.0 - p.role(role)->beta) : 0.0;
      rs.c.push_back(c);
      rs.a += c * rs.sigma;
    }
    fit.summary.role(role) = std::move(rs);
  }
  return fit;
}

void to_json(nlohmann::json& out, const RoleProfile& p) {
  out = nlohmann::json{{"entities", p.entities},
                       {"max_degree", p.max_degree},
                       {"beta", p.beta},
                       {"alpha", p.alpha},
                       {"alpha_status", alpha_fit_name(p.alpha_status)}};
}

void from_json(const nlohmann::json& in, RoleProfile& p) {
  p.entities = in.at("entities").get<std::uint64_t>();
  p.max_degree = in.at("max_degree").get<std::uint64_t>();
  p.beta = in.at("beta").get<double>();
  p.alpha = in.at("alpha").get<double>();
  p.alpha_status = parse_alpha_fit(in.value("alpha_status", std::string("exact")));
}

void to_json(nlohmann::json& out, const RelationshipProfile& p) {
  out = nlohmann::json{{"id", p.id}, {"name", p.name}, {"facts", p.facts}, {"rho", p.rho}};
  if (p.out) out["out"] = *p.out;
  if (p.in) out["in"] = *p.in;
}

void from_json(const nlohmann::json& in, RelationshipProfile& p) {
  p.id = in.at("id").get<RelationId>();
  p.name = in.value("name", std::string());
  p.facts = in.at("facts").get<std::uint64_t>();
  p.rho = in.at("rho").get<double>();
  p.out.reset();
  p.in.reset();
  if (in.contains("out")) p.out = in.at("out").get<RoleProfile>();
  if (in.contains("in")) p.in = in.at("in").get<RoleProfile>();
}

void to_json(nlohmann::json& out, const RoleSummary& s) {
  out = nlohmann::json{{"role", role_name(s.role)},
                       {"entities", s.entities},
                       {"max_degree", s.max_degree},
                       {"sigma", s.sigma},
                       {"a", s.a},
                       {"c", s.c},
                       {"relationship_constraint", s.relationship_constraint}};
}

void from_json(const nlohmann::json& in, RoleSummary& s) {
  s.role = parse_role(in.at("role").get<std::string>());
  s.entities = in.at("entities").get<std::uint64_t>();
  s.max_degree = in.at("max_degree").get<std::uint64_t>();
  s.sigma = in.at("sigma").get<double>();
  s.a = in.value("a", 0.0);
  s.c = in.value("c", std::vector<double>{});
  s.relationship_constraint = in.value("relationship_constraint", true);
}

void to_json(nlohmann::json& out, const GraphSummary& s) {
  out = nlohmann::json{{"facts", s.facts}, {"relationships", s.relationships}};
  if (s.out) out["out"] = *s.out;
  if (s.in) out["in"] = *s.in;
}

void from_json(const nlohmann::json& in, GraphSummary& s) {
  s.facts = in.at("facts").get<std::uint64_t>();
  s.relationships = in.at("relationships").get<std::uint32_t>();
  s.out.reset();
  s.in.reset();
  if (in.contains("out")) s.out = in.at("out").get<RoleSummary>();
  if (in.contains("in")) s.in = in.at("in").get<RoleSummary>();
}

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << value.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return nlohmann::json::parse(in);
}

}  // namespace

void write_fit(const std::filesystem::path& dir, const GraphFit& fit) {
  std::filesystem::create_directories(dir);
  write_json(dir / "profiles.json", nlohmann::json(fit.profiles));
  write_json(dir / "summary.json", nlohmann::json(fit.summary));
  for (const auto& [role, histograms] : fit.histograms) {
    const std::string name(role_name(role));
    write_histogram_csv(dir / fmt::format("hist_{}_global.csv", name), histograms.global);
    std::ofstream out(dir / fmt::format("hist_{}_rel.csv", name));
    if (!out) throw IoError("cannot write per-relationship histogram");
    out << "relationship,degree,count,probability\n";
    for (std::size_t r = 0; r < histograms.per_relationship.size(); ++r) {
      const auto& h = histograms.per_relationship[r];
      for (const auto& [degree, count] : h.counts()) {
        out << r << ',' << degree << ',' << count << ',' << csv::number(h.probability(degree)) << '\n';
      }
    }
  }
}

LoadedStats read_stats(const std::filesystem::path& dir) {
  LoadedStats stats;
  stats.profiles = read_json(dir / "profiles.json").get<std::vector<RelationshipProfile>>();
  stats.summary = read_json(dir / "summary.json").get<GraphSummary>();
  for (Role role : {Role::out, Role::in}) {
    const auto path = dir / fmt::format("hist_{}_global.csv", role_name(role));
    if (stats.summary.role(role) && std::filesystem::exists(path)) {
      stats.global_histograms[role] = read_histogram_csv(path);
    }
  }
  return stats;
}

}  // namespace kgsim
