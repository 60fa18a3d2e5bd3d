#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kgsim/degree_scan.hpp"
#include "kgsim/histogram.hpp"
#include "kgsim/types.hpp"

namespace kgsim {

enum class AlphaFit { exact, clamped_low, clamped_high, degenerate };

std::string_view alpha_fit_name(AlphaFit status);

struct AlphaEstimate {
  double alpha = 0.0;
  AlphaFit status = AlphaFit::exact;
};

/// Attachment exponent whose predicted maximum degree after `facts` facts is
/// closest (in log space) to `observed_kmax`. Clamps to 0 or 1 with a flag
/// when the observation lies outside the predictions at the interval ends.
AlphaEstimate fit_alpha(double beta, double facts, double observed_kmax);

inline constexpr double kAlphaTolerance = 1e-6;

/// Per-role parameters of one relationship.
struct RoleProfile {
  std::uint64_t entities = 0;    // |E_r|
  std::uint64_t max_degree = 0;  // k_max,r
  double beta = 0.0;
  double alpha = 0.0;
  AlphaFit alpha_status = AlphaFit::exact;
};

struct RelationshipProfile {
  RelationId id = 0;
  std::string name;
  std::uint64_t facts = 0;  // |F_r|
  double rho = 0.0;
  std::optional<RoleProfile> out;
  std::optional<RoleProfile> in;

  std::optional<RoleProfile>& role(Role r) { return r == Role::out ? out : in; }
  const std::optional<RoleProfile>& role(Role r) const { return r == Role::out ? out : in; }
};

struct RoleSummary {
  Role role = Role::out;
  std::uint64_t entities = 0;  // |E|
  std::uint64_t max_degree = 0;
  double sigma = 1.0;
  double a = 0.0;          // sum_r rho_r (1 - beta_r) sigma
  std::vector<double> c;   // rho_r (1 - beta_r), in profile order
  bool relationship_constraint = true;  // n > 1/sigma - 1
};

struct GraphSummary {
  std::uint64_t facts = 0;
  std::uint32_t relationships = 0;
  std::optional<RoleSummary> out;
  std::optional<RoleSummary> in;

  std::optional<RoleSummary>& role(Role r) { return r == Role::out ? out : in; }
  const std::optional<RoleSummary>& role(Role r) const { return r == Role::out ? out : in; }
};

/// rho_r = |F_r| / |F|. Throws DomainError("no facts") when |F| = 0.
void estimate_rho(std::vector<RelationshipProfile>& profiles, std::uint64_t facts);

/// beta_r = 1 - |E_r| / |F_r| for every role present.
void estimate_beta(std::vector<RelationshipProfile>& profiles);

struct SigmaEstimate {
  double sigma = 1.0;
  bool relationship_constraint = true;
};

/// sigma = |E| / sum_r |E_r| for `role`.
SigmaEstimate estimate_sigma(std::uint64_t entities, std::span<const RelationshipProfile> profiles, Role role);

/// Runs fit_alpha for every present role.
void estimate_alpha(std::vector<RelationshipProfile>& profiles);

struct RoleHistograms {
  DegreeHistogram global;
  std::vector<DegreeHistogram> per_relationship;  // indexed by relationship id
};

RoleHistograms build_histograms(const DegreeTables& tables);

struct GraphFit {
  std::vector<RelationshipProfile> profiles;
  GraphSummary summary;
  std::map<Role, RoleHistograms> histograms;
};

/// Streams the edges once per role and group and derives every parameter.
/// Relationships without facts in any requested role are omitted.
GraphFit fit_graph(const EdgeSource& edges, std::span<const Role> roles, unsigned groups,
                   std::span<const std::string> relationship_names = {});

void to_json(nlohmann::json& out, const RoleProfile& profile);
void from_json(const nlohmann::json& in, RoleProfile& profile);
void to_json(nlohmann::json& out, const RelationshipProfile& profile);
void from_json(const nlohmann::json& in, RelationshipProfile& profile);
void to_json(nlohmann::json& out, const RoleSummary& summary);
void from_json(const nlohmann::json& in, RoleSummary& summary);
void to_json(nlohmann::json& out, const GraphSummary& summary);
void from_json(const nlohmann::json& in, GraphSummary& summary);

/// profiles.json, summary.json, hist_{role}_global.csv and hist_{role}_rel.csv
/// (the latter with a leading `relationship` column).
void write_fit(const std::filesystem::path& dir, const GraphFit& fit);

struct LoadedStats {
  std::vector<RelationshipProfile> profiles;
  GraphSummary summary;
  std::map<Role, DegreeHistogram> global_histograms;
};

LoadedStats read_stats(const std::filesystem::path& dir);

}  // namespace kgsim
