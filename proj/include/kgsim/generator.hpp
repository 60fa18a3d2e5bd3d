#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>
#include <nlohmann/json_fwd.hpp>

#include "kgsim/stats.hpp"
#include "kgsim/types.hpp"
#include "kgsim/weighted_index.hpp"

namespace kgsim {

inline constexpr std::uint64_t kDefaultSeed = 20240229;

enum class GenerationMode { single_role, joint };
enum class Variant { multiplex_param, multiplex_linear, simplex_param, simplex_linear };
/// Which attachments make an entity ineligible for case (c) of a relationship.
enum class ExclusionScope { relationship_role, relationship };

std::string_view variant_name(Variant variant);
Variant parse_variant(std::string_view name);
inline constexpr Variant kAllVariants[] = {Variant::multiplex_param, Variant::multiplex_linear,
                                           Variant::simplex_param, Variant::simplex_linear};

struct RoleParameters {
  double beta = 0.0;
  double alpha = 1.0;
};

struct RelationshipParameters {
  double rho = 0.0;
  RoleParameters out;
  RoleParameters in;

  const RoleParameters& role(Role r) const { return r == Role::out ? out : in; }
  RoleParameters& role(Role r) { return r == Role::out ? out : in; }
};

struct GenerationConfig {
  std::vector<RelationshipParameters> relationships;
  double sigma_out = 1.0;
  double sigma_in = 1.0;
  std::uint64_t steps = 0;
  GenerationMode mode = GenerationMode::single_role;
  Role role = Role::out;  // used in single_role mode
  Variant variant = Variant::multiplex_param;
  ExclusionScope exclusion = ExclusionScope::relationship_role;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t telemetry_interval = 0;  // 0 picks steps / 100

  double sigma(Role r) const { return r == Role::out ? sigma_out : sigma_in; }
  std::vector<Role> active_roles() const;
  std::uint32_t relationship_count() const { return static_cast<std::uint32_t>(relationships.size()); }

  /// n relationships with equal rho and identical parameters in both roles.
  static GenerationConfig homogeneous(std::uint32_t n, double beta, double alpha, double sigma, std::uint64_t steps,
                                      std::uint64_t seed = kDefaultSeed);
};

/// Throws DomainError on any invalid field, including n <= 1/sigma - 1.
void validate(const GenerationConfig& config);

void to_json(nlohmann::json& out, const GenerationConfig& config);
void from_json(const nlohmann::json& in, GenerationConfig& config);

/// Entities with their creator relationship, creation step and the
/// (relationship, role) pairs they are attached to.
class EntityRegistry {
 public:
  EntityId create(RelationId creator, std::uint64_t step);

  /// Records the attachment; returns true if `entity` had no attachment to
  /// `relationship` in any role before.
  bool attach(EntityId entity, RelationId relationship, Role role);
  bool attached(EntityId entity, RelationId relationship, Role role) const;
  bool attached_any_role(EntityId entity, RelationId relationship) const;

  std::size_t size() const { return creators_.size(); }
  RelationId creator(EntityId entity) const { return creators_[entity]; }
  std::uint64_t created_at(EntityId entity) const { return created_at_[entity]; }
  /// Distinct relationships across roles.
  std::uint32_t relationship_count(EntityId entity) const { return relationship_counts_[entity]; }
  std::span<const std::uint32_t> attachments(EntityId entity) const {
    return {attachments_[entity].data(), attachments_[entity].size()};
  }

  static std::uint32_t key(RelationId relationship, Role role) {
    return relationship * 2 + static_cast<std::uint32_t>(role);
  }

 private:
  std::vector<RelationId> creators_;
  std::vector<std::uint64_t> created_at_;
  std::vector<std::uint32_t> relationship_counts_;
  std::vector<boost::container::small_vector<std::uint32_t, 2>> attachments_;
};

struct TelemetrySample {
  std::uint64_t t = 0;
  std::uint64_t entities = 0;     // m(t)
  std::uint64_t exceptional = 0;  // exceptional steps so far
  std::vector<std::uint64_t> attached;      // m_r(t), index r * roles + role slot
  std::vector<std::uint64_t> facts;         // F_r(t)
  std::vector<std::uint64_t> multiplicity;  // M_i(t), index i = 0..n (M_0 = 0)
};

struct SimulationTelemetry {
  std::vector<Role> roles;
  std::uint32_t relationships = 0;
  std::vector<TelemetrySample> samples;

  const TelemetrySample& last() const { return samples.back(); }
  std::uint64_t attached(const TelemetrySample& s, RelationId r, Role role) const;
};

/// Columns t,m,exceptional, then m_r<r> (m_r<r>_<role> in joint mode),
/// F_r<r> and M_<i> for i = 1..n.
void write_telemetry_csv(const std::filesystem::path& path, const SimulationTelemetry& telemetry);
SimulationTelemetry read_telemetry_csv(const std::filesystem::path& path, std::uint32_t relationships,
                                       std::span<const Role> roles);

/// State after initialization: one fresh degree-1 entity per relationship
/// and active role.
struct SeededState {
  EntityRegistry registry;
  std::vector<DegreeWeightedIndex> indexes;  // index r * 2 + role
  std::vector<Edge> edges;                   // one seed fact per relationship
};

SeededState seed(const GenerationConfig& config);

struct GenerationResult {
  std::vector<Edge> edges;
  EntityRegistry registry;
  SimulationTelemetry telemetry;
  std::uint64_t peak_index_entries = 0;
};

/// Step-by-step generation in timeline order. Identical config and seed give
/// a bit-identical edge stream.
GenerationResult generate(const GenerationConfig& config);

/// Two-phase generation: the timeline decides relationships and attachment
/// cases, then each relationship's preferential attachment is replayed on its
/// own index. Edges are grouped by relationship; within a relationship they
/// match generate() exactly.
GenerationResult generate_per_relationship(const GenerationConfig& config, unsigned threads = 1);

/// Builds the generation config of an ablation variant from fitted stats.
GenerationConfig ablation_variant(std::span<const RelationshipProfile> profiles, const GraphSummary& summary,
                                  Role role, Variant variant, std::uint64_t steps, std::uint64_t seed);

/// Sum of per-relationship degrees for `role`, indexed by entity id.
std::vector<std::uint64_t> global_degrees(std::span<const Edge> edges, Role role);

}  // namespace kgsim
