#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "kgsim/edge_stream.hpp"
#include "kgsim/types.hpp"

namespace kgsim {

/// Degrees of one relationship in one role, sorted by entity id.
struct DegreeTable {
  RelationId relationship = 0;
  std::vector<std::pair<EntityId, std::uint32_t>> degrees;

  std::uint64_t facts() const;
  std::uint32_t max_degree() const;
  friend bool operator==(const DegreeTable&, const DegreeTable&) = default;
};

struct DegreeTables {
  Role role = Role::out;
  std::uint32_t relationship_count = 0;
  std::vector<DegreeTable> per_relationship;  // indexed by relationship id
  std::vector<std::uint32_t> global;          // dense by entity id; 0 = not in this role
};

/// Streams `edges` once for the global per-entity degrees, then once per
/// relationship group (relationship r belongs to group r mod `groups`).
/// `on_group` receives the finished tables of each group; memory is bounded
/// by the largest group. Edges whose `role` side is kNoEntity are skipped.
void scan_degrees(const EdgeSource& edges, Role role, unsigned groups,
                  const std::function<void(std::vector<DegreeTable>&&)>& on_group,
                  std::vector<std::uint32_t>& global, std::uint32_t& relationship_count);

/// Convenience form collecting every table.
DegreeTables scan_degrees(const EdgeSource& edges, Role role, unsigned groups);

}  // namespace kgsim
