#include "kgsim/degree_scan.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace kgsim {

std::uint64_t DegreeTable::facts() const {
  std::uint64_t total = 0;
  for (const auto& [entity, degree] : degrees) total += degree;
  return total;
}

std::uint32_t DegreeTable::max_degree() const {
  std::uint32_t best = 0;
  for (const auto& [entity, degree] : degrees) best = std::max(best, degree);
  return best;
}

void scan_degrees(const EdgeSource& edges, Role role, unsigned groups,
                  const std::function<void(std::vector<DegreeTable>&&)>& on_group,
                  std::vector<std::uint32_t>& global, std::uint32_t& relationship_count) {
  if (groups == 0) throw std::invalid_argument("groups must be >= 1");
  global.clear();
  relationship_count = 0;
  edges.for_each_block([&](std::span<const Edge> block) {
    for (const Edge& edge : block) {
      relationship_count = std::max(relationship_count, edge.relationship + 1);
      const EntityId entity = edge.at(role);
      if (entity == kNoEntity) continue;
      if (entity >= global.size()) global.resize(std::max<std::size_t>(entity + 1, global.size() * 2), 0);
      ++global[entity];
    }
  });
  std::size_t used = global.size();
  while (used > 0 && global[used - 1] == 0) --used;
  global.resize(used);

  for (unsigned group = 0; group < groups; ++group) {
    std::unordered_map<std::uint64_t, std::uint32_t> counts;
    edges.for_each_block([&](std::span<const Edge> block) {
      for (const Edge& edge : block) {
        if (edge.relationship % groups != group) continue;
        const EntityId entity = edge.at(role);
        if (entity == kNoEntity) continue;
        ++counts[(static_cast<std::uint64_t>(edge.relationship) << 32) | entity];
      }
    });
    std::vector<DegreeTable> tables;
    for (RelationId r = group; r < relationship_count; r += groups) tables.push_back({r, {}});
    for (const auto& [key, degree] : counts) {
      const auto r = static_cast<RelationId>(key >> 32);
      tables[(r - group) / groups].degrees.emplace_back(static_cast<EntityId>(key), degree);
    }
    counts.clear();
    for (auto& table : tables) std::sort(table.degrees.begin(), table.degrees.end());
    on_group(std::move(tables));
  }
}

DegreeTables scan_degrees(const EdgeSource& edges, Role role, unsigned groups) {
  DegreeTables result;
  result.role = role;
  std::vector<DegreeTable> collected;
  scan_degrees(
      edges, role, groups,
      [&](std::vector<DegreeTable>&& tables) {
        for (auto& table : tables) collected.push_back(std::move(table));
      },
      result.global, result.relationship_count);
  result.per_relationship.resize(result.relationship_count);
  for (auto& table : collected) {
    const RelationId r = table.relationship;
    result.per_relationship[r] = std::move(table);
  }
  return result;
}

}  // namespace kgsim
