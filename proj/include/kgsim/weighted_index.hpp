#pragma once

#include <cstdint>
#include <vector>

#include "kgsim/random.hpp"
#include "kgsim/types.hpp"

namespace kgsim {

/// Entities attached to one (relationship, role) with weights k^alpha, kept
/// in a complete binary sum tree. Parents are recomputed from children on
/// every update, so total() is always the exact tree sum of the current
/// weights. add, increment and sample are O(log size).
class DegreeWeightedIndex {
 public:
  explicit DegreeWeightedIndex(double alpha);

  /// Attaches `entity` with degree 1 and returns its slot.
  std::size_t add(EntityId entity);
  void increment(std::size_t slot);

  /// Slot whose cumulative weight interval contains u * total(), u in [0, 1).
  std::size_t find(double u) const;
  std::size_t sample(Rng& rng) const { return find(uniform01(rng)); }

  double total() const { return tree_.size() > 1 ? tree_[1] : 0.0; }
  double weight(std::size_t slot) const { return tree_[capacity_ + slot]; }
  EntityId entity(std::size_t slot) const { return entities_[slot]; }
  std::uint32_t degree(std::size_t slot) const { return degrees_[slot]; }
  std::size_t size() const { return entities_.size(); }
  double alpha() const { return alpha_; }

 private:
  double weight_of(std::uint32_t degree) const;
  void set_leaf(std::size_t slot, double weight);
  void grow();

  double alpha_;
  std::size_t capacity_ = 0;
  std::vector<double> tree_;  // 1-based heap layout, leaves at [capacity_, 2 * capacity_)
  std::vector<EntityId> entities_;
  std::vector<std::uint32_t> degrees_;
};

}  // namespace kgsim
