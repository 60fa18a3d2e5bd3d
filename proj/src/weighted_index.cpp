#include "kgsim/weighted_index.hpp"

#include <cmath>
#include <stdexcept>

namespace kgsim {

DegreeWeightedIndex::DegreeWeightedIndex(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("attachment exponent must lie in [0, 1]");
}

double DegreeWeightedIndex::weight_of(std::uint32_t degree) const {
  if (degree == 1 || alpha_ == 0.0) return 1.0;
  if (alpha_ == 1.0) return static_cast<double>(degree);
  return std::pow(static_cast<double>(degree), alpha_);
}

void DegreeWeightedIndex::grow() {
  const std::size_t capacity = capacity_ == 0 ? 16 : capacity_ * 2;
  std::vector<double> tree(2 * capacity, 0.0);
  for (std::size_t slot = 0; slot < entities_.size(); ++slot) tree[capacity + slot] = tree_[capacity_ + slot];
  for (std::size_t node = capacity - 1; node >= 1; --node) tree[node] = tree[2 * node] + tree[2 * node + 1];
  tree_ = std::move(tree);
  capacity_ = capacity;
}

void DegreeWeightedIndex::set_leaf(std::size_t slot, double weight) {
  std::size_t node = capacity_ + slot;
  tree_[node] = weight;
  for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

std::size_t DegreeWeightedIndex::add(EntityId entity) {
  if (entities_.size() == capacity_) grow();
  const std::size_t slot = entities_.size();
  entities_.push_back(entity);
  degrees_.push_back(1);
  set_leaf(slot, 1.0);
  return slot;
}

void DegreeWeightedIndex::increment(std::size_t slot) {
  const std::uint32_t degree = ++degrees_[slot];
  set_leaf(slot, weight_of(degree));
}

std::size_t DegreeWeightedIndex::find(double u) const {
  if (entities_.empty()) throw std::logic_error("sampling from an empty index");
  double target = u * total();
  std::size_t node = 1;
  while (node < capacity_) {
    const std::size_t left = 2 * node;
    // Rounding can push target past the left sum into an empty right subtree.
    if (target < tree_[left] || tree_[left + 1] <= 0.0) {
      node = left;
    } else {
      target -= tree_[left];
      node = left + 1;
    }
  }
  const std::size_t slot = node - capacity_;
  return slot < entities_.size() ? slot : entities_.size() - 1;
}

}  // namespace kgsim
