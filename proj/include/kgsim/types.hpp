#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kgsim {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

/// Marks the absent side of an edge emitted by a single-role generation.
inline constexpr EntityId kNoEntity = std::numeric_limits<EntityId>::max();

/// Subject side (OUT degree) or object side (IN degree) of a fact.
enum class Role : std::uint8_t { out = 0, in = 1 };

inline constexpr std::string_view role_name(Role role) {
  return role == Role::out ? "out" : "in";
}

Role parse_role(std::string_view text);

struct Edge {
  EntityId subject = kNoEntity;
  RelationId relationship = 0;
  EntityId object = kNoEntity;

  EntityId at(Role role) const { return role == Role::out ? subject : object; }

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Input violates a model constraint (exit code 1 at the command line).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kgsim
