#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace wdemb {

using WordId = std::int32_t;
using RelationId = std::int32_t;

/// Traversal direction of one arc along a tree path. `kUp` walks from a
/// dependent to its head (written `label:u`), `kDown` walks from a head to a
/// dependent (written `label:d`).
enum class Direction : std::uint8_t { kUp = 0, kDown = 1 };

inline Direction flip(Direction d) {
  return d == Direction::kUp ? Direction::kDown : Direction::kUp;
}

struct DirectedRelation {
  RelationId label = 0;
  Direction dir = Direction::kUp;

  /// Row of this directed relation in the relation embedding matrix.
  std::size_t row() const {
    return 2 * static_cast<std::size_t>(label) + static_cast<std::size_t>(dir);
  }
  static DirectedRelation from_row(std::size_t row) {
    return {static_cast<RelationId>(row / 2), static_cast<Direction>(row % 2)};
  }

  friend bool operator==(const DirectedRelation&, const DirectedRelation&) = default;
};

/// An unlexicalized dependency path: the grammatical relations met when walking
/// the tree from one token to another. Ascending steps precede descending ones.
struct DepPath {
  std::vector<DirectedRelation> steps;

  std::size_t hops() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  /// The path walked in the opposite direction.
  DepPath reversed() const;

  friend bool operator==(const DepPath&, const DepPath&) = default;
};

struct DepPathHash {
  std::size_t operator()(const DepPath& p) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (const auto& s : p.steps) {
      h ^= s.row() + 1;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace wdemb
