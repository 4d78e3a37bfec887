#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lbvh/execution.hpp"
#include "lbvh/geometry.hpp"
#include "lbvh/morton.hpp"

namespace lbvh {

inline constexpr std::uint32_t kNoChild = std::numeric_limits<std::uint32_t>::max();

/// Tree node. Internal nodes hold two child ordinals; leaves hold the
/// original object ordinal in `left` and kNoChild in `right`. There is no
/// parent link.
struct Node {
  Box box;
  std::uint32_t left = kNoChild;
  std::uint32_t right = kNoChild;

  friend constexpr bool operator==(const Node&, const Node&) = default;
};

/// Linear BVH over n boxes stored in one flat array of 2n-1 nodes:
/// internal nodes at [0, n-1), leaves in Morton order at [n-1, 2n-1).
/// The root is always ordinal 0 (a leaf when n == 1). Immutable once built.
class Bvh {
 public:
  /// Throws std::invalid_argument("empty scene") for no boxes and for any
  /// box that is non-finite or has min > max.
  explicit Bvh(std::span<const Box> boxes, Execution exec = Execution::parallel);

  std::size_t size() const { return leaf_count_; }
  const Box& scene() const { return scene_; }
  std::span<const Node> nodes() const { return nodes_; }

  static constexpr std::uint32_t root() { return 0; }
  bool is_leaf(std::uint32_t ordinal) const { return ordinal + 1 >= leaf_count_; }
  const Node& node(std::uint32_t ordinal) const { return nodes_[ordinal]; }

  friend bool operator==(const Bvh&, const Bvh&) = default;

 private:
  friend struct BvhTestAccess;

  std::vector<Node> nodes_;
  Box scene_;
  std::size_t leaf_count_ = 0;
};

// Lets test and verification code tamper with a built tree. Not for
// production use.
struct BvhTestAccess {
  static std::vector<Node>& nodes(Bvh& bvh) { return bvh.nodes_; }
};

// Construction stages. Exposed so each can be checked on its own.

/// Common prefix length of the (code, index) composites of sorted keys i
/// and j, in [0, 62]. Returns -1 when j is outside [0, keys.size()).
int delta(std::span<const MortonKey> sorted, std::int64_t i, std::int64_t j);

/// Position s in [first, last) where the highest differing bit of the range
/// switches; [first, s] and [s+1, last] become the two children.
std::uint32_t find_split(std::span<const MortonKey> sorted, std::uint32_t first,
                         std::uint32_t last);

/// Leaf range owned by internal node i under the Karras numbering.
std::pair<std::uint32_t, std::uint32_t> determine_range(std::span<const MortonKey> sorted,
                                                        std::uint32_t i);

/// Topology for sorted keys, with leaf boxes set and internal boxes left
/// unset. `leaf_boxes[j]` is the box of the object at sorted position j.
/// The parallel path computes each internal node independently; the serial
/// path partitions recursively from the root and must agree exactly.
std::vector<Node> generate_hierarchy(std::span<const MortonKey> sorted,
                                     std::span<const Box> leaf_boxes,
                                     Execution exec = Execution::parallel);

/// Fills every internal box with the union of its children's boxes.
void refit(std::span<Node> nodes, std::size_t leaf_count, Execution exec = Execution::parallel);

}  // namespace lbvh
