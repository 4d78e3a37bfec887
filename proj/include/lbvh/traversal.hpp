#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lbvh/bvh.hpp"
#include "lbvh/execution.hpp"
#include "lbvh/geometry.hpp"

namespace lbvh {

/// All objects whose box lies within `radius` of `center` (inclusive).
struct SpatialQuery {
  Point center;
  float radius = 0.f;
};

/// The k objects whose boxes are closest to `center`.
struct KnnQuery {
  Point center;
  std::uint32_t k = 1;
};

/// Compressed-sparse-row style batch output: results of query q are
/// indices[offsets[q] .. offsets[q+1]). `distances` is filled only by kNN
/// queries and is aligned with `indices`.
struct ResultSet {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<float> distances;

  std::size_t query_count() const { return offsets.size() - 1; }
  std::size_t count(std::size_t q) const { return offsets[q + 1] - offsets[q]; }
  std::span<const std::uint32_t> results(std::size_t q) const {
    return std::span(indices).subspan(offsets[q], count(q));
  }
  std::span<const float> result_distances(std::size_t q) const {
    return std::span(distances).subspan(offsets[q], count(q));
  }
};

/// offsets[0] == 0, monotone, offsets.back() == indices.size(), and
/// distances either empty or aligned with indices.
bool is_well_formed(const ResultSet& rs);

struct BufferedResult {
  ResultSet results;
  bool fell_back = false;  // some query exceeded buffer_size; 2P result returned
};

struct QueryOptions {
  bool sort_queries = true;
  Execution exec = Execution::parallel;
};

struct Neighbor {
  std::uint32_t index = 0;
  float distance = 0.f;  // true (not squared) distance

  friend constexpr bool operator==(const Neighbor&, const Neighbor&) = default;
};

inline constexpr std::size_t kStackCapacity = 64;

/// Fixed-capacity LIFO of (node ordinal, squared distance) used by both
/// traversals. Overflow throws std::runtime_error.
class TraversalStack {
 public:
  struct Entry {
    std::uint32_t node;
    float distance_sq;
  };

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }

  void push(std::uint32_t node, float distance_sq = 0.f) {
    if (size_ == kStackCapacity) throw std::runtime_error("traversal stack exhausted");
    entries_[size_++] = {node, distance_sq};
  }

  Entry pop() { return entries_[--size_]; }

 private:
  std::array<Entry, kStackCapacity> entries_{};
  std::size_t size_ = 0;
};

/// Visits every leaf whose box satisfies distance_sq(center, box) <= r^2 and
/// calls sink(object_ordinal) once for each. Returns the number of hits.
template <typename Sink>
std::size_t traverse_spatial_one(const Bvh& tree, const SpatialQuery& query, Sink&& sink) {
  const float radius_sq = query.radius * query.radius;
  auto hit = [&](const Box& b) { return distance_sq(query.center, b) <= radius_sq; };

  if (tree.size() == 1) {
    const Node& leaf = tree.node(Bvh::root());
    if (!hit(leaf.box)) return 0;
    sink(leaf.left);
    return 1;
  }

  std::size_t count = 0;
  TraversalStack stack;
  if (hit(tree.node(Bvh::root()).box)) stack.push(Bvh::root());
  while (!stack.empty()) {
    const Node& node = tree.node(stack.pop().node);
    for (const std::uint32_t child : {node.left, node.right}) {
      const Node& c = tree.node(child);
      if (!hit(c.box)) continue;
      if (tree.is_leaf(child)) {
        sink(c.left);
        ++count;
      } else {
        stack.push(child);
      }
    }
  }
  return count;
}

/// The min(k, n) objects closest to the query, sorted by (distance, ordinal).
std::vector<Neighbor> traverse_knn_one(const Bvh& tree, const KnnQuery& query);

/// Count-and-fill: one traversal to size every query, a second to store.
ResultSet query_spatial_2p(const Bvh& tree, std::span<const SpatialQuery> queries,
                           QueryOptions options = {});

/// Single pass into buffer_size slots per query followed by compaction;
/// falls back to query_spatial_2p when any query overflows its slots.
BufferedResult query_spatial_1p(const Bvh& tree, std::span<const SpatialQuery> queries,
                                std::size_t buffer_size, QueryOptions options = {});

ResultSet query_knn(const Bvh& tree, std::span<const KnnQuery> queries,
                    QueryOptions options = {});

/// Order in which to execute queries: by Morton code of each center within
/// `scene`, ties broken by query ordinal.
std::vector<std::uint32_t> sort_queries(std::span<const Point> centers, const Box& scene,
                                        Execution exec = Execution::parallel);

/// Library-style entry point: fills `indices` and `offsets` for a batch of
/// spatial queries, using 1P when a buffer size is given and 2P otherwise.
void query(const Bvh& tree, std::span<const SpatialQuery> queries,
           std::vector<std::uint32_t>& indices, std::vector<std::size_t>& offsets,
           std::optional<std::size_t> buffer_size = std::nullopt, QueryOptions options = {});

}  // namespace lbvh
