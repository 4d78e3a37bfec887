#include "lbvh/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lbvh/morton.hpp"

namespace lbvh {

namespace {

// Queries are handed to workers in small chunks; per-query cost varies
// wildly in the hollow-shape workloads.
constexpr std::size_t kQueryChunk = 64;

struct Candidate {
  float distance_sq;
  std::uint32_t index;

  friend constexpr bool operator<(const Candidate& a, const Candidate& b) {
    if (a.distance_sq != b.distance_sq) return a.distance_sq < b.distance_sq;
    return a.index < b.index;
  }
};

// Max-heap of the best candidates seen so far, keyed by (distance, ordinal).
class BestK {
 public:
  BestK(std::vector<Candidate>& storage, std::size_t capacity)
      : heap_(storage), capacity_(capacity) {
    heap_.clear();
  }

  bool full() const { return heap_.size() == capacity_; }

  // True when nothing at squared distance d can enter the set.
  bool excludes(float d) const { return full() && d > heap_.front().distance_sq; }

  void offer(Candidate c) {
    if (!full()) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  std::span<const Candidate> sorted() {
    std::sort_heap(heap_.begin(), heap_.end());
    return heap_;
  }

 private:
  std::vector<Candidate>& heap_;
  std::size_t capacity_;
};

std::span<const Candidate> knn_candidates(const Bvh& tree, const KnnQuery& query,
                                          std::vector<Candidate>& storage) {
  const std::size_t k = std::min<std::size_t>(query.k, tree.size());
  BestK best(storage, k);
  const Point& center = query.center;

  if (tree.size() == 1) {
    const Node& leaf = tree.node(Bvh::root());
    best.offer({distance_sq(center, leaf.box), leaf.left});
    return best.sorted();
  }

  TraversalStack stack;
  stack.push(Bvh::root(), distance_sq(center, tree.node(Bvh::root()).box));
  while (!stack.empty()) {
    const auto entry = stack.pop();
    if (best.excludes(entry.distance_sq)) continue;

    const Node& node = tree.node(entry.node);
    std::array<TraversalStack::Entry, 2> inner{};
    std::size_t inner_count = 0;
    for (const std::uint32_t child : {node.left, node.right}) {
      const Node& c = tree.node(child);
      const float d = distance_sq(center, c.box);
      if (tree.is_leaf(child)) {
        best.offer({d, c.left});
      } else if (!best.excludes(d)) {
        inner[inner_count++] = {child, d};
      }
    }
    // Nearer child goes on last so it is popped first.
    if (inner_count == 2 && inner[0].distance_sq < inner[1].distance_sq) {
      std::swap(inner[0], inner[1]);
    }
    for (std::size_t c = 0; c < inner_count; ++c) {
      stack.push(inner[c].node, inner[c].distance_sq);
    }
  }
  return best.sorted();
}

void validate(std::span<const SpatialQuery> queries) {
  for (const SpatialQuery& q : queries) {
    if (!is_finite(q.center)) throw std::invalid_argument("query center must be finite");
    if (!std::isfinite(q.radius) || q.radius < 0.f)
      throw std::invalid_argument("query radius must be finite and non-negative");
  }
}

void validate(std::span<const KnnQuery> queries) {
  for (const KnnQuery& q : queries) {
    if (!is_finite(q.center)) throw std::invalid_argument("query center must be finite");
    if (q.k < 1) throw std::invalid_argument("k must be at least 1");
  }
}

template <typename Query>
std::vector<std::uint32_t> execution_order(const Bvh& tree, std::span<const Query> queries,
                                           const QueryOptions& options) {
  if (!options.sort_queries) {
    std::vector<std::uint32_t> order(queries.size());
    std::iota(order.begin(), order.end(), 0u);
    return order;
  }
  std::vector<Point> centers(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) centers[i] = queries[i].center;
  return sort_queries(centers, tree.scene(), options.exec);
}

std::vector<std::size_t> exclusive_scan(std::span<const std::size_t> counts) {
  std::vector<std::size_t> offsets(counts.size() + 1, 0);
  std::inclusive_scan(counts.begin(), counts.end(), offsets.begin() + 1);
  return offsets;
}

}  // namespace

bool is_well_formed(const ResultSet& rs) {
  if (rs.offsets.empty() || rs.offsets.front() != 0) return false;
  if (!std::is_sorted(rs.offsets.begin(), rs.offsets.end())) return false;
  if (rs.offsets.back() != rs.indices.size()) return false;
  return rs.distances.empty() || rs.distances.size() == rs.indices.size();
}

std::vector<Neighbor> traverse_knn_one(const Bvh& tree, const KnnQuery& query) {
  validate(std::span(&query, 1));
  std::vector<Candidate> storage;
  std::vector<Neighbor> out;
  for (const Candidate& c : knn_candidates(tree, query, storage)) {
    out.push_back({c.index, std::sqrt(c.distance_sq)});
  }
  return out;
}

std::vector<std::uint32_t> sort_queries(std::span<const Point> centers, const Box& scene,
                                        Execution exec) {
  return sort_by_key(assign_keys(centers, scene, exec), exec);
}

ResultSet query_spatial_2p(const Bvh& tree, std::span<const SpatialQuery> queries,
                           QueryOptions options) {
  validate(queries);
  const std::vector<std::uint32_t> order = execution_order(tree, queries, options);

  std::vector<std::size_t> counts(queries.size());
  detail::for_each_index(
      options.exec, queries.size(),
      [&](std::size_t j) {
        const std::uint32_t q = order[j];
        counts[q] = traverse_spatial_one(tree, queries[q], [](std::uint32_t) {});
      },
      kQueryChunk);

  ResultSet rs;
  rs.offsets = exclusive_scan(counts);
  rs.indices.resize(rs.offsets.back());
  detail::for_each_index(
      options.exec, queries.size(),
      [&](std::size_t j) {
        const std::uint32_t q = order[j];
        std::size_t out = rs.offsets[q];
        traverse_spatial_one(tree, queries[q], [&](std::uint32_t idx) { rs.indices[out++] = idx; });
      },
      kQueryChunk);
  return rs;
}

BufferedResult query_spatial_1p(const Bvh& tree, std::span<const SpatialQuery> queries,
                                std::size_t buffer_size, QueryOptions options) {
  if (buffer_size < 1) throw std::invalid_argument("buffer_size must be at least 1");
  if (!queries.empty() && buffer_size > std::numeric_limits<std::size_t>::max() / queries.size())
    throw std::invalid_argument("buffer_size too large for this batch");
  validate(queries);
  const std::vector<std::uint32_t> order = execution_order(tree, queries, options);

  // Slots are laid out in execution order so neighboring workers write
  // neighboring memory.
  std::vector<std::uint32_t> buffer(queries.size() * buffer_size);
  std::vector<std::size_t> counts(queries.size());
  detail::for_each_index(
      options.exec, queries.size(),
      [&](std::size_t j) {
        const std::uint32_t q = order[j];
        const std::size_t base = j * buffer_size;
        std::size_t stored = 0;
        counts[q] = traverse_spatial_one(tree, queries[q], [&](std::uint32_t idx) {
          if (stored < buffer_size) buffer[base + stored] = idx;
          ++stored;
        });
      },
      kQueryChunk);

  const bool overflow =
      std::any_of(counts.begin(), counts.end(), [&](std::size_t c) { return c > buffer_size; });
  if (overflow) return {query_spatial_2p(tree, queries, options), true};

  BufferedResult out;
  ResultSet& rs = out.results;
  rs.offsets = exclusive_scan(counts);
  rs.indices.resize(rs.offsets.back());
  detail::for_each_index(options.exec, queries.size(), [&](std::size_t j) {
    const std::uint32_t q = order[j];
    const auto first = buffer.begin() + static_cast<std::ptrdiff_t>(j * buffer_size);
    std::copy(first, first + static_cast<std::ptrdiff_t>(counts[q]),
              rs.indices.begin() + static_cast<std::ptrdiff_t>(rs.offsets[q]));
  });
  return out;
}

ResultSet query_knn(const Bvh& tree, std::span<const KnnQuery> queries, QueryOptions options) {
  validate(queries);
  const std::vector<std::uint32_t> order = execution_order(tree, queries, options);

  // The result count of every query is known up front.
  std::vector<std::size_t> counts(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    counts[q] = std::min<std::size_t>(queries[q].k, tree.size());
  }

  ResultSet rs;
  rs.offsets = exclusive_scan(counts);
  rs.indices.resize(rs.offsets.back());
  rs.distances.resize(rs.offsets.back());
  detail::for_each_index(
      options.exec, queries.size(),
      [&](std::size_t j) {
        thread_local std::vector<Candidate> storage;
        const std::uint32_t q = order[j];
        std::size_t out = rs.offsets[q];
        for (const Candidate& c : knn_candidates(tree, queries[q], storage)) {
          rs.indices[out] = c.index;
          rs.distances[out] = std::sqrt(c.distance_sq);
          ++out;
        }
      },
      kQueryChunk);
  return rs;
}

void query(const Bvh& tree, std::span<const SpatialQuery> queries,
           std::vector<std::uint32_t>& indices, std::vector<std::size_t>& offsets,
           std::optional<std::size_t> buffer_size, QueryOptions options) {
  ResultSet rs = buffer_size ? query_spatial_1p(tree, queries, *buffer_size, options).results
                             : query_spatial_2p(tree, queries, options);
  indices = std::move(rs.indices);
  offsets = std::move(rs.offsets);
}

}  // namespace lbvh
