#include "lbvh/bvh.hpp"

#include <atomic>
#include <bit>
#include <stdexcept>

namespace lbvh {

namespace {

constexpr std::uint64_t composite(const MortonKey& k) {
  return (std::uint64_t{k.code} << 32) | k.index;
}

// Codes occupy 30 of the upper 32 bits, so two composite bits are always 0.
constexpr int kUnusedHighBits = 64 - 32 - kMortonBits;

constexpr std::uint32_t leaf_ordinal(std::size_t leaf_count, std::uint32_t position) {
  return static_cast<std::uint32_t>(leaf_count - 1) + position;
}

void link_children(std::span<Node> nodes, std::size_t leaf_count, std::uint32_t internal,
                   std::uint32_t first, std::uint32_t last, std::uint32_t split) {
  Node& node = nodes[internal];
  node.left = split == first ? leaf_ordinal(leaf_count, split) : split;
  node.right = split + 1 == last ? leaf_ordinal(leaf_count, split + 1) : split + 1;
}

void partition(std::span<const MortonKey> sorted, std::span<Node> nodes, std::uint32_t internal,
               std::uint32_t first, std::uint32_t last) {
  const std::uint32_t split = find_split(sorted, first, last);
  link_children(nodes, sorted.size(), internal, first, last, split);
  if (split != first) partition(sorted, nodes, split, first, split);
  if (split + 1 != last) partition(sorted, nodes, split + 1, split + 1, last);
}

void refit_postorder(std::span<Node> nodes, std::size_t leaf_count, std::uint32_t ordinal) {
  if (ordinal + 1 >= leaf_count) return;
  Node& node = nodes[ordinal];
  refit_postorder(nodes, leaf_count, node.left);
  refit_postorder(nodes, leaf_count, node.right);
  node.box = expand(nodes[node.left].box, nodes[node.right].box);
}

}  // namespace

int delta(std::span<const MortonKey> sorted, std::int64_t i, std::int64_t j) {
  if (j < 0 || j >= static_cast<std::int64_t>(sorted.size())) return -1;
  const std::uint64_t diff = composite(sorted[static_cast<std::size_t>(i)]) ^
                             composite(sorted[static_cast<std::size_t>(j)]);
  return std::countl_zero(diff) - kUnusedHighBits;
}

std::uint32_t find_split(std::span<const MortonKey> sorted, std::uint32_t first,
                         std::uint32_t last) {
  const int common = delta(sorted, first, last);
  std::uint32_t split = first;
  std::uint32_t step = last - first;
  do {
    step = (step + 1) >> 1;
    const std::uint32_t candidate = split + step;
    if (candidate < last && delta(sorted, first, candidate) > common) split = candidate;
  } while (step > 1);
  return split;
}

std::pair<std::uint32_t, std::uint32_t> determine_range(std::span<const MortonKey> sorted,
                                                        std::uint32_t i) {
  const std::int64_t pos = i;
  const std::int64_t dir = delta(sorted, pos, pos + 1) - delta(sorted, pos, pos - 1) >= 0 ? 1 : -1;
  const int min_prefix = delta(sorted, pos, pos - dir);

  std::int64_t max_len = 2;
  while (delta(sorted, pos, pos + max_len * dir) > min_prefix) max_len <<= 1;

  std::int64_t len = 0;
  for (std::int64_t t = max_len >> 1; t >= 1; t >>= 1) {
    if (delta(sorted, pos, pos + (len + t) * dir) > min_prefix) len += t;
  }
  const std::int64_t other = pos + len * dir;
  return {static_cast<std::uint32_t>(std::min(pos, other)),
          static_cast<std::uint32_t>(std::max(pos, other))};
}

std::vector<Node> generate_hierarchy(std::span<const MortonKey> sorted,
                                     std::span<const Box> leaf_boxes, Execution exec) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("empty scene");
  if (leaf_boxes.size() != n) throw std::invalid_argument("one leaf box per key required");

  std::vector<Node> nodes(2 * n - 1);
  detail::for_each_index(exec, n, [&](std::size_t j) {
    Node& leaf = nodes[n - 1 + j];
    leaf.box = leaf_boxes[j];
    leaf.left = sorted[j].index;
    leaf.right = kNoChild;
  });
  if (n == 1) return nodes;

  if (exec == Execution::serial) {
    partition(sorted, nodes, 0, 0, static_cast<std::uint32_t>(n - 1));
    return nodes;
  }

  detail::for_each_index(exec, n - 1, [&](std::size_t i) {
    const auto [first, last] = determine_range(sorted, static_cast<std::uint32_t>(i));
    const std::uint32_t split = find_split(sorted, first, last);
    link_children(nodes, n, static_cast<std::uint32_t>(i), first, last, split);
  });
  return nodes;
}

void refit(std::span<Node> nodes, std::size_t leaf_count, Execution exec) {
  if (leaf_count < 2) return;
  if (exec == Execution::serial) {
    refit_postorder(nodes, leaf_count, Bvh::root());
    return;
  }

  const std::size_t internal_count = leaf_count - 1;
  std::vector<std::uint32_t> parent(nodes.size(), kNoChild);
  detail::for_each_index(exec, internal_count, [&](std::size_t i) {
    parent[nodes[i].left] = static_cast<std::uint32_t>(i);
    parent[nodes[i].right] = static_cast<std::uint32_t>(i);
  });

  // One upward walk per leaf. The first walker to reach a node stops; the
  // second finds both children final and computes the box.
  std::vector<std::atomic<std::uint32_t>> arrivals(internal_count);
  detail::for_each_index(exec, leaf_count, [&](std::size_t j) {
    std::uint32_t current = parent[internal_count + j];
    while (current != kNoChild) {
      if (arrivals[current].fetch_add(1, std::memory_order_acq_rel) == 0) return;
      Node& node = nodes[current];
      node.box = expand(nodes[node.left].box, nodes[node.right].box);
      current = parent[current];
    }
  });
}

Bvh::Bvh(std::span<const Box> boxes, Execution exec) : leaf_count_(boxes.size()) {
  if (boxes.empty()) throw std::invalid_argument("empty scene");
  if (boxes.size() >= std::size_t{kNoChild} / 2)
    throw std::invalid_argument("too many boxes for 32-bit node ordinals");
  for (const Box& b : boxes) {
    if (!is_valid(b)) throw std::invalid_argument("invalid box: non-finite or min > max");
  }

  scene_ = scene_bounds(boxes, exec);
  const std::vector<MortonKey> keys = assign_keys(boxes, scene_, exec);
  const std::vector<std::uint32_t> order = sort_by_key(keys, exec);

  std::vector<MortonKey> sorted(keys.size());
  std::vector<Box> leaf_boxes(keys.size());
  detail::for_each_index(exec, order.size(), [&](std::size_t j) {
    sorted[j] = keys[order[j]];
    leaf_boxes[j] = boxes[order[j]];
  });

  nodes_ = generate_hierarchy(sorted, leaf_boxes, exec);
  refit(nodes_, leaf_count_, exec);
}

}  // namespace lbvh
