#include <functional>
#include <map>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lbvh/bvh.hpp"
#include "lbvh/datasets.hpp"
#include "tree_checks.hpp"

using namespace lbvh;

namespace {

std::vector<MortonKey> keys_from_codes(std::initializer_list<std::uint32_t> codes) {
  std::vector<MortonKey> keys;
  std::uint32_t i = 0;
  for (const std::uint32_t c : codes) keys.push_back({c, i++});
  return keys;
}

// Bit b of the 62-bit (code, index) composite, b = 61 being the top code bit.
int composite_bit(const MortonKey& k, int b) {
  return b >= 32 ? static_cast<int>((k.code >> (b - 32)) & 1u) : static_cast<int>((k.index >> b) & 1u);
}

int naive_delta(const std::vector<MortonKey>& keys, long i, long j) {
  if (j < 0 || j >= static_cast<long>(keys.size())) return -1;
  int prefix = 0;
  for (int b = 61; b >= 0; --b) {
    if (composite_bit(keys[i], b) != composite_bit(keys[j], b)) break;
    ++prefix;
  }
  return prefix;
}

// Split by scanning for the last key that still has a 0 in the highest bit
// where the range ends differ.
std::uint32_t naive_split(const std::vector<MortonKey>& keys, std::uint32_t first,
                          std::uint32_t last) {
  int bit = 61;
  while (composite_bit(keys[first], bit) == composite_bit(keys[last], bit)) --bit;
  std::uint32_t split = first;
  for (std::uint32_t s = first; s < last; ++s) {
    if (composite_bit(keys[s], bit) == 0) split = s;
  }
  return split;
}

// Internal ordinal -> leaf range, by top-down partitioning with naive splits.
std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> naive_ranges(
    const std::vector<MortonKey>& keys) {
  std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> ranges;
  std::function<void(std::uint32_t, std::uint32_t, std::uint32_t)> visit =
      [&](std::uint32_t node, std::uint32_t first, std::uint32_t last) {
        ranges[node] = {first, last};
        const std::uint32_t s = naive_split(keys, first, last);
        if (s != first) visit(s, first, s);
        if (s + 1 != last) visit(s + 1, s + 1, last);
      };
  visit(0, 0, static_cast<std::uint32_t>(keys.size() - 1));
  return ranges;
}

std::vector<MortonKey> random_sorted_keys(std::mt19937& rng, std::size_t n,
                                          std::uint32_t code_range) {
  std::uniform_int_distribution<std::uint32_t> code(0, code_range - 1);
  std::vector<MortonKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = {code(rng), static_cast<std::uint32_t>(i)};
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<Box> point_boxes(std::initializer_list<Point> points) {
  std::vector<Box> boxes;
  for (const Point& p : points) boxes.push_back(Box::from_point(p));
  return boxes;
}

std::size_t max_depth(const Bvh& tree, std::uint32_t node = Bvh::root()) {
  if (tree.is_leaf(node)) return 1;
  return 1 + std::max(max_depth(tree, tree.node(node).left), max_depth(tree, tree.node(node).right));
}

}  // namespace

TEST(Delta, Examples) {
  const auto keys = keys_from_codes({0b00100, 0b00101});
  // 25 leading zero bits above the 5 shown, then 4 shared bits.
  EXPECT_EQ(delta(keys, 0, 1), 25 + 4);
  const std::vector<MortonKey> dup{{9, 2}, {9, 3}};
  EXPECT_EQ(delta(dup, 0, 1), 30 + 31);
  EXPECT_EQ(delta(keys, 0, -1), -1);
  EXPECT_EQ(delta(keys, 0, 2), -1);
}

TEST(Delta, MatchesBitwiseOracle) {
  std::mt19937 rng(1);
  for (const std::uint32_t range : {8u, 1u << 30}) {
    const auto keys = random_sorted_keys(rng, 500, range);
    for (int t = 0; t < 2000; ++t) {
      const long i = std::uniform_int_distribution<long>(0, 499)(rng);
      const long j = std::uniform_int_distribution<long>(-1, 500)(rng);
      ASSERT_EQ(delta(keys, i, j), naive_delta(keys, i, j));
    }
  }
}

TEST(FindSplit, Examples) {
  EXPECT_EQ(find_split(keys_from_codes({0b00100, 0b00101, 0b10000, 0b10001}), 0, 3), 1u);
  EXPECT_EQ(find_split(keys_from_codes({0, 1}), 0, 1), 0u);
  EXPECT_EQ(find_split(keys_from_codes({1, 2, 4, 5, 19, 24, 25, 30}), 0, 7), 3u);
}

TEST(FindSplit, MatchesScanOracle) {
  std::mt19937 rng(2);
  for (const std::uint32_t range : {2u, 64u, 1u << 30}) {
    const auto keys = random_sorted_keys(rng, 300, range);
    for (int t = 0; t < 2000; ++t) {
      std::uint32_t a = std::uniform_int_distribution<std::uint32_t>(0, 299)(rng);
      std::uint32_t b = std::uniform_int_distribution<std::uint32_t>(0, 299)(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      ASSERT_EQ(find_split(keys, a, b), naive_split(keys, a, b)) << a << ".." << b;
    }
  }
}

TEST(DetermineRange, Examples) {
  const auto keys = keys_from_codes({0, 1, 6, 7});
  EXPECT_EQ(determine_range(keys, 0), std::make_pair(0u, 3u));
  EXPECT_EQ(determine_range(keys, 1), std::make_pair(0u, 1u));
  EXPECT_EQ(determine_range(keys, 2), std::make_pair(2u, 3u));
  EXPECT_EQ(determine_range(keys_from_codes({3, 9}), 0), std::make_pair(0u, 1u));
}

TEST(DetermineRange, MatchesTopDownPartition) {
  std::mt19937 rng(3);
  for (const std::size_t n : {2u, 3u, 5u, 64u, 777u}) {
    for (const std::uint32_t range : {1u, 16u, 1u << 30}) {
      const auto keys = random_sorted_keys(rng, n, range);
      const auto expected = naive_ranges(keys);
      ASSERT_EQ(expected.size(), n - 1);
      for (const auto& [node, r] : expected) {
        ASSERT_EQ(determine_range(keys, node), r) << "n=" << n << " node=" << node;
      }
    }
  }
}

TEST(GenerateHierarchy, TwoLeaves) {
  const auto keys = keys_from_codes({0, 5});
  const auto boxes = point_boxes({{0, 0, 0}, {1, 1, 1}});
  const auto nodes = generate_hierarchy(keys, boxes);
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(nodes[0].left, 1u);
  EXPECT_EQ(nodes[0].right, 2u);
}

TEST(GenerateHierarchy, FourLeavesSplitIntoTwoPairs) {
  const auto keys = keys_from_codes({0, 1, 6, 7});
  const auto boxes = point_boxes({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  for (const Execution exec : {Execution::serial, Execution::parallel}) {
    const auto nodes = generate_hierarchy(keys, boxes, exec);
    EXPECT_EQ(nodes[0].left, 1u);
    EXPECT_EQ(nodes[0].right, 2u);
    EXPECT_EQ(nodes[1].left, 3u);  // leaves live at ordinals 3..6
    EXPECT_EQ(nodes[1].right, 4u);
    EXPECT_EQ(nodes[2].left, 5u);
    EXPECT_EQ(nodes[2].right, 6u);
  }
}

TEST(GenerateHierarchy, ParallelMatchesRecursiveReference) {
  std::mt19937 rng(4);
  for (const std::size_t n : {2u, 3u, 8u, 1000u, 30000u}) {
    for (const std::uint32_t range : {1u, 256u, 1u << 30}) {
      const auto keys = random_sorted_keys(rng, n, range);
      const std::vector<Box> boxes(n, Box::from_point({0, 0, 0}));
      ASSERT_EQ(generate_hierarchy(keys, boxes, Execution::parallel),
                generate_hierarchy(keys, boxes, Execution::serial))
          << "n=" << n << " range=" << range;
    }
  }
}

TEST(GenerateHierarchy, EightLeavesHaveSevenInternalNodesWithOneParentEach) {
  const auto keys = keys_from_codes({1, 2, 4, 5, 19, 24, 25, 30});
  const std::vector<Box> boxes(8, Box::from_point({0, 0, 0}));
  const auto nodes = generate_hierarchy(keys, boxes);
  ASSERT_EQ(nodes.size(), 15u);
  std::vector<int> parents(15, 0);
  for (int i = 0; i < 7; ++i) {
    ++parents[nodes[i].left];
    ++parents[nodes[i].right];
  }
  EXPECT_EQ(parents[0], 0);
  for (int i = 1; i < 15; ++i) EXPECT_EQ(parents[i], 1) << "node " << i;
}

TEST(Refit, SingleLeafIsNoOp) {
  std::vector<Node> nodes{{Box::from_point({1, 2, 3}), 0, kNoChild}};
  refit(nodes, 1);
  EXPECT_EQ(nodes[0].box, Box::from_point({1, 2, 3}));
}

TEST(Refit, TwoLeaves) {
  for (const Execution exec : {Execution::serial, Execution::parallel}) {
    std::vector<Node> nodes{{Box{}, 1, 2},
                            {Box{{0, 0, 0}, {1, 1, 1}}, 0, kNoChild},
                            {Box{{2, 2, 2}, {3, 3, 3}}, 1, kNoChild}};
    refit(nodes, 2, exec);
    EXPECT_EQ(nodes[0].box, (Box{{0, 0, 0}, {3, 3, 3}}));
  }
}

TEST(Refit, FourPointLeaves) {
  const auto keys = keys_from_codes({0, 1, 6, 7});
  const auto boxes = point_boxes({{0, 0, 0}, {1, 0, 0}, {4, 0, 0}, {5, 0, 0}});
  for (const Execution exec : {Execution::serial, Execution::parallel}) {
    auto nodes = generate_hierarchy(keys, boxes, exec);
    refit(nodes, 4, exec);
    EXPECT_EQ(nodes[0].box, (Box{{0, 0, 0}, {5, 0, 0}}));
    EXPECT_EQ(nodes[1].box, (Box{{0, 0, 0}, {1, 0, 0}}));
    EXPECT_EQ(nodes[2].box, (Box{{4, 0, 0}, {5, 0, 0}}));
  }
}

TEST(Build, SingleBoxIsALeafRoot) {
  const std::vector<Box> boxes{{{0, 0, 0}, {1, 1, 1}}};
  const Bvh tree(boxes);
  EXPECT_EQ(tree.nodes().size(), 1u);
  EXPECT_TRUE(tree.is_leaf(Bvh::root()));
  EXPECT_EQ(checks::structural_violation(tree, boxes), "");
}

TEST(Build, EightBoxes) {
  std::vector<Box> boxes;
  for (int i = 0; i < 8; ++i) boxes.push_back(Box::from_point({float(i), float(i % 3), 0}));
  const Bvh tree(boxes);
  EXPECT_EQ(tree.nodes().size(), 15u);
  for (std::uint32_t i = 0; i < 7; ++i) EXPECT_FALSE(tree.is_leaf(i));
  for (std::uint32_t i = 7; i < 15; ++i) EXPECT_TRUE(tree.is_leaf(i));
  EXPECT_EQ(checks::structural_violation(tree, boxes), "");
}

TEST(Build, FourPointBoxes) {
  const auto boxes = point_boxes({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const Bvh tree(boxes);
  EXPECT_EQ(tree.node(Bvh::root()).box, (Box{{0, 0, 0}, {1, 1, 0}}));
  EXPECT_EQ(checks::structural_violation(tree, boxes), "");
}

TEST(Build, RejectsEmptyAndInvalidInput) {
  try {
    Bvh tree(std::span<const Box>{});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "empty scene");
  }
  const std::vector<Box> inverted{{{1, 0, 0}, {0, 1, 1}}};
  EXPECT_THROW(Bvh{inverted}, std::invalid_argument);
  const std::vector<Box> nan{Box::from_point({std::nanf(""), 0, 0})};
  EXPECT_THROW(Bvh{nan}, std::invalid_argument);
}

TEST(Build, StructuralInvariantsOnEveryShape) {
  using datasets::Shape;
  using datasets::Variant;
  for (const Shape shape : {Shape::cube, Shape::sphere}) {
    for (const Variant variant : {Variant::filled, Variant::hollow}) {
      for (const std::size_t n : {2u, 3u, 10u, 1000u, 20000u}) {
        const auto boxes = datasets::to_boxes(datasets::generate({shape, variant, n, n}));
        const Bvh tree(boxes);
        ASSERT_EQ(checks::structural_violation(tree, boxes), "")
            << datasets::to_string(shape, variant) << " n=" << n;
        EXPECT_EQ(tree, Bvh(boxes, Execution::serial));
      }
    }
  }
}

TEST(Build, NonDegenerateBoxes) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<float> coord(-50.f, 50.f), size(0.f, 3.f);
  std::vector<Box> boxes(5000);
  for (Box& b : boxes) {
    const Point lo{coord(rng), coord(rng), coord(rng)};
    b = {lo, {lo.x + size(rng), lo.y + size(rng), lo.z + size(rng)}};
  }
  const Bvh tree(boxes);
  EXPECT_EQ(checks::structural_violation(tree, boxes), "");
}

TEST(Build, IdenticalBoxesUseIndexTieBreak) {
  const std::vector<Box> boxes(10000, Box::from_point({1.5f, -2.f, 7.f}));
  const Bvh tree(boxes);
  EXPECT_EQ(checks::structural_violation(tree, boxes), "");
  EXPECT_LE(max_depth(tree), 20u);
}

TEST(Build, DeterministicAcrossThreadCountsAndPaths) {
  const auto boxes = datasets::to_boxes(datasets::gen_filled_cube(50000, 8));
  const Bvh reference(boxes, Execution::serial);
  const int saved = omp_get_max_threads();
  for (const int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(Bvh(boxes), reference) << threads << " threads";
  }
  omp_set_num_threads(saved);
}
