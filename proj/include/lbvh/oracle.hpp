#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbvh/geometry.hpp"
#include "lbvh/traversal.hpp"

namespace lbvh::oracle {

// Brute-force references, O(n) per query. They use the same inclusive
// radius test and (distance, ordinal) tie rule as the tree traversals, so
// radius results must match exactly.

std::vector<std::uint32_t> brute_radius(std::span<const Point> points, const SpatialQuery& query);

std::vector<Neighbor> brute_knn(std::span<const Point> points, const KnnQuery& query);

/// Describes the first difference between a tree result (any order) and the
/// oracle's sorted set, or nullopt when they are equal as sets.
std::optional<std::string> compare_radius(std::span<const std::uint32_t> got,
                                          std::span<const std::uint32_t> expected);

/// kNN equivalence: distance lists agree within `rel_tol`; every returned
/// index really is at its reported distance; indices may differ from the
/// oracle's only among candidates tied at the k-th distance.
std::optional<std::string> compare_knn(std::span<const Point> points, const Point& center,
                                       std::span<const std::uint32_t> got_indices,
                                       std::span<const float> got_distances,
                                       std::span<const Neighbor> expected,
                                       double rel_tol = 1e-6);

}  // namespace lbvh::oracle
