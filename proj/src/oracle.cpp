#include "lbvh/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace lbvh::oracle {

namespace {

float squared_gap(const Point& a, const Point& b) {
  const float dx = a.x - b.x;
  const float dy = a.y - b.y;
  const float dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

bool close(double got, double want, double rel_tol) {
  return std::abs(got - want) <= rel_tol * std::max(std::abs(got), std::abs(want));
}

}  // namespace

std::vector<std::uint32_t> brute_radius(std::span<const Point> points, const SpatialQuery& query) {
  const float radius_sq = query.radius * query.radius;
  std::vector<std::uint32_t> hits;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (squared_gap(points[i], query.center) <= radius_sq) hits.push_back(static_cast<std::uint32_t>(i));
  }
  return hits;
}

std::vector<Neighbor> brute_knn(std::span<const Point> points, const KnnQuery& query) {
  struct Entry {
    float distance_sq;
    std::uint32_t index;
  };
  std::vector<Entry> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    all[i] = {squared_gap(points[i], query.center), static_cast<std::uint32_t>(i)};
  }
  const std::size_t k = std::min<std::size_t>(query.k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const Entry& a, const Entry& b) {
                      return a.distance_sq != b.distance_sq ? a.distance_sq < b.distance_sq
                                                            : a.index < b.index;
                    });
  std::vector<Neighbor> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = {all[i].index, std::sqrt(all[i].distance_sq)};
  return out;
}

std::optional<std::string> compare_radius(std::span<const std::uint32_t> got,
                                          std::span<const std::uint32_t> expected) {
  std::vector<std::uint32_t> sorted(got.begin(), got.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return "duplicate hit reported";
  }
  if (std::equal(sorted.begin(), sorted.end(), expected.begin(), expected.end())) {
    return std::nullopt;
  }
  std::vector<std::uint32_t> missing, extra;
  std::set_difference(expected.begin(), expected.end(), sorted.begin(), sorted.end(),
                      std::back_inserter(missing));
  std::set_difference(sorted.begin(), sorted.end(), expected.begin(), expected.end(),
                      std::back_inserter(extra));
  std::ostringstream msg;
  msg << "got " << sorted.size() << " hits, expected " << expected.size();
  if (!missing.empty()) msg << "; first missing " << missing.front();
  if (!extra.empty()) msg << "; first extra " << extra.front();
  return msg.str();
}

std::optional<std::string> compare_knn(std::span<const Point> points, const Point& center,
                                       std::span<const std::uint32_t> got_indices,
                                       std::span<const float> got_distances,
                                       std::span<const Neighbor> expected, double rel_tol) {
  std::ostringstream msg;
  if (got_indices.size() != expected.size() || got_distances.size() != expected.size()) {
    msg << "got " << got_indices.size() << " neighbors, expected " << expected.size();
    return msg.str();
  }
  if (expected.empty()) return std::nullopt;

  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!close(got_distances[i], expected[i].distance, rel_tol)) {
      msg << "distance " << i << ": got " << got_distances[i] << ", expected "
          << expected[i].distance;
      return msg.str();
    }
  }

  std::unordered_set<std::uint32_t> returned;
  for (std::size_t i = 0; i < got_indices.size(); ++i) {
    const std::uint32_t idx = got_indices[i];
    if (idx >= points.size()) {
      msg << "index " << idx << " out of range";
      return msg.str();
    }
    if (!returned.insert(idx).second) {
      msg << "index " << idx << " reported twice";
      return msg.str();
    }
    const double actual = std::sqrt(static_cast<double>(squared_gap(points[idx], center)));
    if (!close(actual, got_distances[i], rel_tol) &&
        std::abs(actual - got_distances[i]) > 1e-6) {
      msg << "index " << idx << " reported at " << got_distances[i] << " but lies at " << actual;
      return msg.str();
    }
  }

  // Everything strictly closer than the k-th distance must be present; only
  // members of the tie at the boundary may be swapped.
  const double boundary = expected.back().distance;
  for (const Neighbor& n : expected) {
    if (n.distance < boundary && !close(n.distance, boundary, rel_tol) &&
        !returned.contains(n.index)) {
      msg << "missing neighbor " << n.index << " at distance " << n.distance;
      return msg.str();
    }
  }
  return std::nullopt;
}

}  // namespace lbvh::oracle
