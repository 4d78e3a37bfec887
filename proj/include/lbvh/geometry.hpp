#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "lbvh/execution.hpp"

namespace lbvh {

struct Point {
  float x = 0.f;
  float y = 0.f;
  float z = 0.f;

  // Validating factory for API boundaries; throws std::invalid_argument on
  // NaN or infinite coordinates.
  static Point checked(float x, float y, float z);

  constexpr float operator[](int axis) const {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }

  friend constexpr bool operator==(const Point&, const Point&) = default;
};

inline bool is_finite(const Point& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Axis-aligned box given by two opposite corners, min <= max on every axis.
/// Zero-extent axes are allowed, so a single point is a valid box.
struct Box {
  Point min;
  Point max;

  static Box checked(const Point& min, const Point& max);

  static constexpr Box from_point(const Point& p) { return Box{p, p}; }

  friend constexpr bool operator==(const Box&, const Box&) = default;
};

bool is_valid(const Box& b);

constexpr Box expand(const Box& acc, const Box& other) {
  return Box{{std::min(acc.min.x, other.min.x), std::min(acc.min.y, other.min.y),
              std::min(acc.min.z, other.min.z)},
             {std::max(acc.max.x, other.max.x), std::max(acc.max.y, other.max.y),
              std::max(acc.max.z, other.max.z)}};
}

constexpr bool contains(const Box& outer, const Box& inner) {
  return outer.min.x <= inner.min.x && outer.min.y <= inner.min.y &&
         outer.min.z <= inner.min.z && inner.max.x <= outer.max.x &&
         inner.max.y <= outer.max.y && inner.max.z <= outer.max.z;
}

constexpr bool contains(const Box& b, const Point& p) {
  return b.min.x <= p.x && p.x <= b.max.x && b.min.y <= p.y && p.y <= b.max.y &&
         b.min.z <= p.z && p.z <= b.max.z;
}

constexpr Point centroid(const Box& b) {
  return {0.5f * (b.min.x + b.max.x), 0.5f * (b.min.y + b.max.y),
          0.5f * (b.min.z + b.max.z)};
}

/// Squared distance from p to the closest point of b; zero when p is inside
/// or on the boundary.
constexpr float distance_sq(const Point& p, const Box& b) {
  float sum = 0.f;
  for (int d = 0; d < 3; ++d) {
    const float v = p[d];
    float gap = 0.f;
    if (v < b.min[d]) {
      gap = b.min[d] - v;
    } else if (v > b.max[d]) {
      gap = v - b.max[d];
    }
    sum += gap * gap;
  }
  return sum;
}

/// Smallest box containing every input box. Throws std::invalid_argument
/// ("empty scene") on an empty sequence.
Box scene_bounds(std::span<const Box> boxes, Execution exec = Execution::parallel);

}  // namespace lbvh
