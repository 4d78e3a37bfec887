#include "lbvh/geometry.hpp"

#include <stdexcept>
#include <vector>

namespace lbvh {

Point Point::checked(float x, float y, float z) {
  Point p{x, y, z};
  if (!is_finite(p)) throw std::invalid_argument("point coordinates must be finite");
  return p;
}

bool is_valid(const Box& b) {
  return is_finite(b.min) && is_finite(b.max) && b.min.x <= b.max.x &&
         b.min.y <= b.max.y && b.min.z <= b.max.z;
}

Box Box::checked(const Point& min, const Point& max) {
  Box b{min, max};
  if (!is_finite(min) || !is_finite(max))
    throw std::invalid_argument("box corners must be finite");
  if (!is_valid(b)) throw std::invalid_argument("box min must not exceed max");
  return b;
}

Box scene_bounds(std::span<const Box> boxes, Execution exec) {
  if (boxes.empty()) throw std::invalid_argument("empty scene");

  if (exec == Execution::serial || boxes.size() < 4096) {
    Box acc = boxes.front();
    for (const Box& b : boxes.subspan(1)) acc = expand(acc, b);
    return acc;
  }

  // min/max are exact, so the association order of the partials does not
  // change the result.
  std::vector<Box> partial(static_cast<std::size_t>(omp_get_max_threads()), boxes.front());
  const auto n = static_cast<std::ptrdiff_t>(boxes.size());
#pragma omp parallel
  {
    Box acc = boxes.front();
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) acc = expand(acc, boxes[static_cast<std::size_t>(i)]);
    partial[static_cast<std::size_t>(omp_get_thread_num())] = acc;
  }
  Box acc = partial.front();
  for (const Box& b : partial) acc = expand(acc, b);
  return acc;
}

}  // namespace lbvh
