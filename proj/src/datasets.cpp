#include "lbvh/datasets.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lbvh::datasets {

namespace {

constexpr double kMinProjectionNorm = 1e-6;

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double in(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

Point to_point(double x, double y, double z) {
  return {static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)};
}

void require_count(std::size_t count) {
  if (count < 1) throw std::invalid_argument("point count must be at least 1");
}

}  // namespace

std::pair<Shape, Variant> parse_shape(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("expected shape:variant, got '" + std::string(text) + "'");
  const std::string_view shape = text.substr(0, colon);
  const std::string_view variant = text.substr(colon + 1);

  Shape s{};
  if (shape == "cube") {
    s = Shape::cube;
  } else if (shape == "sphere") {
    s = Shape::sphere;
  } else {
    throw std::invalid_argument("unknown shape '" + std::string(shape) + "'");
  }
  Variant v{};
  if (variant == "filled") {
    v = Variant::filled;
  } else if (variant == "hollow") {
    v = Variant::hollow;
  } else {
    throw std::invalid_argument("unknown variant '" + std::string(variant) + "'");
  }
  return {s, v};
}

std::string to_string(Shape shape, Variant variant) {
  return std::string(shape == Shape::cube ? "cube" : "sphere") + ":" +
         (variant == Variant::filled ? "filled" : "hollow");
}

double half_extent(std::size_t count) { return std::cbrt(static_cast<double>(count)); }

std::vector<Point> gen_filled_cube(std::size_t count, std::uint64_t seed) {
  require_count(count);
  const double a = half_extent(count);
  Uniform rng(seed);
  std::vector<Point> points(count);
  for (Point& p : points) {
    const double x = rng.in(-a, a);
    const double y = rng.in(-a, a);
    const double z = rng.in(-a, a);
    p = to_point(x, y, z);
  }
  return points;
}

std::vector<Point> gen_hollow_cube(std::size_t count, std::uint64_t seed) {
  require_count(count);
  const double a = half_extent(count);
  Uniform rng(seed);
  std::vector<Point> points(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t face = i % 6;
    const double fixed = face % 2 == 0 ? -a : a;
    const double u = rng.in(-a, a);
    const double v = rng.in(-a, a);
    switch (face / 2) {
      case 0:
        points[i] = to_point(fixed, u, v);
        break;
      case 1:
        points[i] = to_point(u, fixed, v);
        break;
      default:
        points[i] = to_point(u, v, fixed);
        break;
    }
  }
  return points;
}

std::vector<Point> gen_filled_sphere(std::size_t count, std::uint64_t seed, std::size_t* draws) {
  require_count(count);
  const double a = half_extent(count);
  Uniform rng(seed);
  std::vector<Point> points;
  points.reserve(count);
  std::size_t attempts = 0;
  while (points.size() < count) {
    const double x = rng.in(-a, a);
    const double y = rng.in(-a, a);
    const double z = rng.in(-a, a);
    ++attempts;
    // Accept on the rounded coordinates so every stored point is inside.
    const Point p = to_point(x, y, z);
    const double px = p.x, py = p.y, pz = p.z;
    if (px * px + py * py + pz * pz <= a * a) points.push_back(p);
  }
  if (draws) *draws = attempts;
  return points;
}

std::vector<Point> gen_hollow_sphere(std::size_t count, std::uint64_t seed) {
  require_count(count);
  const double a = half_extent(count);
  Uniform rng(seed);
  std::vector<Point> points;
  points.reserve(count);
  while (points.size() < count) {
    const double x = rng.in(-1.0, 1.0);
    const double y = rng.in(-1.0, 1.0);
    const double z = rng.in(-1.0, 1.0);
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (norm < kMinProjectionNorm) continue;
    const double scale = a / norm;
    points.push_back(to_point(x * scale, y * scale, z * scale));
  }
  return points;
}

std::vector<Point> generate(const CloudSpec& spec) {
  if (spec.shape == Shape::cube) {
    return spec.variant == Variant::filled ? gen_filled_cube(spec.count, spec.seed)
                                           : gen_hollow_cube(spec.count, spec.seed);
  }
  return spec.variant == Variant::filled ? gen_filled_sphere(spec.count, spec.seed)
                                         : gen_hollow_sphere(spec.count, spec.seed);
}

double default_radius(std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  return std::cbrt(6.0 * k / std::numbers::pi);
}

std::vector<Box> to_boxes(const std::vector<Point>& points) {
  std::vector<Box> boxes(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) boxes[i] = Box::from_point(points[i]);
  return boxes;
}

}  // namespace lbvh::datasets
