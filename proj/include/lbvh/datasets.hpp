#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lbvh/geometry.hpp"

namespace lbvh::datasets {

// Synthetic clouds of p points in [-a, a]^3 with a = p^(1/3), so the mean
// density of the filled cube is 1/8 regardless of p.
//
// Random numbers come from std::mt19937_64, whose output sequence is fixed
// by the standard; the mapping to floats is done here rather than through
// std::uniform_real_distribution so that clouds are identical on every
// platform.

enum class Shape { cube, sphere };
enum class Variant { filled, hollow };

struct CloudSpec {
  Shape shape = Shape::cube;
  Variant variant = Variant::filled;
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

/// Parses "cube:filled", "sphere:hollow", ... into shape and variant.
/// Throws std::invalid_argument on anything else.
std::pair<Shape, Variant> parse_shape(std::string_view text);
std::string to_string(Shape shape, Variant variant);

double half_extent(std::size_t count);

std::vector<Point> gen_filled_cube(std::size_t count, std::uint64_t seed);

/// Point i lies on face i mod 6, faces ordered -x, +x, -y, +y, -z, +z.
std::vector<Point> gen_hollow_cube(std::size_t count, std::uint64_t seed);

/// Rejection sampling from the cube. `draws`, when given, receives the
/// number of candidate points drawn.
std::vector<Point> gen_filled_sphere(std::size_t count, std::uint64_t seed,
                                     std::size_t* draws = nullptr);

/// Uniform points of [-1,1]^3 projected radially onto the sphere of radius a.
/// Not uniform on the sphere: directions toward the cube corners are
/// over-represented.
std::vector<Point> gen_hollow_sphere(std::size_t count, std::uint64_t seed);

std::vector<Point> generate(const CloudSpec& spec);

/// Radius with k expected neighbors at the filled-cube density: (6k/pi)^(1/3).
double default_radius(std::uint32_t k);

std::vector<Box> to_boxes(const std::vector<Point>& points);

}  // namespace lbvh::datasets
