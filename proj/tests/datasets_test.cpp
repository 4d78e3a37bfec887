#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lbvh/datasets.hpp"
#include "lbvh/traversal.hpp"

using namespace lbvh;
using namespace lbvh::datasets;

namespace {

double norm(const Point& p) {
  const double x = p.x, y = p.y, z = p.z;
  return std::sqrt(x * x + y * y + z * z);
}

float max_abs(const Point& p) {
  return std::max({std::abs(p.x), std::abs(p.y), std::abs(p.z)});
}

double mean_count(const std::vector<Point>& source, const std::vector<Point>& target, double r) {
  const Bvh tree(to_boxes(source));
  std::vector<SpatialQuery> queries;
  for (const Point& p : target) queries.push_back({p, static_cast<float>(r)});
  const ResultSet rs = query_spatial_2p(tree, queries);
  return static_cast<double>(rs.indices.size()) / static_cast<double>(target.size());
}

}  // namespace

TEST(FilledCube, StaysInsideOmega) {
  const auto points = gen_filled_cube(8, 1);
  ASSERT_EQ(points.size(), 8u);
  for (const Point& p : points) EXPECT_LE(max_abs(p), 2.f);
}

TEST(FilledCube, SameSeedSameCloud) {
  EXPECT_EQ(gen_filled_cube(500, 42), gen_filled_cube(500, 42));
  EXPECT_NE(gen_filled_cube(500, 42), gen_filled_cube(500, 43));
}

TEST(FilledCube, CoordinateMeansNearZero) {
  const std::size_t p = 100000;
  const auto points = gen_filled_cube(p, 7);
  const double a = half_extent(p);
  double sx = 0, sy = 0, sz = 0;
  for (const Point& q : points) {
    sx += q.x;
    sy += q.y;
    sz += q.z;
  }
  for (const double s : {sx, sy, sz}) EXPECT_LE(std::abs(s / p), 0.05 * a);
}

TEST(HollowCube, PointsCycleThroughFaces) {
  for (const std::size_t p : {6u, 12u, 1001u}) {
    const auto points = gen_hollow_cube(p, 3);
    const auto a = static_cast<float>(half_extent(p));
    for (std::size_t i = 0; i < p; ++i) {
      const Point& q = points[i];
      const std::size_t face = i % 6;
      const float fixed = q[static_cast<int>(face / 2)];
      EXPECT_EQ(fixed, face % 2 == 0 ? -a : a) << "point " << i;
      EXPECT_EQ(max_abs(q), a);
    }
  }
}

TEST(HollowCube, OneCoordinateOnTheFaceForSixPoints) {
  const auto points = gen_hollow_cube(6, 9);
  const auto a = static_cast<float>(half_extent(6));
  for (const Point& q : points) {
    int on_face = 0;
    for (int d = 0; d < 3; ++d) on_face += std::abs(q[d]) == a;
    EXPECT_EQ(on_face, 1);
  }
}

TEST(FilledSphere, InsideBallAndAcceptanceRate) {
  const std::size_t p = 100000;
  std::size_t draws = 0;
  const auto points = gen_filled_sphere(p, 11, &draws);
  const double a = half_extent(p);
  for (const Point& q : points) ASSERT_LE(norm(q), a);
  EXPECT_NEAR(static_cast<double>(p) / static_cast<double>(draws), std::numbers::pi / 6, 0.02);
  EXPECT_EQ(gen_filled_sphere(300, 5), gen_filled_sphere(300, 5));
}

TEST(HollowSphere, OnSphereAndNeverAtOrigin) {
  const std::size_t p = 20000;
  const auto points = gen_hollow_sphere(p, 13);
  const double a = half_extent(p);
  for (const Point& q : points) {
    ASSERT_NEAR(norm(q), a, 1e-4 * a);
    ASSERT_FALSE(q == (Point{0, 0, 0}));
  }
  EXPECT_EQ(gen_hollow_sphere(300, 5), gen_hollow_sphere(300, 5));
}

TEST(Generate, DispatchesOnShapeAndVariant) {
  EXPECT_EQ(generate({Shape::cube, Variant::hollow, 60, 4}), gen_hollow_cube(60, 4));
  EXPECT_EQ(generate({Shape::sphere, Variant::filled, 60, 4}), gen_filled_sphere(60, 4));
  EXPECT_THROW(generate({Shape::cube, Variant::filled, 0, 4}), std::invalid_argument);
}

TEST(ParseShape, RoundTripsAndRejectsJunk) {
  for (const Shape s : {Shape::cube, Shape::sphere}) {
    for (const Variant v : {Variant::filled, Variant::hollow}) {
      EXPECT_EQ(parse_shape(to_string(s, v)), std::make_pair(s, v));
    }
  }
  EXPECT_THROW(parse_shape("cube"), std::invalid_argument);
  EXPECT_THROW(parse_shape("torus:filled"), std::invalid_argument);
  EXPECT_THROW(parse_shape("cube:empty"), std::invalid_argument);
}

TEST(DefaultRadius, ClosedForm) {
  EXPECT_NEAR(default_radius(10), 2.67301, 1e-5);
  EXPECT_NEAR(default_radius(1), 1.24070, 1e-5);
  EXPECT_NEAR(default_radius(20) / default_radius(10), std::cbrt(2.0), 1e-12);
  EXPECT_THROW(default_radius(0), std::invalid_argument);
}

TEST(DefaultRadius, GivesAboutTenNeighborsInFilledCube) {
  const auto points = gen_filled_cube(100000, 21);
  // Self-queries count the point itself once.
  const double mean = mean_count(points, points, default_radius(10)) - 1.0;
  EXPECT_GE(mean, 9.0);
  EXPECT_LE(mean, 11.0);
}

TEST(HollowCase, SparserThanFilledCase) {
  const std::size_t p = 20000;
  const double r = default_radius(10);
  const double filled = mean_count(gen_filled_cube(p, 1), gen_filled_sphere(p, 2), r);
  const double hollow = mean_count(gen_hollow_cube(p, 1), gen_hollow_sphere(p, 2), r);
  EXPECT_LT(hollow, filled);
}
