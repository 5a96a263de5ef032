#include "rigel/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rigel;

namespace {

// Direct evaluation of the arccosh form in long double.
long double oracle_hyperboloid(const Point& x, const Point& y, long double c) {
  long double xx = 0, yy = 0, xy = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xx += (long double)x[i] * x[i];
    yy += (long double)y[i] * y[i];
    xy += (long double)x[i] * y[i];
  }
  long double arg = std::sqrt((1 + xx) * (1 + yy)) - xy;
  if (arg < 1) arg = 1;
  return std::acosh(arg) * std::fabs(c);
}

Point random_point(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Point p(n);
  for (int i = 0; i < n; ++i) p[i] = g(rng);
  return p;
}

}  // namespace

TEST_CASE("hyperboloid examples") {
  const Space s = Space::hyperboloid(-1, 10);
  Point zero = Point::Zero(10);
  CHECK(distance(s, zero, zero) == 0.0);

  Point y = Point::Zero(10);
  y.head(3).setOnes();  // sum of squares 3
  CHECK(distance(s, zero, y) == doctest::Approx(1.316958).epsilon(1e-6));
  CHECK(distance(s, zero, y) == doctest::Approx(std::acosh(2.0)).epsilon(1e-14));

  const Space s2 = Space::hyperboloid(-2, 10);
  CHECK(distance(s2, zero, y) == 2.0 * distance(s, zero, y));
}

TEST_CASE("euclidean example") {
  const Space s = Space::euclidean(5);
  Point a = Point::Zero(5), b = Point::Zero(5);
  b[0] = 3;
  b[1] = 4;
  CHECK(distance(s, a, b) == doctest::Approx(5.0));
}

TEST_CASE("space validation") {
  CHECK_THROWS_AS(Space::hyperboloid(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(Space::hyperboloid(1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(Space::hyperboloid(-1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Space::euclidean(1), std::invalid_argument);
  CHECK(Space::from_curvature(0.0, 4).model == Model::Euclidean);
  CHECK(Space::from_curvature(-3.0, 4).model == Model::Hyperboloid);
}

TEST_CASE("dimension mismatch") {
  const Space s = Space::hyperboloid(-1, 3);
  CHECK_THROWS_AS(distance(s, Point::Zero(3), Point::Zero(4)), std::invalid_argument);
  CHECK_THROWS_AS(distance(s, Point::Zero(4), Point::Zero(4)), std::invalid_argument);
}

TEST_CASE("hyperboloid agrees with direct evaluation") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const double scale = t % 2 ? 0.05 : 5.0;
    const Point x = random_point(rng, 10, scale), y = random_point(rng, 10, scale);
    const double got = hyperboloid_distance(x, y, -1.0);
    const long double want = oracle_hyperboloid(x, y, -1.0L);
    CHECK(std::fabs(got - (double)want) <= 1e-9 * std::max(1.0, (double)want));
  }
}

TEST_CASE("near-coincident points stay finite and tiny") {
  Point x = Point::Constant(10, 3.0);
  Point y = x;
  y[0] += 1e-12;
  const double d = hyperboloid_distance(x, y, -1.0);
  CHECK(std::isfinite(d));
  CHECK(d >= 0.0);
  CHECK(d < 1e-9);
}

TEST_CASE("metric properties on random points") {
  std::mt19937_64 rng(5);
  for (const Space& s : {Space::hyperboloid(-1, 10), Space::hyperboloid(-0.3, 4), Space::euclidean(10)}) {
    for (int t = 0; t < 3000; ++t) {
      const Point x = random_point(rng, s.dimension, 2.0);
      const Point y = random_point(rng, s.dimension, 2.0);
      const Point z = random_point(rng, s.dimension, 2.0);
      const double xy = distance(s, x, y), yx = distance(s, y, x);
      CHECK(xy == yx);
      CHECK(xy >= 0.0);
      CHECK(distance(s, x, x) <= 1e-12);
      CHECK(distance(s, x, z) <= xy + distance(s, y, z) + 1e-9);
    }
  }
}

TEST_CASE("curvature is a linear factor") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 1000; ++t) {
    const Point x = random_point(rng, 10, 1.0), y = random_point(rng, 10, 1.0);
    const double unit = hyperboloid_distance(x, y, -1.0);
    for (double c : {-0.5, -2.0, -30.0})
      CHECK(std::fabs(hyperboloid_distance(x, y, c) - std::fabs(c) * unit) <= 1e-12 * std::max(1.0, std::fabs(c) * unit));
  }
}

TEST_CASE("float scalar instantiation") {
  PointT<float> a = PointT<float>::Zero(3), b = PointT<float>::Zero(3);
  b[0] = 1.0f;
  CHECK(euclidean_distance(a, b) == doctest::Approx(1.0f));
  CHECK(hyperboloid_distance(a, b, -1.0f) == doctest::Approx(std::asinh(1.0)).epsilon(1e-5));
}
