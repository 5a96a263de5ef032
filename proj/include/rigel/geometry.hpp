// Coordinate spaces and distances.
//
// The hyperboloid distance between two n-dimensional points x, y with
// curvature c < 0 is
//
//   arccosh( sqrt((1 + |x|^2)(1 + |y|^2)) - <x, y> ) * |c|
//
// Evaluated naively the arccosh argument suffers cancellation for nearby
// points, so the implementation computes t = arg - 1 from the difference
// vector d = y - x:
//
//   t = ( |d|^2 (1 + |x|^2) - <x, d>^2 ) / ( A + 1 + <x, y> ),  A = sqrt(...)
//
// and returns log1p(t + sqrt(t (t + 2))). Both forms are algebraically equal;
// this one is exactly zero for x == y and keeps full relative precision near it.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rigel {

enum class Model : std::uint8_t { Hyperboloid = 0, Euclidean = 1 };

std::string_view to_string(Model model) noexcept;

/// Geometry model, curvature and dimension of a coordinate space.
struct Space {
  Model model = Model::Hyperboloid;
  double curvature = -1.0;  // ignored for Euclidean
  int dimension = 10;

  /// Throws std::invalid_argument on c >= 0 or n < 2.
  static Space hyperboloid(double curvature, int dimension);
  static Space euclidean(int dimension);

  /// Hyperboloid for c < 0, Euclidean for c == 0.
  static Space from_curvature(double curvature, int dimension);

  void validate() const;

  friend bool operator==(const Space&, const Space&) = default;
};

using Point = Eigen::VectorXd;

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar unit_hyperboloid_ordered(const Eigen::MatrixBase<DerivedX>& x,
                                                   const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  using std::sqrt;
  const Scalar xx = x.squaredNorm();
  const Scalar yy = y.squaredNorm();
  const Scalar xy = x.dot(y);
  const Scalar dd = (y - x).squaredNorm();
  const Scalar xd = x.dot(y - x);
  const Scalar a = sqrt((Scalar(1) + xx) * (Scalar(1) + yy));
  Scalar num = dd * (Scalar(1) + xx) - xd * xd;
  if (num < Scalar(0)) num = Scalar(0);  // rounding; true value is >= |d|^2
  const Scalar t = num / (a + Scalar(1) + xy);
  return std::log1p(t + sqrt(t * (t + Scalar(2))));
}

template <typename DerivedX, typename DerivedY>
bool lexicographically_less(const Eigen::MatrixBase<DerivedX>& x,
                            const Eigen::MatrixBase<DerivedY>& y) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x.coeff(i) < y.coeff(i)) return true;
    if (y.coeff(i) < x.coeff(i)) return false;
  }
  return false;
}

}  // namespace detail

/// Hyperboloid distance at curvature -1. Operands are put in a canonical order
/// so the rounded result is exactly symmetric.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar unit_hyperboloid_distance(const Eigen::MatrixBase<DerivedX>& x,
                                                    const Eigen::MatrixBase<DerivedY>& y) {
  if (detail::lexicographically_less(y, x)) return detail::unit_hyperboloid_ordered(y, x);
  return detail::unit_hyperboloid_ordered(x, y);
}

template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar hyperboloid_distance(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y,
                                               typename DerivedX::Scalar curvature) {
  using std::abs;
  return unit_hyperboloid_distance(x, y) * abs(curvature);
}

template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar euclidean_distance(const Eigen::MatrixBase<DerivedX>& x,
                                             const Eigen::MatrixBase<DerivedY>& y) {
  return (x - y).norm();
}

/// As distance() without the dimension check; used in inner loops.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar distance_unchecked(const Space& space,
                                             const Eigen::MatrixBase<DerivedX>& x,
                                             const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (space.model == Model::Euclidean) return euclidean_distance(x, y);
  return hyperboloid_distance(x, y, Scalar(space.curvature));
}

/// Distance in `space`. Throws std::invalid_argument if either point does not
/// have `space.dimension` components.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar distance(const Space& space, const Eigen::MatrixBase<DerivedX>& x,
                                   const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != space.dimension || y.size() != space.dimension) {
    throw std::invalid_argument("distance: point dimension " + std::to_string(x.size()) + "/" +
                                std::to_string(y.size()) + " does not match space dimension " +
                                std::to_string(space.dimension));
  }
  return distance_unchecked(space, x, y);
}

}  // namespace rigel
