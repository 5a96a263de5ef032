#include "rigel/geometry.hpp"

#include <cmath>

namespace rigel {

std::string_view to_string(Model model) noexcept {
  switch (model) {
    case Model::Hyperboloid:
      return "hyperboloid";
    case Model::Euclidean:
      return "euclidean";
  }
  return "unknown";
}

Space Space::hyperboloid(double curvature, int dimension) {
  Space s{Model::Hyperboloid, curvature, dimension};
  s.validate();
  return s;
}

Space Space::euclidean(int dimension) {
  Space s{Model::Euclidean, 0.0, dimension};
  s.validate();
  return s;
}

Space Space::from_curvature(double curvature, int dimension) {
  if (curvature == 0.0) return euclidean(dimension);
  return hyperboloid(curvature, dimension);
}

void Space::validate() const {
  if (dimension < 2) {
    throw std::invalid_argument("space dimension must be >= 2, got " + std::to_string(dimension));
  }
  if (model == Model::Hyperboloid && !(curvature < 0.0 && std::isfinite(curvature))) {
    throw std::invalid_argument(
        "hyperboloid curvature must be finite and < 0 (use the euclidean model for c = 0)");
  }
}

}  // namespace rigel
