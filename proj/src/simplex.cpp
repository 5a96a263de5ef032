#include "rigel/simplex.hpp"

namespace rigel {

void OptimizerConfig::validate() const {
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 1 (0 = default)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be > 0");
  if (!(reflection > 0.0)) throw std::invalid_argument("reflection coefficient must be > 0");
  if (!(expansion > 1.0)) throw std::invalid_argument("expansion coefficient must be > 1");
  if (!(contraction > 0.0 && contraction < 1.0))
    throw std::invalid_argument("contraction coefficient must be in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0))
    throw std::invalid_argument("shrink coefficient must be in (0, 1)");
}

}  // namespace rigel
