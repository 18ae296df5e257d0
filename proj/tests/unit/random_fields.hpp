#pragma once

#include <random>

#include "abe/field.hpp"

namespace abe::testing {

inline ComplexField random_field(const GridSpec& grid, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  ComplexField f(grid);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = {n(rng), n(rng)};
  return f;
}

inline GridSpec small_grid(std::size_t n1 = 32, std::size_t n2 = 64) { return GridSpec{8.0, 16.0, n1, n2, 0.0}; }

}  // namespace abe::testing
