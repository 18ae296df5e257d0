#include "abe/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "abe/error.hpp"

namespace abe {

GridSpec GridSpec::refined() const {
  GridSpec g = *this;
  g.points1 *= 2;
  g.points2 *= 2;
  return g;
}

void GridSpec::validate() const {
  std::ostringstream msg;
  if (!(extent1 > 0.0) || !(extent2 > 0.0)) {
    msg << "grid extents must be positive (X1=" << extent1 << ", X2=" << extent2 << ")";
    throw ConfigError(msg.str());
  }
  if (!std::has_single_bit(points1) || !std::has_single_bit(points2) || points1 < 4 || points2 < 4) {
    msg << "grid point counts must be powers of two >= 4 (N1=" << points1 << ", N2=" << points2 << ")";
    throw ConfigError(msg.str());
  }
  if (absorber_width < 0.0 || absorber_width >= 0.5 * extent2) {
    msg << "absorber_width must lie in [0, X2/2) (got " << absorber_width << ")";
    throw ConfigError(msg.str());
  }
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.extent1 == b.extent1 && a.extent2 == b.extent2 && a.points1 == b.points1 &&
         a.points2 == b.points2 && a.absorber_width == b.absorber_width;
}

ComplexField::ComplexField(const GridSpec& grid, Complex fill) : grid_(grid), data_(grid.size(), fill) {}

ComplexField& ComplexField::operator*=(Complex c) {
  for (auto& z : data_) z *= c;
  return *this;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  std::transform(data_.begin(), data_.end(), other.data_.begin(), data_.begin(), std::plus<>{});
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  std::transform(data_.begin(), data_.end(), other.data_.begin(), data_.begin(), std::minus<>{});
  return *this;
}

ComplexField operator*(Complex c, ComplexField f) {
  f *= c;
  return f;
}

ComplexField operator+(ComplexField a, const ComplexField& b) {
  a += b;
  return a;
}

ComplexField operator-(ComplexField a, const ComplexField& b) {
  a -= b;
  return a;
}

Complex inner_product(const ComplexField& a, const ComplexField& b) {
  Complex sum{0.0, 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::conj(a[k]) * b[k];
  return sum * a.grid().cell_area();
}

double l2_norm(const ComplexField& f) {
  double sum = 0.0;
  for (const auto& z : f.values()) sum += std::norm(z);
  return std::sqrt(sum * f.grid().cell_area());
}

double max_abs_difference(const ComplexField& a, const ComplexField& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace abe
