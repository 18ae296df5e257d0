#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace abe {

using Complex = std::complex<double>;

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Discretization of the periodic box [-X1/2, X1/2] x [-X2/2, X2/2].
///
/// Nodes sit at cell centers, x = -X/2 + (i + 1/2) dx, so the box is symmetric
/// under x -> -x node by node. Storage is row-major with x2 fastest.
struct GridSpec {
  double extent1 = 16.0;
  double extent2 = 32.0;
  std::size_t points1 = 256;
  std::size_t points2 = 512;
  /// Width of the absorbing layer at each of the +-x2 ends.
  double absorber_width = 0.0;

  double dx1() const { return extent1 / static_cast<double>(points1); }
  double dx2() const { return extent2 / static_cast<double>(points2); }
  double cell_area() const { return dx1() * dx2(); }
  std::size_t size() const { return points1 * points2; }

  double x1(std::size_t i) const { return -0.5 * extent1 + (static_cast<double>(i) + 0.5) * dx1(); }
  double x2(std::size_t j) const { return -0.5 * extent2 + (static_cast<double>(j) + 0.5) * dx2(); }
  Point node(std::size_t i, std::size_t j) const { return {x1(i), x2(j)}; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * points2 + j; }

  /// Same box with twice the points per axis.
  GridSpec refined() const;

  /// Throws ConfigError unless extents are positive and point counts are powers of two.
  void validate() const;
};

bool operator==(const GridSpec& a, const GridSpec& b);

/// Complex samples of a wave function on a GridSpec.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(const GridSpec& grid, Complex fill = {0.0, 0.0});

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[grid_.index(i, j)]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[grid_.index(i, j)]; }
  Complex& operator[](std::size_t k) { return data_[k]; }
  const Complex& operator[](std::size_t k) const { return data_[k]; }

  std::span<Complex> values() { return data_; }
  std::span<const Complex> values() const { return data_; }
  Complex* data() { return data_.data(); }
  const Complex* data() const { return data_.data(); }

  ComplexField& operator*=(Complex c);
  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);

 private:
  GridSpec grid_{};
  std::vector<Complex> data_;
};

ComplexField operator*(Complex c, ComplexField f);
ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);

/// <a, b> = sum conj(a) b dA over the whole grid.
Complex inner_product(const ComplexField& a, const ComplexField& b);

/// Plain L2 norm over every node of the grid.
double l2_norm(const ComplexField& f);

double max_abs_difference(const ComplexField& a, const ComplexField& b);

}  // namespace abe
