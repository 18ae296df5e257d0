#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abe/field.hpp"

namespace abe {

/// Crank-Nicolson (Cayley) factor for one axis of the kinetic operator:
///
///   (1 + 2a) x_j - a (x_{j-1} + x_{j+1}) = (1 - 2a) y_j + a (y_{j-1} + y_{j+1})
///
/// with a = i beta, beta = dt / (8 m dx^2), i.e. a half-step of p^2 / 2m with
/// the three-point Laplacian. Lines are periodic; positions flagged as obstacle are
/// held at zero and split the line into independent Dirichlet segments.
///
/// The matrix is strictly diagonally dominant for purely imaginary a, so the
/// Thomas recursion runs without pivoting. Coefficients are constant, which
/// lets every segment reuse one prefix of precomputed elimination factors.
class CayleyLineSolver {
 public:
  CayleyLineSolver() = default;
  CayleyLineSolver(std::size_t length, double beta);

  std::size_t length() const { return n_; }
  double beta() const { return beta_; }

  /// Advances one line in place. `obstacle` is empty or has length() entries.
  void advance(std::span<Complex> line, std::span<const std::uint8_t> obstacle);

  /// Advances `columns` independent lines stored as the columns of a
  /// length() x columns row-major array. Column c is split by `obstacle` iff
  /// blocked[c] != 0; otherwise it is periodic. Working across columns keeps
  /// the elimination recurrences independent in the inner loop.
  void advance_columns(Complex* data, std::size_t columns, std::span<const std::uint8_t> blocked,
                       std::span<const std::uint8_t> obstacle);

  /// Solves the implicit side for a Dirichlet segment (zero beyond both ends).
  void solve_segment(std::span<Complex> rhs) const;

  /// Solves the implicit side for the full periodic line.
  void solve_cyclic(std::span<Complex> rhs) const;

  /// rhs = (1 - 2a) y_j + a (y_{j-1} + y_{j+1}), periodic neighbours.
  void explicit_side(std::span<const Complex> y, std::span<Complex> rhs) const;

 private:
  std::size_t n_ = 0;
  double beta_ = 0.0;
  Complex a_{};
  Complex diag_{};
  Complex off_{};
  // Dirichlet elimination factors, valid for any segment prefix.
  std::vector<Complex> seg_cstar_, seg_inv_;
  // Sherman-Morrison data for the periodic system.
  std::vector<Complex> cyc_cstar_, cyc_inv_, cyc_z_;
  Complex gamma_{};
  Complex cyc_denominator_{};
  std::vector<Complex> scratch_, fact_;
  std::vector<std::size_t> order_;
};

}  // namespace abe
