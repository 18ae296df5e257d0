#include "abe/tridiagonal.hpp"

#include <algorithm>

#include "abe/error.hpp"

namespace abe {
namespace {

inline Complex times_i(double beta, Complex u) { return {-beta * u.imag(), beta * u.real()}; }

// Thomas factors for a tridiagonal matrix with constant off-diagonal `off`
// and diagonal `diag` except the first/last entries.
void factor(std::size_t n, Complex first, Complex diag, Complex last, Complex off, std::vector<Complex>& cstar,
            std::vector<Complex>& inv) {
  cstar.resize(n);
  inv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex b = (i == 0) ? first : (i + 1 == n ? last : diag);
    if (i > 0) b -= off * cstar[i - 1];
    if (b == Complex{0.0, 0.0}) throw SolverError("tridiagonal: zero pivot");
    inv[i] = 1.0 / b;
    cstar[i] = off * inv[i];
  }
}

void thomas(std::span<Complex> d, Complex off, const std::vector<Complex>& cstar, const std::vector<Complex>& inv) {
  const std::size_t n = d.size();
  if (n == 0) return;
  d[0] *= inv[0];
  for (std::size_t i = 1; i < n; ++i) d[i] = (d[i] - off * d[i - 1]) * inv[i];
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= cstar[i] * d[i + 1];
}

}  // namespace

CayleyLineSolver::CayleyLineSolver(std::size_t length, double beta)
    : n_(length), beta_(beta), a_(0.0, beta), diag_(1.0 + 2.0 * a_), off_(-a_) {
  if (n_ < 3) throw SolverError("tridiagonal: periodic lines need at least 3 points");
  factor(n_, diag_, diag_, diag_, off_, seg_cstar_, seg_inv_);

  // Periodic corners equal off_. Cyclic reduction with gamma = -b0.
  gamma_ = -diag_;
  const Complex first = diag_ - gamma_;
  const Complex last = diag_ - off_ * off_ / gamma_;
  factor(n_, first, diag_, last, off_, cyc_cstar_, cyc_inv_);
  cyc_z_.assign(n_, Complex{0.0, 0.0});
  cyc_z_.front() = gamma_;
  cyc_z_.back() = off_;
  thomas(cyc_z_, off_, cyc_cstar_, cyc_inv_);
  cyc_denominator_ = 1.0 + cyc_z_.front() + off_ * cyc_z_.back() / gamma_;
}

void CayleyLineSolver::solve_segment(std::span<Complex> rhs) const {
  if (rhs.size() > n_) throw SolverError("tridiagonal: segment longer than line");
  thomas(rhs, off_, seg_cstar_, seg_inv_);
}

void CayleyLineSolver::solve_cyclic(std::span<Complex> rhs) const {
  thomas(rhs, off_, cyc_cstar_, cyc_inv_);
  const Complex fact = (rhs.front() + off_ * rhs.back() / gamma_) / cyc_denominator_;
  for (std::size_t i = 0; i < n_; ++i) rhs[i] -= fact * cyc_z_[i];
}

void CayleyLineSolver::explicit_side(std::span<const Complex> y, std::span<Complex> rhs) const {
  const std::size_t n = n_;
  rhs[0] = y[0] + times_i(beta_, y[n - 1] + y[1] - 2.0 * y[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = y[i] + times_i(beta_, y[i - 1] + y[i + 1] - 2.0 * y[i]);
  rhs[n - 1] = y[n - 1] + times_i(beta_, y[n - 2] + y[0] - 2.0 * y[n - 1]);
}

void CayleyLineSolver::advance(std::span<Complex> line, std::span<const std::uint8_t> obstacle) {
  const std::uint8_t blocked = obstacle.empty() ? 0 : 1;
  advance_columns(line.data(), 1, std::span<const std::uint8_t>(&blocked, 1), obstacle);
}

void CayleyLineSolver::advance_columns(Complex* y, std::size_t columns, std::span<const std::uint8_t> blocked,
                                       std::span<const std::uint8_t> obstacle) {
  const std::size_t n = n_;
  const std::size_t cols = columns;
  scratch_.resize(n * cols);
  fact_.resize(cols);
  Complex* d = scratch_.data();
  const double beta = beta_;

  // Free positions in walk order: start just after an obstacle position so that
  // no Dirichlet run wraps around the periodic seam.
  const bool has_wall = !obstacle.empty() && std::find(obstacle.begin(), obstacle.end(), 1) != obstacle.end();
  if (has_wall) {
    const std::size_t start = static_cast<std::size_t>(std::find(obstacle.begin(), obstacle.end(), 1) - obstacle.begin()) + 1;
    order_.resize(n);
    for (std::size_t k = 0; k < n; ++k) order_[k] = (start + k) % n;
  }

  std::size_t c0 = 0;
  while (c0 < cols) {
    const bool walled = has_wall && blocked[c0] != 0;
    std::size_t c1 = c0 + 1;
    while (c1 < cols && (has_wall && blocked[c1] != 0) == walled) ++c1;

    // Explicit side fused with the first elimination sweep where possible; -off d = i beta d.
    if (!walled) {
      const Complex* inv = cyc_inv_.data();
      for (std::size_t i = 0; i < n; ++i) {
        const Complex* yc = y + i * cols;
        const Complex* yp = y + (i == 0 ? n - 1 : i - 1) * cols;
        const Complex* yn = y + (i + 1 == n ? 0 : i + 1) * cols;
        Complex* dc = d + i * cols;
        const Complex w = inv[i];
        if (i == 0) {
          for (std::size_t c = c0; c < c1; ++c) dc[c] = (yc[c] + times_i(beta, yp[c] + yn[c] - 2.0 * yc[c])) * w;
        } else {
          const Complex* dp = d + (i - 1) * cols;
          for (std::size_t c = c0; c < c1; ++c)
            dc[c] = (yc[c] + times_i(beta, yp[c] + yn[c] - 2.0 * yc[c] + dp[c])) * w;
        }
      }
      const Complex* cstar = cyc_cstar_.data();
      for (std::size_t i = n - 1; i-- > 0;) {
        Complex* dc = d + i * cols;
        const Complex* dn = d + (i + 1) * cols;
        const Complex s = cstar[i];
        for (std::size_t c = c0; c < c1; ++c) dc[c] -= s * dn[c];
      }
      const Complex* first = d;
      const Complex* last = d + (n - 1) * cols;
      const Complex scale = off_ / gamma_;
      const Complex denom = 1.0 / cyc_denominator_;
      for (std::size_t c = c0; c < c1; ++c) fact_[c] = (first[c] + scale * last[c]) * denom;
      for (std::size_t i = 0; i < n; ++i) {
        const Complex z = cyc_z_[i];
        const Complex* dc = d + i * cols;
        Complex* yc = y + i * cols;
        for (std::size_t c = c0; c < c1; ++c) yc[c] = dc[c] - fact_[c] * z;
      }
    } else {
      // Obstacle neighbours enter the explicit side as zero.
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = i == 0 ? n - 1 : i - 1;
        const std::size_t in = i + 1 == n ? 0 : i + 1;
        const Complex* yc = y + i * cols;
        const Complex* yp = y + ip * cols;
        const Complex* yn = y + in * cols;
        const double wp = obstacle[ip] ? 0.0 : 1.0;
        const double wn = obstacle[in] ? 0.0 : 1.0;
        Complex* dc = d + i * cols;
        for (std::size_t c = c0; c < c1; ++c) dc[c] = yc[c] + times_i(beta, wp * yp[c] + wn * yn[c] - 2.0 * yc[c]);
      }
      std::size_t r = 0;
      while (r < n) {
        const std::size_t p0 = order_[r];
        if (obstacle[p0]) {
          Complex* yc = y + p0 * cols;
          for (std::size_t c = c0; c < c1; ++c) yc[c] = 0.0;
          ++r;
          continue;
        }
        std::size_t len = 0;
        while (r + len < n && !obstacle[order_[r + len]]) ++len;
        for (std::size_t k = 0; k < len; ++k) {
          Complex* dc = d + order_[r + k] * cols;
          const Complex w = seg_inv_[k];
          if (k == 0) {
            for (std::size_t c = c0; c < c1; ++c) dc[c] *= w;
          } else {
            const Complex* dp = d + order_[r + k - 1] * cols;
            for (std::size_t c = c0; c < c1; ++c) dc[c] = (dc[c] + times_i(beta, dp[c])) * w;
          }
        }
        for (std::size_t k = len - 1; k-- > 0;) {
          Complex* dc = d + order_[r + k] * cols;
          const Complex* dn = d + order_[r + k + 1] * cols;
          const Complex s = seg_cstar_[k];
          for (std::size_t c = c0; c < c1; ++c) dc[c] -= s * dn[c];
        }
        for (std::size_t k = 0; k < len; ++k) {
          const Complex* dc = d + order_[r + k] * cols;
          Complex* yc = y + order_[r + k] * cols;
          for (std::size_t c = c0; c < c1; ++c) yc[c] = dc[c];
        }
        r += len;
      }
    }
    c0 = c1;
  }
}

}  // namespace abe
