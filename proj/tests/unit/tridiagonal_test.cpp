#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "abe/tridiagonal.hpp"

using namespace abe;

namespace {

using Matrix = std::vector<std::vector<Complex>>;

// Gaussian elimination with partial pivoting on a dense copy.
std::vector<Complex> dense_solve(Matrix a, std::vector<Complex> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Complex f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Complex> x(n);
  for (std::size_t r = n; r-- > 0;) {
    Complex s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

// One Cayley half step built from the matrix definition, obstacle rows pinned to zero.
std::vector<Complex> dense_advance(const std::vector<Complex>& y, double beta, const std::vector<std::uint8_t>& wall) {
  const std::size_t n = y.size();
  const Complex a{0.0, beta};
  Matrix m(n, std::vector<Complex>(n, 0.0));
  std::vector<Complex> rhs(n, 0.0);
  auto blocked = [&](std::size_t k) { return !wall.empty() && wall[k]; };
  for (std::size_t j = 0; j < n; ++j) {
    if (blocked(j)) {
      m[j][j] = 1.0;
      continue;
    }
    const std::size_t l = (j + n - 1) % n, r = (j + 1) % n;
    m[j][j] = 1.0 + 2.0 * a;
    rhs[j] = (1.0 - 2.0 * a) * y[j];
    if (!blocked(l)) {
      m[j][l] -= a;
      rhs[j] += a * y[l];
    }
    if (!blocked(r)) {
      m[j][r] -= a;
      rhs[j] += a * y[r];
    }
  }
  return dense_solve(m, rhs);
}

std::vector<Complex> random_line(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> y(n);
  for (auto& c : y) c = {g(rng), g(rng)};
  return y;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double norm2(const std::vector<Complex>& a) {
  double s = 0.0;
  for (auto c : a) s += std::norm(c);
  return s;
}

}  // namespace

TEST_SUITE("tridiagonal") {
  TEST_CASE("periodic lines match the dense solve") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> beta(1e-3, 5.0);
    for (std::size_t n : {3u, 4u, 7u, 16u, 61u, 128u}) {
      for (int trial = 0; trial < 5; ++trial) {
        const double b = beta(rng);
        CayleyLineSolver solver(n, b);
        std::vector<Complex> y = random_line(n, rng);
        const auto expected = dense_advance(y, b, {});
        solver.advance(y, {});
        CHECK(max_diff(y, expected) <= 1e-12);
      }
    }
  }

  TEST_CASE("walled lines match the dense solve") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> beta(1e-3, 5.0);
    std::bernoulli_distribution wall_bit(0.2);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 8 + trial;
      std::vector<std::uint8_t> wall(n);
      for (auto& w : wall) w = wall_bit(rng);
      wall[trial % n] = 1;
      const double b = beta(rng);
      CayleyLineSolver solver(n, b);
      std::vector<Complex> y = random_line(n, rng);
      for (std::size_t k = 0; k < n; ++k)
        if (wall[k]) y[k] = 0.0;
      const auto expected = dense_advance(y, b, wall);
      solver.advance(y, wall);
      CHECK(max_diff(y, expected) <= 1e-12);
      for (std::size_t k = 0; k < n; ++k)
        if (wall[k]) CHECK(y[k] == Complex{0.0, 0.0});
    }
  }

  TEST_CASE("column batches agree with line-by-line solves") {
    std::mt19937 rng(3);
    const std::size_t n = 40, cols = 13;
    const double b = 0.7;
    std::vector<std::uint8_t> wall(n, 0), blocked(cols, 0);
    wall[5] = wall[6] = wall[30] = 1;
    for (std::size_t c = 0; c < cols; ++c) blocked[c] = (c % 3 == 1 || c > 9) ? 1 : 0;
    std::vector<Complex> data(n * cols);
    for (auto& z : data) z = random_line(1, rng)[0];
    for (std::size_t i = 0; i < n; ++i)
      if (wall[i])
        for (std::size_t c = 0; c < cols; ++c)
          if (blocked[c]) data[i * cols + c] = 0.0;

    std::vector<std::vector<Complex>> expected(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<Complex> line(n);
      for (std::size_t i = 0; i < n; ++i) line[i] = data[i * cols + c];
      expected[c] = dense_advance(line, b, blocked[c] ? wall : std::vector<std::uint8_t>{});
    }
    CayleyLineSolver solver(n, b);
    solver.advance_columns(data.data(), cols, blocked, wall);
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(data[i * cols + c] - expected[c][i]) <= 1e-12);
  }

  TEST_CASE("a Cayley step preserves the discrete norm") {
    std::mt19937 rng(4);
    std::bernoulli_distribution wall_bit(0.1);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 32 + 3 * trial;
      std::vector<std::uint8_t> wall(n);
      for (auto& w : wall) w = wall_bit(rng);
      CayleyLineSolver solver(n, 0.01 + 0.1 * trial);
      std::vector<Complex> y = random_line(n, rng);
      for (std::size_t k = 0; k < n; ++k)
        if (wall[k]) y[k] = 0.0;
      const double before = norm2(y);
      solver.advance(y, trial % 2 ? wall : std::vector<std::uint8_t>{});
      CHECK(std::abs(norm2(y) - before) / before <= 1e-13);
    }
  }

  TEST_CASE("segment and cyclic solves invert the implicit side") {
    std::mt19937 rng(5);
    const std::size_t n = 24;
    const double b = 1.3;
    const Complex a{0.0, b};
    CayleyLineSolver solver(n, b);
    const std::vector<Complex> x = random_line(n, rng);
    std::vector<Complex> lhs(n);
    for (std::size_t j = 0; j < n; ++j) lhs[j] = (1.0 + 2.0 * a) * x[j] - a * (x[(j + n - 1) % n] + x[(j + 1) % n]);
    solver.solve_cyclic(lhs);
    CHECK(max_diff(lhs, x) <= 1e-13);

    const std::size_t m = 9;
    std::vector<Complex> seg(m);
    for (std::size_t j = 0; j < m; ++j)
      seg[j] = (1.0 + 2.0 * a) * x[j] - a * ((j > 0 ? x[j - 1] : 0.0) + (j + 1 < m ? x[j + 1] : 0.0));
    solver.solve_segment(seg);
    CHECK(max_diff(seg, std::vector<Complex>(x.begin(), x.begin() + m)) <= 1e-13);

    std::vector<Complex> rhs(n);
    solver.explicit_side(x, rhs);
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(rhs[j] - ((1.0 - 2.0 * a) * x[j] + a * (x[(j + n - 1) % n] + x[(j + 1) % n]))) <= 1e-13);
  }
}
