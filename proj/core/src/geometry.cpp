#include "abe/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "abe/error.hpp"

namespace abe {

void TubeSpec::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("geometry: " + what); };
  std::ostringstream msg;
  if (!(a1 > 0.0 && a1 < a2)) {
    msg << "0 < a1 < a2 violated: a1=" << a1 << ", a2=" << a2;
    fail(msg.str());
  }
  if (!(length > 0.0)) {
    msg << "L > 0 violated: L=" << length;
    fail(msg.str());
  }
  if (!(flat_radius < a1)) {
    msg << "L1 < a1 violated: " << flat_radius << " >= " << a1;
    fail(msg.str());
  }
  if (!(flat_radius < 0.5 * length)) {
    msg << "L1 < L/2 violated: " << flat_radius << " >= " << 0.5 * length;
    fail(msg.str());
  }
  if (!(pulse_half_support > 0.0 && pulse_half_support < flat_radius)) {
    msg << "0 < L0 < L1 violated: L0=" << pulse_half_support << ", L1=" << flat_radius;
    fail(msg.str());
  }
}

bool is_inside_K(Point x, const TubeSpec& tube) {
  const double r = std::abs(x.x1);
  return r >= tube.a1 && r <= tube.a2 && std::abs(x.x2) <= 0.5 * tube.length;
}

bool is_inside_K0(Point x, const TubeSpec& tube) {
  return std::abs(x.x1) < tube.a1 && std::abs(x.x2) <= 0.5 * tube.length;
}

std::size_t DomainMasks::obstacle_count() const {
  return static_cast<std::size_t>(std::count(obstacle.begin(), obstacle.end(), std::uint8_t{1}));
}

std::vector<double> absorber_profile(const GridSpec& grid, double cap_strength) {
  std::vector<double> absorber(grid.size(), 0.0);
  if (cap_strength == 0.0 || grid.absorber_width <= 0.0) return absorber;
  const double start = 0.5 * grid.extent2 - grid.absorber_width;
  for (std::size_t j = 0; j < grid.points2; ++j) {
    const double excess = std::abs(grid.x2(j)) - start;
    if (excess <= 0.0) continue;
    const double u = excess / grid.absorber_width;
    const double value = cap_strength * u * u;
    for (std::size_t i = 0; i < grid.points1; ++i) absorber[grid.index(i, j)] = value;
  }
  return absorber;
}

DomainMasks build_comoving_masks(const GridSpec& grid, const TubeSpec& tube, double cap_strength, double shift) {
  DomainMasks masks;
  masks.obstacle.assign(grid.size(), 0);
  // K is a product set, so classify rows and columns once.
  std::vector<std::uint8_t> wall_column(grid.points1), tube_row(grid.points2);
  for (std::size_t i = 0; i < grid.points1; ++i) {
    const double r = std::abs(grid.x1(i));
    wall_column[i] = (r >= tube.a1 && r <= tube.a2) ? 1 : 0;
  }
  for (std::size_t j = 0; j < grid.points2; ++j)
    tube_row[j] = std::abs(grid.x2(j) + shift) <= 0.5 * tube.length ? 1 : 0;
  for (std::size_t i = 0; i < grid.points1; ++i) {
    if (!wall_column[i]) continue;
    for (std::size_t j = 0; j < grid.points2; ++j) masks.obstacle[grid.index(i, j)] = tube_row[j];
  }
  masks.absorber = absorber_profile(grid, cap_strength);
  return masks;
}

DomainMasks build_masks(const GridSpec& grid, const TubeSpec& tube, double cap_strength) {
  const double physics_half = 0.5 * grid.extent2 - grid.absorber_width;
  if (0.5 * tube.length >= physics_half) {
    std::ostringstream msg;
    msg << "geometry: tube end L/2=" << 0.5 * tube.length << " reaches the absorbing layer starting at |x2|="
        << physics_half;
    throw ConfigError(msg.str());
  }
  return build_comoving_masks(grid, tube, cap_strength, 0.0);
}

namespace {

bool line_hits_rectangle(Point p, Point d, double xmin, double xmax, double ymin, double ymax) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const std::array<double, 2> origin{p.x1, p.x2};
  const std::array<double, 2> dir{d.x1, d.x2};
  const std::array<double, 2> mins{xmin, ymin};
  const std::array<double, 2> maxs{xmax, ymax};
  for (int a = 0; a < 2; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < mins[a] || origin[a] > maxs[a]) return false;
      continue;
    }
    double t1 = (mins[a] - origin[a]) / dir[a];
    double t2 = (maxs[a] - origin[a]) / dir[a];
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
    if (lo > hi) return false;
  }
  return true;
}

bool line_hits_tube(Point p, Point d, const TubeSpec& tube) {
  const double h = 0.5 * tube.length;
  return line_hits_rectangle(p, d, tube.a1, tube.a2, -h, h) ||
         line_hits_rectangle(p, d, -tube.a2, -tube.a1, -h, h);
}

}  // namespace

bool lambda_vhat_clearance(const TubeSpec& tube, Point vhat, double ball_radius) {
  if (ball_radius < 0.0) return true;
  if (vhat.x1 == 0.0) return ball_radius < tube.a1;  // vertical lines x1 = c, |c| <= r
  constexpr int samples = 720;
  for (int s = 0; s < samples; ++s) {
    const double angle = 2.0 * std::numbers::pi * s / samples;
    const Point p{ball_radius * std::cos(angle), ball_radius * std::sin(angle)};
    if (line_hits_tube(p, vhat, tube)) return false;
  }
  return !line_hits_tube({0.0, 0.0}, vhat, tube);
}

double l2_norm_on_domain(const ComplexField& field, const DomainMasks& masks) {
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k)
    if (masks.is_interior(k)) sum += std::norm(field[k]);
  return std::sqrt(sum * field.grid().cell_area());
}

double l2_distance_on_domain(const ComplexField& a, const ComplexField& b, const DomainMasks& masks) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (masks.is_interior(k)) sum += std::norm(a[k] - b[k]);
  return std::sqrt(sum * a.grid().cell_area());
}

void apply_dirichlet(ComplexField& field, const DomainMasks& masks) {
  for (std::size_t k = 0; k < field.size(); ++k)
    if (masks.is_obstacle(k)) field[k] = 0.0;
}

}  // namespace abe
