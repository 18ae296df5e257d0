#pragma once

#include <cstdint>
#include <vector>

#include "abe/field.hpp"

namespace abe {

/// Two-dimensional tube: two wall slabs a1 <= |x1| <= a2, |x2| <= L/2, with an
/// open channel |x1| < a1 between them. The beam travels along +x2.
struct TubeSpec {
  double a1 = 6.0;           ///< inner half-width of the hole
  double a2 = 8.0;           ///< outer half-width of the walls
  double length = 24.0;      ///< L, tube extent along x2
  double flat_radius = 5.0;  ///< L1, radius of the ball where the pulse is flat
  double pulse_half_support = 2.0;  ///< L0, half-support of the pulse in z = v t

  /// Checks 0 < a1 < a2, L > 0, L1 < a1, L1 < L/2, 0 < L0 < L1.
  void validate() const;
};

bool is_inside_K(Point x, const TubeSpec& tube);
bool is_inside_K0(Point x, const TubeSpec& tube);

/// Node classification of the grid. Every node is exactly one of obstacle or
/// interior; interior is stored implicitly as the complement.
struct DomainMasks {
  std::vector<std::uint8_t> obstacle;
  std::vector<double> absorber;

  bool is_obstacle(std::size_t k) const { return obstacle[k] != 0; }
  bool is_interior(std::size_t k) const { return obstacle[k] == 0; }
  std::size_t obstacle_count() const;
};

/// Lab-frame masks. Throws ConfigError when the tube reaches into the
/// absorbing layer or out of the box along x2.
DomainMasks build_masks(const GridSpec& grid, const TubeSpec& tube, double cap_strength);

/// Masks for a window that travels with the beam: node y is an obstacle node
/// iff y + shift * e2 lies in K. The absorber stays attached to the window.
DomainMasks build_comoving_masks(const GridSpec& grid, const TubeSpec& tube, double cap_strength, double shift);

/// Quadratic ramp eta * ((|x2| - x2_start) / width)^2 at both x2 ends.
std::vector<double> absorber_profile(const GridSpec& grid, double cap_strength);

/// True iff every line {x + tau * vhat} with x in the closed ball of the given
/// radius misses K. Exact for axis-aligned directions, otherwise 720 boundary
/// samples with exact line/rectangle tests.
bool lambda_vhat_clearance(const TubeSpec& tube, Point vhat, double ball_radius);

/// sqrt(sum over interior nodes |psi|^2 dA).
double l2_norm_on_domain(const ComplexField& field, const DomainMasks& masks);

/// ||a - b|| restricted to interior nodes.
double l2_distance_on_domain(const ComplexField& a, const ComplexField& b, const DomainMasks& masks);

/// Sets obstacle nodes to zero.
void apply_dirichlet(ComplexField& field, const DomainMasks& masks);

}  // namespace abe
