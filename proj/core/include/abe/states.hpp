#pragma once

#include <string_view>

#include "abe/field.hpp"

namespace abe {

enum class EnvelopeKind { bump_c2 };

EnvelopeKind parse_envelope_kind(std::string_view name);
std::string_view to_string(EnvelopeKind kind);

/// Compactly supported H^2 envelope phi centred at the origin.
struct Envelope {
  double radius = 2.5;
  EnvelopeKind kind = EnvelopeKind::bump_c2;
  double normalization = 1.0;
  /// Peak value c of the normalized profile.
  double peak = 0.0;
  ComplexField samples;
};

/// Unnormalized bump (1 - |x|^2/R^2)^3 on |x| < R, 0 elsewhere.
double bump_c2_profile(double r, double radius);

/// Builds phi = c (1 - |x|^2/R^2)^3 with c fixing the grid L2 norm.
///
/// `radius_limit` is L1 - L0; R must lie strictly inside (0, radius_limit) and
/// span at least 16 cells along each axis. Throws ConfigError otherwise.
Envelope make_envelope(double radius, const GridSpec& grid, double radius_limit,
                       EnvelopeKind kind = EnvelopeKind::bump_c2, double normalization = 1.0);

/// Closest velocity v' with m v' an integer multiple of 2 pi / X2.
double commensurate_velocity(double v, double mass, const GridSpec& grid);
bool is_commensurate(double v, double mass, const GridSpec& grid);

/// phi_v = exp(i m v x2) phi. Rejects velocities that would not be periodic on the box.
ComplexField boost(const ComplexField& phi, double mass, double v);

/// Plateau/support radii of the momentum window g, as fractions of m v.
struct CutoffWindow {
  double plateau_fraction = 1.0 / 32.0;
  double support_fraction = 1.0 / 16.0;
};

/// Radial window g(|p| / v): 1 inside m v plateau_fraction, 0 beyond
/// m v support_fraction, smoothstep in between.
double cutoff_window(double p, double v, double mass, const CutoffWindow& window);

/// phi~ = g(p / v) phi (spectral multiplication).
ComplexField momentum_cutoff(const ComplexField& phi, double v, double mass, const CutoffWindow& window = {});

/// ||(1 + |p|^2) phi^||, an equivalent H^2 norm.
double h2_norm(const ComplexField& field);

}  // namespace abe
