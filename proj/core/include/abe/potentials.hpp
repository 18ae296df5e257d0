#pragma once

#include <string_view>

#include "abe/field.hpp"
#include "abe/geometry.hpp"

namespace abe {

enum class PulseShape { quartic_bump, smooth_plateau };

PulseShape parse_pulse_shape(std::string_view name);
std::string_view to_string(PulseShape shape);

/// The C^1 pulse Q0(z), supported in |z| < L0. Units are potential / hbar.
struct PulseProfile {
  double amplitude = 1.0;
  double half_support = 2.0;  ///< L0
  PulseShape shape = PulseShape::quartic_bump;
};

/// Spatial extension of the pulse: Q(z, x) = Q0(z) w(|x|) on the hole.
///
/// w = 1 on |x| <= taper_inner (= L1), w = 0 for |x| >= taper_outer, C^1
/// smoothstep in between.
struct ABPotentialSpec {
  PulseProfile profile;
  double taper_inner = 5.0;
  double taper_outer = 6.0;

  void validate(const TubeSpec& tube) const;
};

/// V0(t, x) = C_V (1 + |t|)^mu (1 + |x|)^-rho, used only when enabled.
struct BackgroundSpec {
  double strength = 0.0;
  double rho = 2.0;
  double mu = 0.0;
  bool enabled = false;

  /// Rejects rho <= 0 and rho - mu <= 1.
  void validate() const;
};

/// C^1 clamp(3u^2 - 2u^3) on [0, 1].
double smoothstep(double u);

double eval_Q0(const PulseProfile& profile, double z);

/// Radial taper weight w(|x|).
double taper_weight(const ABPotentialSpec& ab, Point x);

double eval_V0(double t, Point x, const BackgroundSpec& bg);

/// V(t, x) = v Q0(v t) w(x) [x in K0] + V0(t, x) [bg.enabled].
double eval_V(double t, Point x, double v, const ABPotentialSpec& ab, const BackgroundSpec& bg, const TubeSpec& tube);

/// Integral of Q0 over [a, b] (adaptive Gauss-Kronrod, absolute tolerance 1e-12).
double integrate_Q0(const PulseProfile& profile, double a, double b);

/// F_-(t) = v * integral_{-inf}^{t} Q0(v s) ds = integral_{-L0}^{min(vt, L0)} Q0.
double phase_F_minus(double t, double v, const PulseProfile& profile);

/// F_+(t) = v * integral_{t}^{inf} Q0(v s) ds = integral_{max(vt, -L0)}^{L0} Q0.
double phase_F_plus(double t, double v, const PulseProfile& profile);

/// Total flux phase: integral of Q0 over its support. Independent of v.
double total_flux_phi(const PulseProfile& profile);

/// Returns a copy with the amplitude scaled so that total_flux_phi == target.
PulseProfile calibrate_amplitude_for_phase(double target_phi, const PulseProfile& profile);

}  // namespace abe
