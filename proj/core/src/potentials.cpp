#include "abe/potentials.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <string>

#include "abe/error.hpp"

namespace abe {

PulseShape parse_pulse_shape(std::string_view name) {
  if (name == "quartic_bump") return PulseShape::quartic_bump;
  if (name == "smooth_plateau") return PulseShape::smooth_plateau;
  throw ConfigError("pulse: unknown shape '" + std::string(name) + "'");
}

std::string_view to_string(PulseShape shape) {
  return shape == PulseShape::quartic_bump ? "quartic_bump" : "smooth_plateau";
}

void ABPotentialSpec::validate(const TubeSpec& tube) const {
  std::ostringstream msg;
  if (!(profile.half_support > 0.0)) {
    msg << "pulse: L0 > 0 violated: " << profile.half_support;
    throw ConfigError(msg.str());
  }
  if (!(taper_inner < taper_outer)) {
    msg << "pulse: taper_inner < taper_outer violated: " << taper_inner << " >= " << taper_outer;
    throw ConfigError(msg.str());
  }
  if (taper_outer > std::min(tube.a1, 0.5 * tube.length)) {
    msg << "pulse: taper_outer <= min(a1, L/2) violated: " << taper_outer;
    throw ConfigError(msg.str());
  }
}

void BackgroundSpec::validate() const {
  std::ostringstream msg;
  if (!(rho > 0.0)) {
    msg << "background: rho > 0 violated: rho=" << rho;
    throw ConfigError(msg.str());
  }
  if (!(rho - mu > 1.0)) {
    msg << "background: rho - mu > 1 violated: " << rho << " - " << mu << " = " << rho - mu << " <= 1";
    throw ConfigError(msg.str());
  }
}

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

double eval_Q0(const PulseProfile& profile, double z) {
  const double l0 = profile.half_support;
  if (std::abs(z) >= l0) return 0.0;
  switch (profile.shape) {
    case PulseShape::quartic_bump: {
      const double u = z / l0;
      const double s = 1.0 - u * u;
      return profile.amplitude * s * s;
    }
    case PulseShape::smooth_plateau:
      return profile.amplitude * smoothstep(2.0 + 2.0 * z / l0) * smoothstep(2.0 - 2.0 * z / l0);
  }
  return 0.0;
}

double taper_weight(const ABPotentialSpec& ab, Point x) {
  const double r = std::hypot(x.x1, x.x2);
  if (r <= ab.taper_inner) return 1.0;
  if (r >= ab.taper_outer) return 0.0;
  return 1.0 - smoothstep((r - ab.taper_inner) / (ab.taper_outer - ab.taper_inner));
}

double eval_V0(double t, Point x, const BackgroundSpec& bg) {
  const double r = std::hypot(x.x1, x.x2);
  return bg.strength * std::pow(1.0 + std::abs(t), bg.mu) * std::pow(1.0 + r, -bg.rho);
}

double eval_V(double t, Point x, double v, const ABPotentialSpec& ab, const BackgroundSpec& bg,
              const TubeSpec& tube) {
  double value = 0.0;
  if (is_inside_K0(x, tube)) value += v * eval_Q0(ab.profile, v * t) * taper_weight(ab, x);
  if (bg.enabled) value += eval_V0(t, x, bg);
  return value;
}

double integrate_Q0(const PulseProfile& profile, double a, double b) {
  const double l0 = profile.half_support;
  a = std::max(a, -l0);
  b = std::min(b, l0);
  if (!(a < b)) return 0.0;
  // Q0 is piecewise polynomial; integrate each smooth piece separately.
  std::vector<double> breaks{-l0, l0};
  if (profile.shape == PulseShape::smooth_plateau) breaks = {-l0, -0.5 * l0, 0.5 * l0, l0};
  auto f = [&profile](double z) { return eval_Q0(profile, z); };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double lo = std::max(a, breaks[p]);
    const double hi = std::min(b, breaks[p + 1]);
    if (lo < hi) sum += Rule::integrate(f, lo, hi, 15, 1e-14);
  }
  return sum;
}

double phase_F_minus(double t, double v, const PulseProfile& profile) {
  const double l0 = profile.half_support;
  return integrate_Q0(profile, -l0, std::min(v * t, l0));
}

double phase_F_plus(double t, double v, const PulseProfile& profile) {
  const double l0 = profile.half_support;
  return integrate_Q0(profile, std::max(v * t, -l0), l0);
}

double total_flux_phi(const PulseProfile& profile) {
  return integrate_Q0(profile, -profile.half_support, profile.half_support);
}

PulseProfile calibrate_amplitude_for_phase(double target_phi, const PulseProfile& profile) {
  PulseProfile unit = profile;
  unit.amplitude = 1.0;
  const double unit_flux = total_flux_phi(unit);
  if (unit_flux == 0.0) throw ConfigError("pulse: unit-amplitude flux is zero; cannot calibrate");
  unit.amplitude = target_phi / unit_flux;
  return unit;
}

}  // namespace abe
