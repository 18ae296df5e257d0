#include "abe/states.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "abe/error.hpp"
#include "abe/potentials.hpp"
#include "abe/spectral.hpp"

namespace abe {

EnvelopeKind parse_envelope_kind(std::string_view name) {
  if (name == "bump_c2") return EnvelopeKind::bump_c2;
  throw ConfigError("envelope: unknown kind '" + std::string(name) + "'");
}

std::string_view to_string(EnvelopeKind) { return "bump_c2"; }

double bump_c2_profile(double r, double radius) {
  if (r >= radius) return 0.0;
  const double s = 1.0 - (r * r) / (radius * radius);
  return s * s * s;
}

Envelope make_envelope(double radius, const GridSpec& grid, double radius_limit, EnvelopeKind kind,
                       double normalization) {
  std::ostringstream msg;
  if (!(radius > 0.0)) {
    msg << "envelope: R > 0 violated: R=" << radius;
    throw ConfigError(msg.str());
  }
  if (!(radius < radius_limit)) {
    msg << "envelope: R < L1 - L0 violated: " << radius << " >= " << radius_limit;
    throw ConfigError(msg.str());
  }
  const double cells = radius / std::max(grid.dx1(), grid.dx2());
  if (cells < 16.0) {
    msg << "envelope: R spans " << cells << " cells, at least 16 required";
    throw ResolutionError(msg.str());
  }

  Envelope env;
  env.radius = radius;
  env.kind = kind;
  env.normalization = normalization;
  env.samples = ComplexField(grid);
  for (std::size_t i = 0; i < grid.points1; ++i)
    for (std::size_t j = 0; j < grid.points2; ++j)
      env.samples(i, j) = bump_c2_profile(std::hypot(grid.x1(i), grid.x2(j)), radius);
  const double raw = l2_norm(env.samples);
  env.peak = normalization / raw;
  env.samples *= env.peak;
  return env;
}

double commensurate_velocity(double v, double mass, const GridSpec& grid) {
  const double dk = 2.0 * std::numbers::pi / grid.extent2;
  return std::round(mass * v / dk) * dk / mass;
}

bool is_commensurate(double v, double mass, const GridSpec& grid) {
  const double dk = 2.0 * std::numbers::pi / grid.extent2;
  const double modes = mass * v / dk;
  return std::abs(modes - std::round(modes)) <= 1e-9 * std::max(1.0, std::abs(modes));
}

ComplexField boost(const ComplexField& phi, double mass, double v) {
  const GridSpec& grid = phi.grid();
  if (!is_commensurate(v, mass, grid)) {
    std::ostringstream msg;
    msg << "boost: m v = " << mass * v << " is not a multiple of 2 pi / X2; use commensurate_velocity()";
    throw ConfigError(msg.str());
  }
  ComplexField out = phi;
  for (std::size_t j = 0; j < grid.points2; ++j) {
    const Complex carrier = std::polar(1.0, mass * v * grid.x2(j));
    for (std::size_t i = 0; i < grid.points1; ++i) out(i, j) *= carrier;
  }
  return out;
}

double cutoff_window(double p, double v, double mass, const CutoffWindow& window) {
  const double inner = window.plateau_fraction * mass * v;
  const double outer = window.support_fraction * mass * v;
  return 1.0 - smoothstep((p - inner) / (outer - inner));
}

ComplexField momentum_cutoff(const ComplexField& phi, double v, double mass, const CutoffWindow& window) {
  SpectralTransform fft(phi.grid());
  std::vector<Complex> g(phi.size());
  const auto& k1 = fft.k1();
  const auto& k2 = fft.k2();
  for (std::size_t i = 0; i < k1.size(); ++i)
    for (std::size_t j = 0; j < k2.size(); ++j)
      g[phi.grid().index(i, j)] = cutoff_window(std::hypot(k1[i], k2[j]), v, mass, window);
  ComplexField out = phi;
  fft.apply_multiplier(out, g);
  return out;
}

double h2_norm(const ComplexField& field) {
  SpectralTransform fft(field.grid());
  ComplexField spectrum = field;
  fft.forward(spectrum);
  const auto& k1 = fft.k1();
  const auto& k2 = fft.k2();
  double sum = 0.0;
  for (std::size_t i = 0; i < k1.size(); ++i)
    for (std::size_t j = 0; j < k2.size(); ++j) {
      const double weight = 1.0 + k1[i] * k1[i] + k2[j] * k2[j];
      sum += weight * weight * std::norm(spectrum(i, j));
    }
  return std::sqrt(sum * field.grid().cell_area() / static_cast<double>(field.size()));
}

}  // namespace abe
