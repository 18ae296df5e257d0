#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abe/propagators.hpp"

namespace abe {

enum class BackgroundMode { off, rho_short, rho_one, rho_frac };
enum class ResolutionTier { base, halved };

BackgroundMode parse_background_mode(std::string_view name);
std::string_view to_string(BackgroundMode mode);
ResolutionTier parse_tier(std::string_view name);
std::string_view to_string(ResolutionTier tier);

/// Default (rho, mu) for each background regime.
std::pair<double, double> default_decay(BackgroundMode mode);

struct SweepConfig {
  std::vector<double> velocities{4.0, 5.656854249492381, 8.0, 11.313708498984761, 16.0};
  BackgroundMode bg_mode = BackgroundMode::off;
  double rho = 2.0;
  double mu = 0.0;
  double target_phi = 1.5707963267948966;
  ResolutionTier tier = ResolutionTier::base;

  void validate() const;
};

/// Everything a run needs apart from the sweep itself.
struct ExperimentSpecs {
  GridSpec grid;
  PhysicsSpecs physics;
  double envelope_radius = 2.5;
  EnvelopeKind envelope_kind = EnvelopeKind::bump_c2;
  double envelope_normalization = 1.0;
  SolverParams solver;
  /// Worker threads for independent velocities.
  unsigned threads = 1;
};

/// Specs with the sweep's tier, pulse calibration and background applied.
ExperimentSpecs resolve_specs(const SweepConfig& cfg, const ExperimentSpecs& specs);

/// E(v): v^-rho for 0 < rho < 1, |ln v| / v for rho = 1, 1 / v for rho > 1.
double eval_error_bound_E(double v, double rho);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root mean square of the log-space residuals.
  double residual = 0.0;
  /// Twice the standard error of the slope.
  double half_width = 0.0;
};

/// Ordinary least squares of ln(error) against ln(v).
RateFit fit_rate(const std::vector<double>& velocities, const std::vector<double>& errors);

struct ProbeError {
  double t = 0.0;
  double error = 0.0;
  double floor = 0.0;
};

struct VelocityResult {
  double v_requested = 0.0;
  double v_actual = 0.0;
  double sup_error = 0.0;
  double floor = 0.0;
  double model_E = 0.0;
  /// Error at t = 0 (wave operator) and its control value.
  double wave_error = 0.0;
  double wave_floor = 0.0;
  /// d(v) = ||e^{-imvx} S phi_v - e^{-i Phi} phi|| and its control value.
  double scattering_distance = 0.0;
  double scattering_floor = 0.0;
  /// arg <phi_v, S phi_v> and its distance to -Phi modulo 2 pi.
  double scattering_phase = 0.0;
  double phase_error = 0.0;
  double runtime_s = 0.0;
  bool above_floor = false;
  std::vector<ProbeError> probes;
};

struct ErrorCurve {
  std::vector<VelocityResult> points;
  double phi = 0.0;
  double model_rho = 2.0;
  double model_exponent = -1.0;
  double h2_norm = 0.0;
  std::size_t points_above_floor = 0;
  /// Fit over the points above their floor; empty when fewer than 4 qualify.
  std::optional<RateFit> fit;
  /// Fit over every point, reported for reference whatever the floor says.
  RateFit fit_all;
  RateFit wave_fit;
  RateFit scattering_fit;
  /// Largest sup_error / (||phi||_H2 E(v)) across the sweep.
  double c_fit = 0.0;
  /// sup_error non-increasing up to 5% per adjacent pair.
  bool monotone = false;

  bool conclusive() const { return fit.has_value(); }
};

/// Error of one interacting run against the Ansatz, plus its zero-pulse control.
/// `on_probe` sees every probe of the main run.
VelocityResult measure_velocity(double v_requested, const SweepConfig& cfg, const ExperimentSpecs& resolved,
                                const ProbeObserver& on_probe = {});

/// Runs the whole sweep. Velocities are processed in parallel when
/// specs.threads > 1; results are ordered as cfg.velocities.
ErrorCurve uniform_error_curve(const SweepConfig& cfg, const ExperimentSpecs& specs);

struct WaveOperatorPoint {
  double v = 0.0;
  double error = 0.0;
  double floor = 0.0;
};
std::vector<WaveOperatorPoint> wave_operator_test(const SweepConfig& cfg, const ExperimentSpecs& specs);
std::vector<WaveOperatorPoint> wave_operator_points(const ErrorCurve& curve);

struct ScatteringPoint {
  double v = 0.0;
  double distance = 0.0;
  double floor = 0.0;
  double phase = 0.0;
  double phase_error = 0.0;
};
struct ScatteringReport {
  std::vector<ScatteringPoint> points;
  RateFit fit;
  double phi = 0.0;
};
ScatteringReport scattering_phase_test(const SweepConfig& cfg, const ExperimentSpecs& specs);
ScatteringReport scattering_report(const ErrorCurve& curve);

struct FringeResult {
  double v = 0.0;
  double phi = 0.0;
  std::vector<double> theta;
  std::vector<double> intensity;
  double theta_star = 0.0;
  double visibility = 0.0;
  /// arg <psi_B, psi_A>; close to -Phi.
  double relative_phase = 0.0;
};

/// Two arms at the same velocity, A with the pulse and B without, compared
/// after exit. I(theta) = ||psi_A + e^{-i theta} psi_B||^2 peaks at theta = Phi.
FringeResult fringe_experiment(const SweepConfig& cfg, const ExperimentSpecs& specs, double v,
                               std::size_t theta_samples = 720);

struct LeakagePoint {
  double v = 0.0;
  double leakage = 0.0;
  double reduction = 0.0;  ///< previous leakage / this leakage; 0 for the first row
};
std::vector<LeakagePoint> leakage_table(const std::vector<double>& velocities, double t, double envelope_radius,
                                        const GridSpec& grid, double mass, const CutoffWindow& window = {});

struct CutoffPoint {
  double v = 0.0;
  double distance = 0.0;  ///< ||phi~ - phi||
  double scaled = 0.0;    ///< (1 + v^2) ||phi~ - phi|| / ||phi||_H2
};
std::vector<CutoffPoint> cutoff_table(const std::vector<double>& velocities, double envelope_radius,
                                      const GridSpec& grid, double mass, const CutoffWindow& window = {});

/// One named check of the exact-identity suite.
struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Fast exact identities: boost, gauge, unitarity, Parseval, phase sums, flux.
std::vector<IdentityCheck> identity_suite(const ExperimentSpecs& specs);

}  // namespace abe
