#include "abe/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "abe/error.hpp"

namespace abe {
namespace {

// Runs fn(k) for k in [0, n) on up to `threads` workers. The first exception
// is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// max over delta in [0, span] of ||e^{-i delta} psi - ref|| on interior nodes.
double sup_over_phase(const ComplexField& psi, const ComplexField& ref, const DomainMasks& masks, double span) {
  double a = 0.0, b = 0.0;
  Complex c{0.0, 0.0};
  for (std::size_t k = 0; k < psi.size(); ++k) {
    if (!masks.is_interior(k)) continue;
    a += std::norm(psi[k]);
    b += std::norm(ref[k]);
    c += std::conj(ref[k]) * psi[k];
  }
  const double area = psi.grid().cell_area();
  auto distance = [&](double delta) {
    const double sq = a + b - 2.0 * std::real(std::polar(1.0, -delta) * c);
    return std::sqrt(std::max(0.0, sq) * area);
  };
  double best = std::max(distance(0.0), distance(span));
  // Interior maximum where e^{-i delta} c = -|c|.
  const double target = std::arg(c) - std::numbers::pi;
  for (int k = -2; k <= 2 + static_cast<int>(span / (2.0 * std::numbers::pi)); ++k) {
    const double delta = target + 2.0 * std::numbers::pi * k;
    if (delta > 0.0 && delta < span) best = std::max(best, distance(delta));
  }
  return best;
}

RateFit fit_if_positive(const std::vector<double>& v, const std::vector<double>& e) {
  for (double x : e)
    if (!(x > 0.0)) return RateFit{std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0};
  if (v.size() < 4) return RateFit{std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0};
  return fit_rate(v, e);
}

Envelope sweep_envelope(const ExperimentSpecs& specs) {
  const TubeSpec& tube = specs.physics.tube;
  return make_envelope(specs.envelope_radius, specs.grid, tube.flat_radius - tube.pulse_half_support,
                       specs.envelope_kind, specs.envelope_normalization);
}

}  // namespace

BackgroundMode parse_background_mode(std::string_view name) {
  if (name == "off") return BackgroundMode::off;
  if (name == "rho_short") return BackgroundMode::rho_short;
  if (name == "rho_one") return BackgroundMode::rho_one;
  if (name == "rho_frac") return BackgroundMode::rho_frac;
  throw ConfigError("sweep: unknown bg_mode '" + std::string(name) + "'");
}

std::string_view to_string(BackgroundMode mode) {
  switch (mode) {
    case BackgroundMode::off:
      return "off";
    case BackgroundMode::rho_short:
      return "rho_short";
    case BackgroundMode::rho_one:
      return "rho_one";
    case BackgroundMode::rho_frac:
      return "rho_frac";
  }
  return "off";
}

ResolutionTier parse_tier(std::string_view name) {
  if (name == "base") return ResolutionTier::base;
  if (name == "halved" || name == "halved_dx_dt") return ResolutionTier::halved;
  throw ConfigError("sweep: unknown resolution tier '" + std::string(name) + "'");
}

std::string_view to_string(ResolutionTier tier) { return tier == ResolutionTier::base ? "base" : "halved"; }

std::pair<double, double> default_decay(BackgroundMode mode) {
  switch (mode) {
    case BackgroundMode::rho_one:
      return {1.0, -0.5};
    case BackgroundMode::rho_frac:
      return {0.5, -0.75};
    case BackgroundMode::off:
    case BackgroundMode::rho_short:
      return {2.0, 0.0};
  }
  return {2.0, 0.0};
}

void SweepConfig::validate() const {
  std::ostringstream msg;
  if (velocities.size() < 4) {
    msg << "sweep: at least 4 velocities required, got " << velocities.size();
    throw ConfigError(msg.str());
  }
  for (std::size_t k = 0; k < velocities.size(); ++k) {
    if (!(velocities[k] > 1.0)) {
      msg << "sweep: velocities must exceed 1, got " << velocities[k];
      throw ConfigError(msg.str());
    }
    if (k > 0 && !(velocities[k] > velocities[k - 1])) {
      msg << "sweep: velocities must be strictly increasing at index " << k;
      throw ConfigError(msg.str());
    }
  }
  if (bg_mode != BackgroundMode::off) {
    BackgroundSpec bg;
    bg.rho = rho;
    bg.mu = mu;
    bg.validate();
  }
  if (!std::isfinite(target_phi)) throw ConfigError("sweep: target_phi must be finite");
}

ExperimentSpecs resolve_specs(const SweepConfig& cfg, const ExperimentSpecs& specs) {
  ExperimentSpecs out = specs;
  if (cfg.tier == ResolutionTier::halved) {
    out.grid = specs.grid.refined();
    out.solver.dt_factor *= 0.5;
    out.solver.dt *= 0.5;
  }
  PulseProfile& profile = out.physics.ab.profile;
  if (cfg.target_phi == 0.0)
    profile.amplitude = 0.0;
  else
    profile = calibrate_amplitude_for_phase(cfg.target_phi, profile);
  BackgroundSpec& bg = out.physics.background;
  bg.enabled = cfg.bg_mode != BackgroundMode::off;
  bg.rho = cfg.rho;
  bg.mu = cfg.mu;
  return out;
}

double eval_error_bound_E(double v, double rho) {
  std::ostringstream msg;
  if (!(v > 1.0)) {
    msg << "E(v): v > 1 violated: v=" << v;
    throw ConfigError(msg.str());
  }
  if (!(rho > 0.0)) {
    msg << "E(v): rho > 0 violated: rho=" << rho;
    throw ConfigError(msg.str());
  }
  if (rho < 1.0) return std::pow(v, -rho);
  if (rho == 1.0) return std::abs(std::log(v)) / v;
  return 1.0 / v;
}

RateFit fit_rate(const std::vector<double>& velocities, const std::vector<double>& errors) {
  std::ostringstream msg;
  if (velocities.size() != errors.size()) throw ConfigError("fit_rate: velocity and error lists differ in length");
  const std::size_t n = velocities.size();
  if (n < 4) {
    msg << "fit_rate: at least 4 points required, got " << n;
    throw ConfigError(msg.str());
  }
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(errors[k] > 0.0) || !(velocities[k] > 0.0)) {
      msg << "fit_rate: non-positive value at index " << k;
      throw ConfigError(msg.str());
    }
    x[k] = std::log(velocities[k]);
    y[k] = std::log(errors[k]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_rate: velocities must not all coincide");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    ssr += r * r;
  }
  fit.residual = std::sqrt(ssr / static_cast<double>(n));
  fit.half_width = 2.0 * std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

VelocityResult measure_velocity(double v_requested, const SweepConfig& cfg, const ExperimentSpecs& resolved,
                                const ProbeObserver& on_probe) {
  const auto start = std::chrono::steady_clock::now();
  const double m = resolved.physics.mass;
  const GridSpec& grid = resolved.grid;
  VelocityResult res;
  res.v_requested = v_requested;
  res.v_actual = commensurate_velocity(v_requested, m, grid);
  const double v = res.v_actual;
  if (!(v > 1.0)) throw ConfigError("sweep: commensurate velocity must exceed 1");
  const double model_rho = cfg.bg_mode == BackgroundMode::off ? 2.0 : cfg.rho;
  res.model_E = eval_error_bound_E(v, model_rho);

  const Envelope env = sweep_envelope(resolved);
  const SolverParams& solver = resolved.solver;
  const TimeGrid tg = plan_time_grid(v, m, solver);
  FreePropagator free(grid, m, KineticSymbol::cayley_adi, tg.dt);
  const ComplexField start_state = solver.comoving ? env.samples : boost(env.samples, m, v);
  const PulseProfile& profile = resolved.physics.ab.profile;
  const double phi = total_flux_phi(profile);

  // Main run against the Ansatz.
  std::vector<ProbeError> probes;
  DomainMasks last_masks;
  ComplexField last_ansatz;
  auto main_observer = [&](double t, const ComplexField& psi, const DomainMasks& masks) {
    ComplexField ansatz = free.evolve(start_state, t);
    ansatz *= std::polar(1.0, -phase_F_minus(t, v, profile));
    probes.push_back({t, l2_distance_on_domain(psi, ansatz, masks), 0.0});
    last_masks = masks;
    last_ansatz = std::move(ansatz);
    if (on_probe) on_probe(t, psi, masks);
  };
  const Trajectory tr = approx_psi_v(env, v, solver, resolved.physics, main_observer);

  // Zero-pulse control without background at identical resolution.
  PhysicsSpecs control = resolved.physics;
  control.ab.profile.amplitude = 0.0;
  control.background.enabled = false;
  std::size_t idx = 0;
  auto control_observer = [&](double t, const ComplexField& psi, const DomainMasks& masks) {
    const ComplexField reference = free.evolve(start_state, t);
    if (idx >= probes.size() || probes[idx].t != t) throw InvariantError("sweep: control probes do not match the main run");
    probes[idx++].floor = l2_distance_on_domain(psi, reference, masks);
  };
  const Trajectory ctl = approx_psi_v(env, v, solver, control, control_observer);

  for (const ProbeError& p : probes) {
    res.sup_error = std::max(res.sup_error, p.error);
    res.floor = std::max(res.floor, p.floor);
    if (p.t == 0.0) {
      res.wave_error = p.error;
      res.wave_floor = p.floor;
    }
  }
  if (tr.background_tail_phase > 0.0)
    res.sup_error = std::max(res.sup_error, sup_over_phase(tr.final_state, last_ansatz, last_masks,
                                                           tr.background_tail_phase));
  res.above_floor = res.sup_error >= 5.0 * res.floor;
  res.probes = std::move(probes);

  const ComplexField s = scattering_from_trajectory(tr);
  const ComplexField s0 = scattering_from_trajectory(ctl);
  ComplexField target = env.samples;
  target *= std::polar(1.0, -phi);
  res.scattering_distance = l2_norm(s - target);
  res.scattering_floor = l2_norm(s0 - env.samples);
  res.scattering_phase = std::arg(inner_product(env.samples, s));
  res.phase_error = std::abs(wrap_angle(res.scattering_phase + phi));
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

ErrorCurve uniform_error_curve(const SweepConfig& cfg, const ExperimentSpecs& specs) {
  cfg.validate();
  const ExperimentSpecs resolved = resolve_specs(cfg, specs);
  ErrorCurve curve;
  curve.phi = total_flux_phi(resolved.physics.ab.profile);
  curve.model_rho = cfg.bg_mode == BackgroundMode::off ? 2.0 : cfg.rho;
  curve.model_exponent = curve.model_rho < 1.0 ? -curve.model_rho : -1.0;
  curve.h2_norm = h2_norm(sweep_envelope(resolved).samples);

  curve.points.resize(cfg.velocities.size());
  parallel_for(cfg.velocities.size(), resolved.threads,
               [&](std::size_t k) { curve.points[k] = measure_velocity(cfg.velocities[k], cfg, resolved); });

  std::vector<double> v_all, e_all, v_ok, e_ok, wave, dist;
  curve.monotone = true;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const VelocityResult& p = curve.points[k];
    v_all.push_back(p.v_actual);
    e_all.push_back(p.sup_error);
    wave.push_back(p.wave_error);
    dist.push_back(p.scattering_distance);
    if (p.above_floor) {
      v_ok.push_back(p.v_actual);
      e_ok.push_back(p.sup_error);
    }
    if (k > 0 && p.sup_error > 1.05 * curve.points[k - 1].sup_error) curve.monotone = false;
    curve.c_fit = std::max(curve.c_fit, p.sup_error / (curve.h2_norm * p.model_E));
  }
  curve.points_above_floor = v_ok.size();
  if (v_ok.size() >= 4) curve.fit = fit_rate(v_ok, e_ok);
  curve.fit_all = fit_if_positive(v_all, e_all);
  curve.wave_fit = fit_if_positive(v_all, wave);
  curve.scattering_fit = fit_if_positive(v_all, dist);
  return curve;
}

std::vector<WaveOperatorPoint> wave_operator_points(const ErrorCurve& curve) {
  std::vector<WaveOperatorPoint> out;
  for (const auto& p : curve.points) out.push_back({p.v_actual, p.wave_error, p.wave_floor});
  return out;
}

std::vector<WaveOperatorPoint> wave_operator_test(const SweepConfig& cfg, const ExperimentSpecs& specs) {
  return wave_operator_points(uniform_error_curve(cfg, specs));
}

ScatteringReport scattering_report(const ErrorCurve& curve) {
  ScatteringReport report;
  report.phi = curve.phi;
  for (const auto& p : curve.points)
    report.points.push_back({p.v_actual, p.scattering_distance, p.scattering_floor, p.scattering_phase, p.phase_error});
  report.fit = curve.scattering_fit;
  return report;
}

ScatteringReport scattering_phase_test(const SweepConfig& cfg, const ExperimentSpecs& specs) {
  return scattering_report(uniform_error_curve(cfg, specs));
}

FringeResult fringe_experiment(const SweepConfig& cfg, const ExperimentSpecs& specs, double v,
                               std::size_t theta_samples) {
  if (theta_samples < 4) throw ConfigError("fringe: at least 4 theta samples required");
  const ExperimentSpecs arm_a = resolve_specs(cfg, specs);
  ExperimentSpecs arm_b = arm_a;
  arm_b.physics.ab.profile.amplitude = 0.0;
  const double m = arm_a.physics.mass;

  FringeResult out;
  out.v = commensurate_velocity(v, m, arm_a.grid);
  out.phi = total_flux_phi(arm_a.physics.ab.profile);
  const Envelope env = sweep_envelope(arm_a);
  ComplexField psi_a, psi_b;
  parallel_for(2, arm_a.threads, [&](std::size_t k) {
    const ExperimentSpecs& arm = k == 0 ? arm_a : arm_b;
    Trajectory tr = approx_psi_v(env, out.v, arm.solver, arm.physics);
    (k == 0 ? psi_a : psi_b) = std::move(tr.final_state);
  });

  const double aa = std::real(inner_product(psi_a, psi_a));
  const double bb = std::real(inner_product(psi_b, psi_b));
  const Complex ab = inner_product(psi_a, psi_b);
  out.relative_phase = std::arg(inner_product(psi_b, psi_a));
  double best = -1.0, worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < theta_samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(theta_samples);
    const double intensity = aa + bb + 2.0 * std::real(std::polar(1.0, -theta) * ab);
    out.theta.push_back(theta);
    out.intensity.push_back(intensity);
    if (intensity > best) {
      best = intensity;
      out.theta_star = theta;
    }
    worst = std::min(worst, intensity);
  }
  out.visibility = (best - worst) / (best + worst);
  return out;
}

std::vector<LeakagePoint> leakage_table(const std::vector<double>& velocities, double t, double envelope_radius,
                                        const GridSpec& grid, double mass, const CutoffWindow& window) {
  const Envelope env =
      make_envelope(envelope_radius, grid, std::numeric_limits<double>::infinity(), EnvelopeKind::bump_c2);
  std::vector<LeakagePoint> out;
  for (double v : velocities) {
    LeakagePoint p;
    p.v = v;
    p.leakage = leakage_diagnostic(env, v, t, mass, window);
    if (!out.empty()) p.reduction = p.leakage > 0.0 ? out.back().leakage / p.leakage
                                                    : std::numeric_limits<double>::infinity();
    out.push_back(p);
  }
  return out;
}

std::vector<CutoffPoint> cutoff_table(const std::vector<double>& velocities, double envelope_radius,
                                      const GridSpec& grid, double mass, const CutoffWindow& window) {
  const Envelope env =
      make_envelope(envelope_radius, grid, std::numeric_limits<double>::infinity(), EnvelopeKind::bump_c2);
  const double h2 = h2_norm(env.samples);
  std::vector<CutoffPoint> out;
  for (double v : velocities) {
    CutoffPoint p;
    p.v = v;
    p.distance = l2_norm(momentum_cutoff(env.samples, v, mass, window) - env.samples);
    p.scaled = (1.0 + v * v) * p.distance / h2;
    out.push_back(p);
  }
  return out;
}

std::vector<IdentityCheck> identity_suite(const ExperimentSpecs& specs) {
  std::vector<IdentityCheck> checks;
  auto add = [&](std::string name, double value, double tol) {
    checks.push_back({std::move(name), value, tol, value <= tol});
  };
  const double m = specs.physics.mass;
  const GridSpec& grid = specs.grid;
  const Envelope env = sweep_envelope(specs);

  // Boost identity on a state whose spectrum stays clear of the wrap band.
  const double v16 = commensurate_velocity(16.0, m, grid);
  const ComplexField banded = momentum_cutoff(env.samples, v16, m);
  add("boost identity, band-limited state", verify_boost_identity(banded, m, v16, 0.5), 1e-12);
  add("boost identity, v = 0", verify_boost_identity(env.samples, m, 0.0, 0.5), 0.0);
  add("boost identity, t = 0", verify_boost_identity(env.samples, m, v16, 0.0), 1e-14);

  // Gauge: a constant c added to V is the scalar phase e^{-i c T}.
  {
    const double v = commensurate_velocity(4.0, m, grid);
    const double dt = 0.05 / (m * v * v);
    const double c = 0.7;
    PhysicsSpecs physics = specs.physics;
    physics.ab.profile = calibrate_amplitude_for_phase(std::numbers::pi / 2.0, physics.ab.profile);
    InteractingPropagator plain(grid, physics, v, v, dt);
    InteractingPropagator shifted(grid, physics, v, v, dt);
    shifted.set_uniform_potential([c](double) { return c; });
    ComplexField a = env.samples, b = env.samples;
    const int steps = 200;
    const double t_start = -0.3;
    for (int k = 0; k < steps; ++k) {
      plain.step(a, t_start + k * dt);
      shifted.step(b, t_start + k * dt);
    }
    b *= std::polar(1.0, c * dt * steps);
    add("constant-potential gauge phase", max_abs_difference(a, b), 1e-12);
  }

  // Unitarity over 1000 steps with a static obstacle and the pulse active.
  {
    const double v = commensurate_velocity(4.0, m, grid);
    const double dt = 0.05 / (m * v * v);
    PhysicsSpecs physics = specs.physics;
    physics.ab.profile = calibrate_amplitude_for_phase(std::numbers::pi / 2.0, physics.ab.profile);
    InteractingPropagator prop(grid, physics, v, 0.0, dt);
    ComplexField psi = boost(env.samples, m, v);
    const DomainMasks masks = prop.masks_at(0.0);
    apply_dirichlet(psi, masks);
    double prev = l2_norm(psi);
    double worst = 0.0;
    const double t_start = -0.5;
    for (int k = 0; k < 1000; ++k) {
      prop.step(psi, t_start + k * dt);
      const double now = l2_norm(psi);
      worst = std::max(worst, std::abs(now - prev) / prev);
      prev = now;
    }
    add("unitarity drift per step (1000 steps)", worst, 1e-10);
  }

  {
    const ComplexField boosted = boost(env.samples, m, v16);
    double worst = 0.0;
    for (const ComplexField* f : {&env.samples, &boosted}) {
      const double direct = l2_norm(*f);
      worst = std::max(worst, std::abs(direct - spectral_l2_norm(*f)) / direct);
    }
    add("Parseval relative deviation", worst, 1e-12);
  }

  {
    const PulseProfile profile = calibrate_amplitude_for_phase(std::numbers::pi / 2.0, specs.physics.ab.profile);
    const double phi = total_flux_phi(profile);
    double worst = 0.0;
    for (double v : {4.0, 16.0})
      for (int k = -40; k <= 40; ++k) {
        const double t = 0.025 * k * profile.half_support;
        worst = std::max(worst, std::abs(phase_F_plus(t, v, profile) + phase_F_minus(t, v, profile) - phi));
      }
    add("F_plus + F_minus - Phi", worst, 1e-12);
  }

  {
    PulseProfile unit;
    unit.amplitude = 1.0;
    unit.half_support = 1.0;
    unit.shape = PulseShape::quartic_bump;
    add("Phi(quartic, A=1, L0=1) - 16/15", std::abs(total_flux_phi(unit) - 16.0 / 15.0), 1e-10);
  }
  return checks;
}

}  // namespace abe
