#include "abe/propagators.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "abe/error.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace abe {
namespace {

double axis_symbol(double k, double dx, double mass) {
  const double s = std::sin(0.5 * k * dx);
  return 2.0 / (mass * dx * dx) * s * s;
}

// Tails of the wave function decay into subnormal range, where arithmetic is
// orders of magnitude slower. Flush them to zero for the duration of a step.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

void transpose(const Complex* src, Complex* dst, std::size_t rows, std::size_t cols) {
  constexpr std::size_t block = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += block)
    for (std::size_t c0 = 0; c0 < cols; c0 += block) {
      const std::size_t r1 = std::min(rows, r0 + block);
      const std::size_t c1 = std::min(cols, c0 + block);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
    }
}

}  // namespace

FreePropagator::FreePropagator(const GridSpec& grid, double mass, KineticSymbol symbol, double dt)
    : grid_(grid), fft_(grid), omega_(grid.size()), multiplier_(grid.size()) {
  if (!(mass > 0.0)) throw ConfigError("free propagator: mass must be positive");
  if (symbol == KineticSymbol::cayley_adi && !(dt > 0.0))
    throw ConfigError("free propagator: the cayley_adi symbol needs dt > 0");
  const auto& k1 = fft_.k1();
  const auto& k2 = fft_.k2();
  std::vector<double> w1(k1.size()), w2(k2.size());
  auto axis = [&](double k, double dx) {
    switch (symbol) {
      case KineticSymbol::continuum:
        return 0.5 * k * k / mass;
      case KineticSymbol::central_difference:
        return axis_symbol(k, dx, mass);
      case KineticSymbol::cayley_adi:
        return 4.0 * std::atan(0.25 * dt * axis_symbol(k, dx, mass)) / dt;
    }
    return 0.0;
  };
  for (std::size_t i = 0; i < k1.size(); ++i) w1[i] = axis(k1[i], grid.dx1());
  for (std::size_t j = 0; j < k2.size(); ++j) w2[j] = axis(k2[j], grid.dx2());
  for (std::size_t i = 0; i < k1.size(); ++i)
    for (std::size_t j = 0; j < k2.size(); ++j) omega_[grid.index(i, j)] = w1[i] + w2[j];
}

ComplexField FreePropagator::evolve(const ComplexField& field, double t) { return evolve_translated(field, t, 0.0); }

ComplexField FreePropagator::evolve_translated(const ComplexField& field, double t, double shift) {
  if (!(field.grid() == grid_)) throw ConfigError("free propagator: field grid differs from propagator grid");
  if (t == 0.0 && shift == 0.0) return field;
  const auto& k2 = fft_.k2();
  for (std::size_t i = 0; i < grid_.points1; ++i)
    for (std::size_t j = 0; j < grid_.points2; ++j) {
      const std::size_t k = grid_.index(i, j);
      multiplier_[k] = std::polar(1.0, -t * omega_[k] - k2[j] * shift);
    }
  ComplexField out = field;
  fft_.apply_multiplier(out, multiplier_);
  return out;
}

ComplexField free_evolve(const ComplexField& field, double t, double mass, KineticSymbol symbol, double dt) {
  if (t == 0.0) return field;
  FreePropagator prop(field.grid(), mass, symbol, dt);
  return prop.evolve(field, t);
}

double verify_boost_identity(const ComplexField& phi, double mass, double v, double t) {
  FreePropagator prop(phi.grid(), mass);
  ComplexField lhs = prop.evolve(boost(phi, mass, v), t);
  lhs = boost(lhs, mass, -v);
  ComplexField rhs = prop.evolve_translated(phi, t, v * t);
  rhs *= std::polar(1.0, -0.5 * mass * v * v * t);
  return max_abs_difference(lhs, rhs);
}

ComplexField ansatz_evolve(const ComplexField& phi_v, double t, double v, const PulseProfile& profile, double mass,
                           KineticSymbol symbol, double dt) {
  ComplexField out = free_evolve(phi_v, t, mass, symbol, dt);
  out *= std::polar(1.0, -phase_F_minus(t, v, profile));
  return out;
}

void SolverParams::validate(const TubeSpec& tube, double envelope_radius) const {
  std::ostringstream msg;
  const double clearance = tube.pulse_half_support + envelope_radius;
  if (!(start_distance > clearance)) {
    msg << "solver: Z0 > L0 + R violated: " << start_distance << " <= " << clearance;
    throw ConfigError(msg.str());
  }
  if (!(stop_distance > clearance)) {
    msg << "solver: Z1 > L0 + R violated: " << stop_distance << " <= " << clearance;
    throw ConfigError(msg.str());
  }
  if (!(dt_factor > 0.0 && dt_factor <= 0.05)) {
    msg << "solver: dt m v^2 <= 0.05 violated: dt_factor=" << dt_factor;
    throw ConfigError(msg.str());
  }
  if (dt < 0.0) throw ConfigError("solver: dt must be non-negative");
  if (cap_strength < 0.0) throw ConfigError("solver: cap_strength must be non-negative");
  if (probe_count < 2) throw ConfigError("solver: probe_count >= 2 violated");
}

InteractingPropagator::InteractingPropagator(const GridSpec& grid, PhysicsSpecs physics, double velocity,
                                             double frame_velocity, double dt, double cap_strength)
    : grid_(grid),
      physics_(std::move(physics)),
      velocity_(velocity),
      frame_velocity_(frame_velocity),
      dt_(dt),
      cap_strength_(cap_strength),
      absorber_(absorber_profile(grid, cap_strength)),
      wall_column_(grid.points1, 0),
      tube_row_(grid.points2, 0),
      transposed_(grid.size()) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw SolverError("interacting propagator: dt must be positive and finite");
  const double m = physics_.mass;
  solver1_ = CayleyLineSolver(grid.points1, dt / (8.0 * m * grid.dx1() * grid.dx1()));
  solver2_ = CayleyLineSolver(grid.points2, dt / (8.0 * m * grid.dx2() * grid.dx2()));
  if (physics_.obstacle) {
    for (std::size_t i = 0; i < grid.points1; ++i) {
      const double r = std::abs(grid.x1(i));
      wall_column_[i] = (r >= physics_.tube.a1 && r <= physics_.tube.a2) ? 1 : 0;
    }
  }
}

DomainMasks InteractingPropagator::masks_at(double t) const {
  if (physics_.obstacle) return build_comoving_masks(grid_, physics_.tube, cap_strength_, frame_velocity_ * t);
  DomainMasks masks;
  masks.obstacle.assign(grid_.size(), 0);
  masks.absorber = absorber_;
  return masks;
}

void InteractingPropagator::update_rows(double tm) {
  const double shift = frame_velocity_ * tm;
  const double half = 0.5 * physics_.tube.length;
  for (std::size_t j = 0; j < grid_.points2; ++j) tube_row_[j] = std::abs(grid_.x2(j) + shift) <= half ? 1 : 0;
}

InteractingPropagator::PhaseKind InteractingPropagator::prepare_phase(double tm) {
  const double half_dt = 0.5 * dt_;
  const double c = uniform_ ? uniform_(tm) : 0.0;
  const double pulse = velocity_ * eval_Q0(physics_.ab.profile, velocity_ * tm);
  const BackgroundSpec& bg = physics_.background;
  const bool background = bg.enabled && bg.strength != 0.0;
  const bool absorbing = cap_strength_ > 0.0 && grid_.absorber_width > 0.0;

  if (pulse == 0.0 && !background && !absorbing) {
    scalar_phase_ = std::polar(1.0, -c * half_dt);
    return c != 0.0 ? PhaseKind::scalar : PhaseKind::none;
  }

  factor_.resize(grid_.size());
  const double shift = frame_velocity_ * tm;
  const double time_factor = background ? bg.strength * std::pow(1.0 + std::abs(tm), bg.mu) : 0.0;
  const double reach = physics_.ab.taper_outer;
  for (std::size_t i = 0; i < grid_.points1; ++i) {
    const double x1 = grid_.x1(i);
    Complex* row = factor_.data() + i * grid_.points2;
    const double* damp = absorber_.data() + i * grid_.points2;
    for (std::size_t j = 0; j < grid_.points2; ++j) {
      const Point x{x1, grid_.x2(j) + shift};
      double value = c;
      if (pulse != 0.0 && std::abs(x.x2) < reach && is_inside_K0(x, physics_.tube))
        value += pulse * taper_weight(physics_.ab, x);
      if (background) value += time_factor * std::exp(-bg.rho * std::log1p(std::hypot(x.x1, x.x2)));
      Complex f = std::polar(1.0, -value * half_dt);
      if (absorbing) f *= std::exp(-damp[j] * half_dt);
      row[j] = f;
    }
  }
  return PhaseKind::field;
}

void InteractingPropagator::apply_phase(ComplexField& psi, PhaseKind kind) const {
  if (kind == PhaseKind::scalar) psi *= scalar_phase_;
  if (kind != PhaseKind::field) return;
  Complex* p = psi.data();
  const Complex* f = factor_.data();
  for (std::size_t k = 0; k < psi.size(); ++k) p[k] *= f[k];
}

void InteractingPropagator::sweep_x1(ComplexField& psi) {
  // Rows are x1 positions, so x1-lines are the columns of the natural layout.
  solver1_.advance_columns(psi.data(), grid_.points2, tube_row_, wall_column_);
}

void InteractingPropagator::sweep_x2_transposed() {
  solver2_.advance_columns(transposed_.data(), grid_.points1, wall_column_, tube_row_);
}

void InteractingPropagator::step(ComplexField& psi, double t) {
  if (!(psi.grid() == grid_)) throw SolverError("interacting propagator: field grid differs from propagator grid");
  const std::size_t n1 = grid_.points1;
  const std::size_t n2 = grid_.points2;
  const FlushSubnormals guard;
  const double tm = t + 0.5 * dt_;
  update_rows(tm);
  double removed = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    if (!wall_column_[i]) continue;
    Complex* row = psi.data() + i * n2;
    for (std::size_t j = 0; j < n2; ++j)
      if (tube_row_[j]) {
        removed += std::norm(row[j]);
        row[j] = 0.0;
      }
  }
  removed_mass_ += removed * grid_.cell_area();
  const PhaseKind phase = prepare_phase(tm);
  apply_phase(psi, phase);
  sweep_x1(psi);
  transpose(psi.data(), transposed_.data(), n1, n2);
  sweep_x2_transposed();
  sweep_x2_transposed();
  transpose(transposed_.data(), psi.data(), n2, n1);
  sweep_x1(psi);
  apply_phase(psi, phase);
}

TimeGrid plan_time_grid(double v, double mass, const SolverParams& params) {
  if (!(v > 0.0)) throw ConfigError("time grid: velocity must be positive");
  const double rule = params.dt_factor / (mass * v * v);
  double dt_max = rule;
  if (params.dt > 0.0) {
    if (params.dt * mass * v * v > 0.05 * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "solver: dt m v^2 <= 0.05 violated at v=" << v << ": " << params.dt * mass * v * v;
      throw ResolutionError(msg.str());
    }
    dt_max = params.dt;
  }
  TimeGrid tg;
  const double before = params.start_distance / v;
  tg.steps_before = std::max(1L, static_cast<long>(std::ceil(before / dt_max - 1e-9)));
  tg.dt = before / static_cast<double>(tg.steps_before);
  tg.steps_after = std::max(1L, std::lround(params.stop_distance / v / tg.dt));

  const long total = tg.total_steps();
  const auto count = static_cast<long>(params.probe_count);
  for (long k = 0; k < count; ++k)
    tg.probe_steps.push_back(std::lround(static_cast<double>(k) * static_cast<double>(total) /
                                         static_cast<double>(count - 1)));
  tg.probe_steps.push_back(tg.steps_before);
  std::sort(tg.probe_steps.begin(), tg.probe_steps.end());
  tg.probe_steps.erase(std::unique(tg.probe_steps.begin(), tg.probe_steps.end()), tg.probe_steps.end());
  return tg;
}

double background_phase(const BackgroundSpec& bg, double envelope_radius, double v, double t_from, double t_to) {
  if (!bg.enabled || bg.strength == 0.0 || !(t_from < t_to)) return 0.0;

  // Polar quadrature nodes for the normalized density |bump|^2 on the disc.
  using Radial = boost::math::quadrature::gauss<double, 20>;
  constexpr int angles = 32;
  struct Node {
    double y1, y2, w;
  };
  std::vector<Node> nodes;
  const auto& abscissa = Radial::abscissa();
  const auto& weights = Radial::weights();
  double total = 0.0;
  for (std::size_t k = 0; k < abscissa.size(); ++k)
    for (double sign : {-1.0, 1.0}) {
      if (abscissa[k] == 0.0 && sign < 0.0) continue;
      const double r = 0.5 * envelope_radius * (1.0 + sign * abscissa[k]);
      const double b = bump_c2_profile(r, envelope_radius);
      const double w = 0.5 * envelope_radius * weights[k] * b * b * r / angles;
      for (int a = 0; a < angles; ++a) {
        const double theta = 2.0 * std::numbers::pi * (a + 0.5) / angles;
        nodes.push_back({r * std::cos(theta), r * std::sin(theta), w});
        total += w;
      }
    }

  auto average = [&](double s) {
    double sum = 0.0;
    for (const Node& n : nodes) sum += n.w * std::pow(1.0 + std::hypot(n.y1, n.y2 + v * s), -bg.rho);
    return bg.strength * std::pow(1.0 + std::abs(s), bg.mu) * sum / total;
  };

  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double result = 0.0;
  // Split where the integrand has kinks: s = 0 and the packet passing the origin.
  std::vector<double> breaks{t_from, t_to};
  for (double b : {-envelope_radius / v, 0.0, envelope_radius / v})
    if (b > t_from && b < t_to) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) result += Rule::integrate(average, breaks[p], breaks[p + 1], 15, 1e-12);
  return result;
}

Trajectory approx_psi_v(const Envelope& phi, double v, const SolverParams& params, const PhysicsSpecs& physics,
                        const ProbeObserver& observer, bool keep_fields) {
  const TubeSpec& tube = physics.tube;
  tube.validate();
  physics.ab.validate(tube);
  if (physics.background.enabled) physics.background.validate();
  params.validate(tube, phi.radius);
  if (!lambda_vhat_clearance(tube, {0.0, 1.0}, tube.flat_radius))
    throw ConfigError("geometry: the ball of radius L1 does not have clear line of sight along e2");
  if (!(phi.radius < tube.flat_radius - tube.pulse_half_support)) {
    std::ostringstream msg;
    msg << "envelope: R < L1 - L0 violated: " << phi.radius << " >= " << tube.flat_radius - tube.pulse_half_support;
    throw ConfigError(msg.str());
  }

  const GridSpec& grid = phi.samples.grid();
  const double m = physics.mass;
  const TimeGrid tg = plan_time_grid(v, m, params);
  const double half_window = 0.5 * grid.extent2 - grid.absorber_width;
  const double reach = params.comoving ? phi.radius
                                       : std::max(params.start_distance, params.stop_distance) + phi.radius;
  if (!(reach < half_window)) {
    std::ostringstream msg;
    msg << "grid: packet reach " << reach << " exceeds the usable half window " << half_window;
    throw ResolutionError(msg.str());
  }

  Trajectory tr;
  tr.velocity = v;
  tr.dt = tg.dt;
  tr.t0 = tg.t0();
  tr.t1 = tg.t1();
  tr.comoving = params.comoving;
  tr.mass = m;
  tr.background_initial_phase = background_phase(physics.background, phi.radius, v,
                                                  -std::numeric_limits<double>::infinity(), tr.t0);
  tr.background_tail_phase = background_phase(physics.background, phi.radius, v, tr.t1,
                                              std::numeric_limits<double>::infinity());

  FreePropagator free(grid, m, KineticSymbol::cayley_adi, tg.dt);
  ComplexField psi = free.evolve(params.comoving ? phi.samples : boost(phi.samples, m, v), tr.t0);
  psi *= std::polar(1.0, -tr.background_initial_phase);

  InteractingPropagator prop(grid, physics, v, params.comoving ? v : 0.0, tg.dt, params.cap_strength);
  apply_dirichlet(psi, prop.masks_at(tr.t0 + 0.5 * tg.dt));
  const double norm0 = l2_norm(psi);

  auto record = [&](long step) {
    const double t = tg.time_at(step);
    const double norm = l2_norm(psi);
    if (!std::isfinite(norm)) throw SolverError("interacting propagator: non-finite norm");
    const double drift = std::abs(norm * norm + prop.removed_mass() - norm0 * norm0) / (norm0 * norm0);
    if (params.cap_strength == 0.0 && drift > params.norm_tolerance) {
      std::ostringstream msg;
      msg << "norm drift " << drift << " exceeds " << params.norm_tolerance << " at t=" << t;
      throw ResolutionError(msg.str());
    }
    tr.times.push_back(t);
    tr.norms.push_back(norm);
    tr.removed_mass.push_back(prop.removed_mass());
    if (keep_fields) tr.fields.push_back(psi);
    if (observer) observer(t, psi, prop.masks_at(step == 0 ? t + 0.5 * tg.dt : t - 0.5 * tg.dt));
  };

  std::size_t next_probe = 0;
  for (long step = 0;; ++step) {
    if (next_probe < tg.probe_steps.size() && tg.probe_steps[next_probe] == step) {
      record(step);
      ++next_probe;
    }
    if (step == tg.total_steps()) break;
    prop.step(psi, tg.time_at(step));
  }
  tr.final_state = std::move(psi);
  return tr;
}

ComplexField scattering_from_trajectory(const Trajectory& tr) {
  FreePropagator free(tr.final_state.grid(), tr.mass, KineticSymbol::cayley_adi, tr.dt);
  ComplexField out = free.evolve(tr.final_state, -tr.t1);
  if (!tr.comoving) out = boost(out, tr.mass, -tr.velocity);
  out *= std::polar(1.0, -tr.background_tail_phase);
  return out;
}

ComplexField scattering_apply(const Envelope& phi, double v, const SolverParams& params, const PhysicsSpecs& physics) {
  return scattering_from_trajectory(approx_psi_v(phi, v, params, physics));
}

double leakage_diagnostic(const Envelope& phi, double v, double t, double mass, const CutoffWindow& window) {
  std::ostringstream msg;
  if (!(t > 0.0)) {
    msg << "leakage: t > 0 violated: t=" << t;
    throw ConfigError(msg.str());
  }
  const double cone = v * t;
  if (!(phi.radius <= cone / 8.0)) {
    msg << "leakage: R <= v t / 8 violated: " << phi.radius << " > " << cone / 8.0;
    throw ConfigError(msg.str());
  }
  if (!(window.support_fraction < 1.0 / 8.0)) {
    msg << "leakage: cutoff support fraction < 1/8 violated: " << window.support_fraction;
    throw ConfigError(msg.str());
  }
  const GridSpec& grid = phi.samples.grid();
  if (!(cone / 4.0 < 0.5 * std::min(grid.extent1, grid.extent2))) {
    msg << "leakage: ball radius v t / 4 = " << cone / 4.0 << " does not fit in the box";
    throw ResolutionError(msg.str());
  }
  ComplexField evolved = free_evolve(momentum_cutoff(phi.samples, v, mass, window), t, mass);
  const double radius = cone / 4.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.points1; ++i)
    for (std::size_t j = 0; j < grid.points2; ++j)
      if (std::hypot(grid.x1(i), grid.x2(j)) > radius) sum += std::norm(evolved(i, j));
  return std::sqrt(sum * grid.cell_area());
}

}  // namespace abe
