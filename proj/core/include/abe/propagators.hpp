#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "abe/field.hpp"
#include "abe/geometry.hpp"
#include "abe/potentials.hpp"
#include "abe/spectral.hpp"
#include "abe/states.hpp"
#include "abe/tridiagonal.hpp"

namespace abe {

/// Dispersion relation used by the spectral free propagator.
///
/// continuum:  |k|^2 / 2m.
/// central_difference: the three-point Laplacian symbol.
/// cayley_adi: the effective frequency of the Cayley/ADI kinetic step with a
///   given dt, so free evolution reproduces the stepper exactly on a periodic
///   box without obstacle.
enum class KineticSymbol { continuum, central_difference, cayley_adi };

class FreePropagator {
 public:
  FreePropagator(const GridSpec& grid, double mass, KineticSymbol symbol = KineticSymbol::continuum, double dt = 0.0);

  /// exp(-i t omega(p)) field.
  ComplexField evolve(const ComplexField& field, double t);
  /// Same, with an extra translation by `shift` along x2 (spectral).
  ComplexField evolve_translated(const ComplexField& field, double t, double shift);

  double frequency(std::size_t i, std::size_t j) const { return omega_[grid_.index(i, j)]; }
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  SpectralTransform fft_;
  std::vector<double> omega_;
  std::vector<Complex> multiplier_;
};

ComplexField free_evolve(const ComplexField& field, double t, double mass,
                         KineticSymbol symbol = KineticSymbol::continuum, double dt = 0.0);

/// max |e^{-imvx} e^{-itH0} e^{imvx} phi - e^{-imv^2t/2} e^{-ip vt} e^{-itH0} phi|.
double verify_boost_identity(const ComplexField& phi, double mass, double v, double t);

/// e^{-i F_-(t)} free_evolve(phi_v, t).
ComplexField ansatz_evolve(const ComplexField& phi_v, double t, double v, const PulseProfile& profile, double mass,
                           KineticSymbol symbol = KineticSymbol::continuum, double dt = 0.0);

enum class StepScheme { strang_cn_adi };

struct SolverParams {
  /// Explicit time step; 0 selects dt_factor / (m v^2).
  double dt = 0.0;
  double dt_factor = 0.05;
  StepScheme scheme = StepScheme::strang_cn_adi;
  double cap_strength = 0.0;
  double start_distance = 8.0;  ///< Z0
  double stop_distance = 8.0;   ///< Z1
  std::size_t probe_count = 65;
  /// Allowed relative drift of ||psi||^2 + removed mass over a run without absorber.
  double norm_tolerance = 1e-8;
  /// Simulate in the window travelling with the packet (frame velocity v).
  bool comoving = true;

  void validate(const TubeSpec& tube, double envelope_radius) const;
};

/// Everything the interacting dynamics depends on besides the grid.
struct PhysicsSpecs {
  TubeSpec tube;
  ABPotentialSpec ab;
  BackgroundSpec background;
  double mass = 1.0;
  bool obstacle = true;
};

/// Strang-split Cayley/ADI propagator for i d/dt psi = (H0 + V) psi outside K.
///
/// The window moves along x2 with `frame_velocity`: node y at time t carries the
/// lab point y + frame_velocity t e2. In that frame the kinetic operator is
/// unchanged for the Galilean-transformed field, so only the obstacle and the
/// potentials move.
class InteractingPropagator {
 public:
  InteractingPropagator(const GridSpec& grid, PhysicsSpecs physics, double velocity, double frame_velocity, double dt,
                        double cap_strength = 0.0);

  /// Advances psi from t to t + dt.
  void step(ComplexField& psi, double t);

  /// Adds a spatially uniform c(t) to V.
  void set_uniform_potential(std::function<double(double)> c) { uniform_ = std::move(c); }

  DomainMasks masks_at(double t) const;
  /// Total |psi|^2 dA removed from nodes that became obstacle nodes while the
  /// window moved. Zero for a static obstacle.
  double removed_mass() const { return removed_mass_; }
  double dt() const { return dt_; }
  const GridSpec& grid() const { return grid_; }
  double velocity() const { return velocity_; }
  double frame_velocity() const { return frame_velocity_; }

 private:
  enum class PhaseKind { none, scalar, field };
  // exp(-i V(tm) dt/2 - absorber dt/2), evaluated once per step.
  PhaseKind prepare_phase(double tm);
  void apply_phase(ComplexField& psi, PhaseKind kind) const;
  void sweep_x1(ComplexField& psi);
  void sweep_x2_transposed();
  void update_rows(double tm);

  GridSpec grid_;
  PhysicsSpecs physics_;
  double velocity_;
  double frame_velocity_;
  double dt_;
  double cap_strength_;
  double removed_mass_ = 0.0;
  std::vector<double> absorber_;
  std::function<double(double)> uniform_;

  CayleyLineSolver solver1_, solver2_;
  // Columns with a wall in x1, and rows inside the tube extent at the current time.
  std::vector<std::uint8_t> wall_column_, tube_row_;
  std::vector<Complex> factor_;
  Complex scalar_phase_{1.0, 0.0};
  std::vector<Complex> transposed_;
};

/// Step plan for one velocity: t0 = -n_before dt, t = 0 is a step boundary,
/// t1 = n_after dt.
struct TimeGrid {
  double dt = 0.0;
  long steps_before = 0;
  long steps_after = 0;
  std::vector<long> probe_steps;  ///< offsets from t0, sorted, unique

  double t0() const { return -static_cast<double>(steps_before) * dt; }
  double t1() const { return static_cast<double>(steps_after) * dt; }
  double time_at(long step) const { return t0() + static_cast<double>(step) * dt; }
  long total_steps() const { return steps_before + steps_after; }
};

TimeGrid plan_time_grid(double v, double mass, const SolverParams& params);

/// Integral over [t_from, t_to] of V0 averaged over |phi|^2 for a packet moving
/// as x + v s e2. Infinite limits are allowed. Returns 0 when V0 is disabled.
double background_phase(const BackgroundSpec& bg, double envelope_radius, double v, double t_from, double t_to);

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexField> fields;
  std::vector<double> norms;
  /// Mass removed by the moving obstacle up to each probe (see InteractingPropagator).
  std::vector<double> removed_mass;
  ComplexField final_state;
  double velocity = 0.0;
  double dt = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  bool comoving = true;
  double mass = 1.0;
  /// Background phase picked up by the free incoming packet before t0.
  double background_initial_phase = 0.0;
  /// Background phase accumulated after t1.
  double background_tail_phase = 0.0;
};

/// Called at each probe with the current time and state.
using ProbeObserver = std::function<void(double t, const ComplexField& psi, const DomainMasks& masks)>;

/// Interacting evolution of the boosted envelope from t0 = -Z0/v to t1 = Z1/v.
///
/// In the comoving frame the state carries no carrier: psi_lab(t, x) =
/// e^{imv x2 - imv^2 t/2} psi(t, x - v t e2). Without a background potential,
/// psi(t0) is the free evolution of phi (resp. phi_v in the lab frame). With a
/// background, the phase accumulated on the free incoming packet before t0 is
/// included.
Trajectory approx_psi_v(const Envelope& phi, double v, const SolverParams& params, const PhysicsSpecs& physics,
                        const ProbeObserver& observer = {}, bool keep_fields = false);

/// e^{-imvx} S phi_v, where S phi_v = e^{i t1 H0} psi(t1) with the background
/// phase after t1 applied. The carrier is removed so the result compares
/// directly against phi.
ComplexField scattering_apply(const Envelope& phi, double v, const SolverParams& params, const PhysicsSpecs& physics);
ComplexField scattering_from_trajectory(const Trajectory& trajectory);

/// ||phi~(t)|| outside the ballistic cone |x - v t e2| <= v t / 4, where phi~ is
/// the momentum-localized envelope evolved freely for time t. Requires t > 0
/// and a support radius at most v t / 8.
double leakage_diagnostic(const Envelope& phi, double v, double t, double mass, const CutoffWindow& window = {});

}  // namespace abe
