#include "abe/dispatch.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "abe/error.hpp"
#include "abe/snapshot.hpp"

namespace abe {
namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Rows are joined with commas; every number goes through fmt so that equal
// doubles always print the same bytes.
class Csv {
 public:
  Csv(const fs::path& path, std::initializer_list<std::string_view> columns) : path_(path) {
    std::string sep;
    for (auto c : columns) {
      text_ << sep << c;
      sep = ",";
    }
    text_ << '\n';
  }
  Csv& row(std::initializer_list<double> values) {
    std::string sep;
    for (double v : values) {
      text_ << sep << fmt(v);
      sep = ",";
    }
    text_ << '\n';
    return *this;
  }
  Csv& raw(const std::string& line) {
    text_ << line << '\n';
    return *this;
  }
  // Nothing is written while another exception is unwinding.
  ~Csv() noexcept(false) {
    if (std::uncaught_exceptions() > pending_) return;
    std::ofstream out(path_, std::ios::trunc);
    out << text_.str();
    if (!out) throw InvariantError("cannot write " + path_.string());
  }

 private:
  fs::path path_;
  std::ostringstream text_;
  int pending_ = std::uncaught_exceptions();
};

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw InvariantError("cannot write " + path.string());
}

nlohmann::ordered_json fit_json(const RateFit& f) {
  if (std::isnan(f.slope)) return nullptr;
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"half_width", f.half_width}};
}

std::string error_model(double rho) {
  if (rho < 1.0) return "v^-rho";
  if (rho == 1.0) return "|ln v|/v";
  return "1/v";
}

// Constants shared by every manifest.
nlohmann::ordered_json base_manifest(Subcommand sub, const RunConfig& cfg, const ExperimentSpecs& resolved) {
  const PulseProfile& profile = resolved.physics.ab.profile;
  const double rho = cfg.sweep.bg_mode == BackgroundMode::off ? 2.0 : cfg.sweep.rho;
  nlohmann::ordered_json j;
  j["subcommand"] = std::string(to_string(sub));
  j["config_hash"] = config_hash(cfg);
  j["config"] = to_json(cfg);
  // The manifest sits in the output directory, so its path is not recorded.
  j["config"]["output"].erase("directory");
  j["constants"] = {{"mass", resolved.physics.mass},
                    {"hbar", 1.0},
                    {"pulse_amplitude", profile.amplitude},
                    {"Phi", total_flux_phi(profile)},
                    {"F_minus_0", phase_F_minus(0.0, 1.0, profile)},
                    {"F_plus_0", phase_F_plus(0.0, 1.0, profile)},
                    {"E_model", error_model(rho)},
                    {"E_model_rho", rho},
                    {"background_strength", resolved.physics.background.strength},
                    {"background_enabled", resolved.physics.background.enabled}};
  j["grid"] = {{"points1", resolved.grid.points1},
               {"points2", resolved.grid.points2},
               {"dx1", resolved.grid.dx1()},
               {"dx2", resolved.grid.dx2()},
               {"dt_factor", resolved.solver.dt_factor}};
  return j;
}

int run_sweep(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ExperimentSpecs specs = to_specs(cfg);
  const ExperimentSpecs resolved = resolve_specs(cfg.sweep, specs);
  log << "sweep: " << cfg.sweep.velocities.size() << " velocities, bg_mode " << to_string(cfg.sweep.bg_mode)
      << ", tier " << to_string(cfg.sweep.tier) << '\n';
  const ErrorCurve curve = uniform_error_curve(cfg.sweep, specs);

  {
    Csv csv(out / "curves.csv", {"v_requested", "v_actual", "sup_error", "floor", "model_E", "phase_error", "runtime_s"});
    for (const auto& p : curve.points)
      csv.row({p.v_requested, p.v_actual, p.sup_error, p.floor, p.model_E, p.phase_error, p.runtime_s});
  }
  {
    Csv csv(out / "probes.csv", {"v", "t", "error", "floor"});
    for (const auto& p : curve.points)
      for (const auto& q : p.probes) csv.row({p.v_actual, q.t, q.error, q.floor});
  }

  const double band = 0.3;
  const double norm = cfg.envelope_normalization;
  const VelocityResult& top = curve.points.back();
  const bool slope_ok = curve.fit && std::abs(curve.fit->slope - curve.model_exponent) <= band;
  const bool floors_ok = curve.points_above_floor == curve.points.size();
  const bool top_floor_ok = top.floor <= 1e-3 * norm;
  const bool d_ok = !std::isnan(curve.scattering_fit.slope) &&
                    std::abs(curve.scattering_fit.slope - curve.model_exponent) <= band;
  const bool phase_ok = top.phase_error <= 0.05;

  auto j = base_manifest(Subcommand::sweep, cfg, resolved);
  j["h2_norm"] = curve.h2_norm;
  j["model_exponent"] = curve.model_exponent;
  j["points_above_floor"] = curve.points_above_floor;
  j["conclusive"] = curve.conclusive();
  j["slope"] = curve.fit ? nlohmann::ordered_json(curve.fit->slope) : nlohmann::ordered_json(nullptr);
  j["fit"] = curve.fit ? fit_json(*curve.fit) : nlohmann::ordered_json(nullptr);
  j["fit_all_points"] = fit_json(curve.fit_all);
  j["wave_operator_fit"] = fit_json(curve.wave_fit);
  j["scattering_fit"] = fit_json(curve.scattering_fit);
  j["c_fit"] = curve.c_fit;
  j["monotone"] = curve.monotone;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const auto& p : curve.points)
    points.push_back({{"v", p.v_actual},
                      {"sup_error", p.sup_error},
                      {"floor", p.floor},
                      {"above_floor", p.above_floor},
                      {"wave_error", p.wave_error},
                      {"wave_floor", p.wave_floor},
                      {"scattering_distance", p.scattering_distance},
                      {"scattering_floor", p.scattering_floor},
                      {"scattering_phase", p.scattering_phase}});
  j["points"] = points;
  j["bands"] = {{"slope_within_0.3_of_model", slope_ok},
                {"every_point_above_5x_floor", floors_ok},
                {"top_velocity_floor_below_1e-3_norm", top_floor_ok},
                {"scattering_slope_within_0.3_of_model", d_ok},
                {"top_velocity_phase_error_below_0.05", phase_ok}};
  write_json(out / "manifest.json", j);

  for (const auto& p : curve.points)
    log << "  v=" << fmt(p.v_actual) << " sup=" << p.sup_error << " floor=" << p.floor
        << (p.above_floor ? "" : "  (below 5x floor)") << '\n';
  if (curve.fit)
    log << "  slope " << curve.fit->slope << " +- " << curve.fit->half_width << '\n';
  else
    log << "  inconclusive: " << curve.points_above_floor << " points above floor, 4 required\n";
  return floors_ok ? 0 : static_cast<int>(FailureClass::resolution);
}

int run_single(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ExperimentSpecs resolved = resolve_specs(cfg.sweep, to_specs(cfg));
  const double v = commensurate_velocity(cfg.single.velocity, resolved.physics.mass, resolved.grid);
  const TimeGrid tg = plan_time_grid(v, resolved.physics.mass, resolved.solver);
  const std::string hash = config_hash(cfg);
  const fs::path snap_dir = out / "snapshots";
  if (cfg.output.snapshots != SnapshotCadence::none) fs::create_directories(snap_dir);

  std::size_t index = 0;
  auto on_probe = [&](double t, const ComplexField& psi, const DomainMasks&) {
    const std::size_t k = index++;
    if (cfg.output.snapshots == SnapshotCadence::none) return;
    if (cfg.output.snapshots == SnapshotCadence::final_only && t != tg.t1()) return;
    char name[32];
    std::snprintf(name, sizeof name, "probe_%04zu", k);
    write_snapshot(psi, make_header(psi.grid(), t, v, hash), snap_dir / name);
  };
  log << "single: v=" << fmt(v) << ", " << tg.total_steps() << " steps\n";
  const VelocityResult r = measure_velocity(cfg.single.velocity, cfg.sweep, resolved, on_probe);

  {
    Csv csv(out / "single_probes.csv", {"t", "error", "floor"});
    for (const auto& p : r.probes) csv.row({p.t, p.error, p.floor});
  }
  auto j = base_manifest(Subcommand::single, cfg, resolved);
  j["v_requested"] = r.v_requested;
  j["v_actual"] = r.v_actual;
  j["dt"] = tg.dt;
  j["t0"] = tg.t0();
  j["t1"] = tg.t1();
  j["sup_error"] = r.sup_error;
  j["floor"] = r.floor;
  j["above_floor"] = r.above_floor;
  j["snapshots"] = index;
  write_json(out / "manifest.json", j);
  log << "  sup=" << r.sup_error << " floor=" << r.floor << '\n';
  return 0;
}

int run_smatrix(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ExperimentSpecs specs = to_specs(cfg);
  const ExperimentSpecs resolved = resolve_specs(cfg.sweep, specs);
  log << "smatrix: " << cfg.sweep.velocities.size() << " velocities\n";
  const ScatteringReport report = scattering_phase_test(cfg.sweep, specs);
  {
    Csv csv(out / "smatrix.csv", {"v", "distance", "floor", "phase", "phase_error"});
    for (const auto& p : report.points) csv.row({p.v, p.distance, p.floor, p.phase, p.phase_error});
  }
  auto j = base_manifest(Subcommand::smatrix, cfg, resolved);
  j["distance_fit"] = fit_json(report.fit);
  j["expected_phase"] = -report.phi;
  write_json(out / "manifest.json", j);
  for (const auto& p : report.points)
    log << "  v=" << fmt(p.v) << " d=" << p.distance << " phase=" << p.phase << '\n';
  return 0;
}

int run_fringe(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ExperimentSpecs specs = to_specs(cfg);
  const ExperimentSpecs resolved = resolve_specs(cfg.sweep, specs);
  log << "fringe: v=" << fmt(cfg.fringe.velocity) << '\n';
  const FringeResult f = fringe_experiment(cfg.sweep, specs, cfg.fringe.velocity, cfg.fringe.theta_samples);
  {
    Csv csv(out / "interferogram.csv", {"theta", "intensity"});
    for (std::size_t k = 0; k < f.theta.size(); ++k) csv.row({f.theta[k], f.intensity[k]});
  }
  auto j = base_manifest(Subcommand::fringe, cfg, resolved);
  j["v"] = f.v;
  j["theta_star"] = f.theta_star;
  j["theta_star_minus_Phi"] = std::remainder(f.theta_star - f.phi, 2.0 * std::numbers::pi);
  j["visibility"] = f.visibility;
  j["relative_phase"] = f.relative_phase;
  write_json(out / "manifest.json", j);
  log << "  theta*=" << f.theta_star << " Phi=" << f.phi << " visibility=" << f.visibility << '\n';
  return 0;
}

int run_leakage(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ExperimentSpecs resolved = resolve_specs(cfg.sweep, to_specs(cfg));
  log << "leakage: t=" << fmt(cfg.leakage.time) << '\n';
  const auto leak = leakage_table(cfg.leakage.velocities, cfg.leakage.time, cfg.envelope_radius, cfg.leakage.grid,
                                  cfg.mass);
  const auto cut = cutoff_table(cfg.cutoff.velocities, cfg.envelope_radius, cfg.cutoff.grid, cfg.mass);
  {
    Csv csv(out / "leakage.csv", {"v", "leakage", "reduction"});
    for (const auto& p : leak) csv.row({p.v, p.leakage, p.reduction});
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  {
    Csv csv(out / "cutoff.csv", {"v", "distance", "scaled"});
    for (const auto& p : cut) {
      csv.row({p.v, p.distance, p.scaled});
      lo = std::min(lo, p.scaled);
      hi = std::max(hi, p.scaled);
    }
  }
  double min_reduction = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < leak.size(); ++k) min_reduction = std::min(min_reduction, leak[k].reduction);
  auto j = base_manifest(Subcommand::leakage, cfg, resolved);
  j["min_reduction"] = leak.size() > 1 ? nlohmann::ordered_json(min_reduction) : nlohmann::ordered_json(nullptr);
  j["cutoff_ratio"] = lo > 0.0 ? nlohmann::ordered_json(hi / lo) : nlohmann::ordered_json(nullptr);
  write_json(out / "manifest.json", j);
  for (const auto& p : leak) log << "  v=" << fmt(p.v) << " leakage=" << p.leakage << " reduction=" << p.reduction << '\n';
  return 0;
}

int run_validate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ExperimentSpecs specs = to_specs(cfg);
  const auto checks = identity_suite(specs);
  bool ok = true;
  {
    Csv csv(out / "validate.csv", {"check", "value", "tolerance", "passed"});
    for (const auto& c : checks) {
      csv.raw("\"" + c.name + "\"," + fmt(c.value) + "," + fmt(c.tolerance) + "," + (c.passed ? "1" : "0"));
      log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (tol " << c.tolerance << ")\n";
      ok = ok && c.passed;
    }
  }
  auto j = base_manifest(Subcommand::validate, cfg, resolve_specs(cfg.sweep, specs));
  j["passed"] = ok;
  write_json(out / "manifest.json", j);
  return ok ? 0 : static_cast<int>(FailureClass::invariant);
}

}  // namespace

Subcommand parse_subcommand(std::string_view name) {
  if (name == "sweep") return Subcommand::sweep;
  if (name == "single") return Subcommand::single;
  if (name == "smatrix") return Subcommand::smatrix;
  if (name == "fringe") return Subcommand::fringe;
  if (name == "leakage") return Subcommand::leakage;
  if (name == "validate") return Subcommand::validate;
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

std::string_view to_string(Subcommand sub) {
  switch (sub) {
    case Subcommand::sweep:
      return "sweep";
    case Subcommand::single:
      return "single";
    case Subcommand::smatrix:
      return "smatrix";
    case Subcommand::fringe:
      return "fringe";
    case Subcommand::leakage:
      return "leakage";
    case Subcommand::validate:
      return "validate";
  }
  return "sweep";
}

int dispatch(Subcommand sub, const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path out = cfg.output.directory;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("output: cannot create '" + out.string() + "': " + ec.message());
  switch (sub) {
    case Subcommand::sweep:
      return run_sweep(cfg, out, log);
    case Subcommand::single:
      return run_single(cfg, out, log);
    case Subcommand::smatrix:
      return run_smatrix(cfg, out, log);
    case Subcommand::fringe:
      return run_fringe(cfg, out, log);
    case Subcommand::leakage:
      return run_leakage(cfg, out, log);
    case Subcommand::validate:
      return run_validate(cfg, out, log);
  }
  return 0;
}

}  // namespace abe
