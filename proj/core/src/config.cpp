#include "abe/config.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "abe/error.hpp"

namespace abe {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Line of each "section.key" in the source text, for error messages only.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      lines.emplace(section, number);
      continue;
    }
    const auto eq = line.find('=');
    if (eq != std::string::npos) lines.emplace(section + "." + trim(line.substr(0, eq)), number);
  }
  return lines;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines) : tree_(tree), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    std::ostringstream msg;
    msg << "config";
    if (auto it = lines_.find(where); it != lines_.end()) msg << " line " << it->second;
    msg << ": " << where << ": " << what;
    throw ConfigError(msg.str());
  }

  void number(const std::string& section, const std::string& key, double& out) {
    if (auto raw = get(section, key)) {
      const std::string s = trim(*raw);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value))
        fail(section + "." + key, "expected a finite number, got '" + s + "'");
      out = value;
    }
  }

  template <typename Int>
  void integer(const std::string& section, const std::string& key, Int& out) {
    if (auto raw = get(section, key)) {
      const std::string s = trim(*raw);
      unsigned long long value = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(section + "." + key, "expected a non-negative integer, got '" + s + "'");
      out = static_cast<Int>(value);
    }
  }

  void boolean(const std::string& section, const std::string& key, bool& out) {
    if (auto raw = get(section, key)) {
      const std::string s = trim(*raw);
      if (s == "true" || s == "1" || s == "yes" || s == "on")
        out = true;
      else if (s == "false" || s == "0" || s == "no" || s == "off")
        out = false;
      else
        fail(section + "." + key, "expected true or false, got '" + s + "'");
    }
  }

  void list(const std::string& section, const std::string& key, std::vector<double>& out) {
    if (auto raw = get(section, key)) {
      std::vector<double> values;
      std::string item;
      std::istringstream in(*raw);
      while (std::getline(in, item, ',')) {
        item = trim(item);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(value))
          fail(section + "." + key, "expected a comma separated list of numbers, got '" + item + "'");
        values.push_back(value);
      }
      out = std::move(values);
    }
  }

  template <typename Fn>
  void text(const std::string& section, const std::string& key, Fn&& apply) {
    if (auto raw = get(section, key)) {
      try {
        apply(trim(*raw));
      } catch (const ConfigError& e) {
        fail(section + "." + key, e.what());
      }
    }
  }

  // Rejects sections and keys that no reader asked for.
  void check_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) fail(section, "key outside of any section");
      for (const auto& [key, value] : body)
        if (!seen_.count(section + "." + key)) fail(section + "." + key, "unknown key");
    }
  }

 private:
  std::optional<std::string> get(const std::string& section, const std::string& key) {
    seen_.insert({section + "." + key, 0});
    auto child = tree_.get_child_optional(pt::ptree::path_type(section + "\x1f" + key, '\x1f'));
    if (!child) return std::nullopt;
    return child->data();
  }

  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  std::map<std::string, int> seen_;
};

SnapshotCadence parse_cadence(const std::string& s) {
  if (s == "none") return SnapshotCadence::none;
  if (s == "probes") return SnapshotCadence::probes;
  if (s == "final") return SnapshotCadence::final_only;
  throw ConfigError("unknown snapshot cadence '" + s + "' (none, probes, final)");
}

std::string_view to_string(SnapshotCadence c) {
  return c == SnapshotCadence::none ? "none" : (c == SnapshotCadence::probes ? "probes" : "final");
}

void read_grid(Reader& r, const std::string& section, GridSpec& grid) {
  r.number(section, "extent1", grid.extent1);
  r.number(section, "extent2", grid.extent2);
  r.integer(section, "points1", grid.points1);
  r.integer(section, "points2", grid.points2);
}

nlohmann::json grid_json(const GridSpec& g) {
  return {{"extent1", g.extent1}, {"extent2", g.extent2}, {"points1", g.points1},
          {"points2", g.points2}, {"absorber_width", g.absorber_width}, {"dx1", g.dx1()},
          {"dx2", g.dx2()}};
}

RunConfig parse_tree(const pt::ptree& tree, const std::string& text) {
  RunConfig cfg;
  Reader r(tree, key_lines(text));

  r.number("physics", "mass", cfg.mass);

  r.number("geometry", "a1", cfg.geometry.a1);
  r.number("geometry", "a2", cfg.geometry.a2);
  r.number("geometry", "length", cfg.geometry.length);
  r.number("geometry", "L1", cfg.geometry.flat_radius);
  r.number("geometry", "L0", cfg.geometry.pulse_half_support);

  read_grid(r, "grid", cfg.grid);
  r.number("grid", "absorber_width", cfg.grid.absorber_width);

  r.text("pulse", "shape", [&](const std::string& s) { cfg.pulse.profile.shape = parse_pulse_shape(s); });
  r.number("pulse", "amplitude", cfg.pulse.profile.amplitude);
  r.number("pulse", "taper_inner", cfg.pulse.taper_inner);
  r.number("pulse", "taper_outer", cfg.pulse.taper_outer);
  cfg.pulse.profile.half_support = cfg.geometry.pulse_half_support;

  r.number("background", "strength", cfg.background.strength);

  r.number("envelope", "radius", cfg.envelope_radius);
  r.text("envelope", "kind", [&](const std::string& s) { cfg.envelope_kind = parse_envelope_kind(s); });
  r.number("envelope", "normalization", cfg.envelope_normalization);

  r.number("solver", "dt", cfg.solver.dt);
  r.number("solver", "dt_factor", cfg.solver.dt_factor);
  r.text("solver", "scheme", [&](const std::string& s) {
    if (s != "strang_cn_adi") throw ConfigError("unknown scheme '" + s + "'");
  });
  r.number("solver", "cap_strength", cfg.solver.cap_strength);
  r.number("solver", "start_distance", cfg.solver.start_distance);
  r.number("solver", "stop_distance", cfg.solver.stop_distance);
  r.integer("solver", "probe_count", cfg.solver.probe_count);
  r.number("solver", "norm_tolerance", cfg.solver.norm_tolerance);
  r.text("solver", "frame", [&](const std::string& s) {
    if (s == "comoving")
      cfg.solver.comoving = true;
    else if (s == "lab")
      cfg.solver.comoving = false;
    else
      throw ConfigError("unknown frame '" + s + "' (comoving, lab)");
  });

  r.list("sweep", "velocities", cfg.sweep.velocities);
  r.text("sweep", "bg_mode", [&](const std::string& s) {
    cfg.sweep.bg_mode = parse_background_mode(s);
    std::tie(cfg.sweep.rho, cfg.sweep.mu) = default_decay(cfg.sweep.bg_mode);
  });
  r.number("sweep", "rho", cfg.sweep.rho);
  r.number("sweep", "mu", cfg.sweep.mu);
  r.number("sweep", "target_phi", cfg.sweep.target_phi);
  r.text("sweep", "resolution_tier", [&](const std::string& s) { cfg.sweep.tier = parse_tier(s); });

  r.number("single", "velocity", cfg.single.velocity);
  r.number("fringe", "velocity", cfg.fringe.velocity);
  r.integer("fringe", "theta_samples", cfg.fringe.theta_samples);

  r.list("leakage", "velocities", cfg.leakage.velocities);
  r.number("leakage", "time", cfg.leakage.time);
  read_grid(r, "leakage", cfg.leakage.grid);
  r.list("cutoff", "velocities", cfg.cutoff.velocities);
  read_grid(r, "cutoff", cfg.cutoff.grid);

  r.text("output", "directory", [&](const std::string& s) { cfg.output.directory = s; });
  r.text("output", "snapshots", [&](const std::string& s) { cfg.output.snapshots = parse_cadence(s); });
  r.boolean("output", "deterministic", cfg.output.deterministic);
  r.integer("run", "threads", cfg.threads);

  r.check_unknown();
  cfg.validate();
  return cfg;
}

}  // namespace

void RunConfig::validate() const {
  std::ostringstream msg;
  if (!(mass > 0.0)) {
    msg << "physics: m > 0 violated: m=" << mass;
    throw ConfigError(msg.str());
  }
  geometry.validate();
  grid.validate();
  leakage.grid.validate();
  cutoff.grid.validate();
  if (pulse.profile.half_support != geometry.pulse_half_support)
    throw ConfigError("pulse: half support must equal geometry L0");
  pulse.validate(geometry);
  if (!(envelope_radius > 0.0)) {
    msg << "envelope: R > 0 violated: R=" << envelope_radius;
    throw ConfigError(msg.str());
  }
  const double limit = geometry.flat_radius - geometry.pulse_half_support;
  if (!(envelope_radius < limit)) {
    msg << "envelope: R < L1 - L0 violated: " << envelope_radius << " >= " << limit;
    throw ConfigError(msg.str());
  }
  if (!(envelope_normalization > 0.0)) throw ConfigError("envelope: normalization must be positive");
  BackgroundSpec decay = background;
  decay.rho = sweep.rho;
  decay.mu = sweep.mu;
  decay.validate();
  if (background.strength < 0.0) throw ConfigError("background: strength must be non-negative");
  solver.validate(geometry, envelope_radius);
  if (!(solver.norm_tolerance > 0.0)) throw ConfigError("solver: norm_tolerance must be positive");
  sweep.validate();
  if (threads == 0) throw ConfigError("run: threads >= 1 violated");
  if (fringe.theta_samples < 4) throw ConfigError("fringe: theta_samples >= 4 violated");
  if (!(single.velocity > 1.0) || !(fringe.velocity > 1.0)) throw ConfigError("single/fringe: velocity > 1 violated");
  if (!(leakage.time > 0.0)) {
    msg << "leakage: t > 0 violated: t=" << leakage.time;
    throw ConfigError(msg.str());
  }
  if (leakage.velocities.empty() || cutoff.velocities.empty())
    throw ConfigError("leakage/cutoff: velocity lists must not be empty");

  // Resolution rules at the largest velocity the config will run.
  double v_max = std::max({sweep.velocities.back(), single.velocity, fringe.velocity});
  if (solver.dt > 0.0 && solver.dt * mass * v_max * v_max > 0.05) {
    msg << "solver: dt m v_max^2 <= 0.05 violated: " << solver.dt * mass * v_max * v_max << " > 0.05";
    throw ResolutionError(msg.str());
  }
  if (!solver.comoving) {
    const double bound = 2.0 * std::numbers::pi / (10.0 * mass * v_max);
    if (grid.dx2() > bound) {
      msg << "grid: dx2 <= 2 pi / (10 m v_max) violated: " << grid.dx2() << " > " << bound;
      throw ResolutionError(msg.str());
    }
  }
  const double cells = envelope_radius / std::max(grid.dx1(), grid.dx2());
  if (cells < 16.0) {
    msg << "grid: R spans " << cells << " cells, at least 16 required";
    throw ResolutionError(msg.str());
  }
}

RunConfig parse_config_string(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << "config line " << e.line() << ": " << e.message();
    throw ConfigError(msg.str());
  }
  return parse_tree(tree, text);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_string(text.str());
}

ExperimentSpecs to_specs(const RunConfig& cfg) {
  ExperimentSpecs specs;
  specs.grid = cfg.grid;
  specs.physics.tube = cfg.geometry;
  specs.physics.ab = cfg.pulse;
  specs.physics.background = cfg.background;
  specs.physics.background.rho = cfg.sweep.rho;
  specs.physics.background.mu = cfg.sweep.mu;
  specs.physics.background.enabled = cfg.sweep.bg_mode != BackgroundMode::off;
  specs.physics.mass = cfg.mass;
  specs.envelope_radius = cfg.envelope_radius;
  specs.envelope_kind = cfg.envelope_kind;
  specs.envelope_normalization = cfg.envelope_normalization;
  specs.solver = cfg.solver;
  specs.threads = cfg.threads;
  return specs;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["physics"] = {{"mass", cfg.mass}, {"hbar", 1.0}};
  j["geometry"] = {{"a1", cfg.geometry.a1},
                   {"a2", cfg.geometry.a2},
                   {"length", cfg.geometry.length},
                   {"L1", cfg.geometry.flat_radius},
                   {"L0", cfg.geometry.pulse_half_support}};
  j["grid"] = grid_json(cfg.grid);
  j["pulse"] = {{"shape", std::string(to_string(cfg.pulse.profile.shape))},
                {"amplitude", cfg.pulse.profile.amplitude},
                {"half_support", cfg.pulse.profile.half_support},
                {"taper_inner", cfg.pulse.taper_inner},
                {"taper_outer", cfg.pulse.taper_outer}};
  j["background"] = {{"strength", cfg.background.strength}};
  j["envelope"] = {{"radius", cfg.envelope_radius},
                   {"kind", std::string(to_string(cfg.envelope_kind))},
                   {"normalization", cfg.envelope_normalization}};
  j["solver"] = {{"dt", cfg.solver.dt},
                 {"dt_factor", cfg.solver.dt_factor},
                 {"scheme", "strang_cn_adi"},
                 {"cap_strength", cfg.solver.cap_strength},
                 {"start_distance", cfg.solver.start_distance},
                 {"stop_distance", cfg.solver.stop_distance},
                 {"probe_count", cfg.solver.probe_count},
                 {"norm_tolerance", cfg.solver.norm_tolerance},
                 {"frame", cfg.solver.comoving ? "comoving" : "lab"}};
  j["sweep"] = {{"velocities", cfg.sweep.velocities},
                {"bg_mode", std::string(to_string(cfg.sweep.bg_mode))},
                {"rho", cfg.sweep.rho},
                {"mu", cfg.sweep.mu},
                {"target_phi", cfg.sweep.target_phi},
                {"resolution_tier", std::string(to_string(cfg.sweep.tier))}};
  j["single"] = {{"velocity", cfg.single.velocity}};
  j["fringe"] = {{"velocity", cfg.fringe.velocity}, {"theta_samples", cfg.fringe.theta_samples}};
  j["leakage"] = {{"velocities", cfg.leakage.velocities}, {"time", cfg.leakage.time},
                  {"grid", grid_json(cfg.leakage.grid)}};
  j["cutoff"] = {{"velocities", cfg.cutoff.velocities}, {"grid", grid_json(cfg.cutoff.grid)}};
  j["output"] = {{"directory", cfg.output.directory.string()},
                 {"snapshots", std::string(to_string(cfg.output.snapshots))},
                 {"deterministic", cfg.output.deterministic}};
  j["run"] = {{"threads", cfg.threads}};
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  nlohmann::json j = to_json(cfg);
  // Where outputs go and how many threads run them does not change the physics.
  j.erase("output");
  j.erase("run");
  const std::string canonical = j.dump();
  boost::crc_32_type crc;
  crc.process_bytes(canonical.data(), canonical.size());
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", crc.checksum());
  return buf;
}

}  // namespace abe
