#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "abe/experiments.hpp"

namespace abe {

enum class SnapshotCadence { none, probes, final_only };

struct OutputSection {
  std::filesystem::path directory = "out";
  SnapshotCadence snapshots = SnapshotCadence::probes;
  bool deterministic = true;
};

struct SingleSection {
  double velocity = 16.0;
};

struct FringeSection {
  double velocity = 16.0;
  std::size_t theta_samples = 720;
};

/// Free-evolution diagnostics on a larger box than the interacting runs.
struct DiagnosticSection {
  std::vector<double> velocities;
  double time = 0.0;
  GridSpec grid;
};

/// One experiment instance. Every field has a default; parse_config fills in
/// what the file specifies and validates the result as a whole.
struct RunConfig {
  TubeSpec geometry;
  GridSpec grid;
  ABPotentialSpec pulse;
  /// Only the strength is read from here; decay exponents and the on/off
  /// switch come from the sweep section.
  BackgroundSpec background{0.1, 2.0, 0.0, false};
  double envelope_radius = 2.5;
  EnvelopeKind envelope_kind = EnvelopeKind::bump_c2;
  double envelope_normalization = 1.0;
  double mass = 1.0;
  SolverParams solver;
  SweepConfig sweep;
  SingleSection single;
  FringeSection fringe;
  DiagnosticSection leakage{{4.0, 8.0, 16.0}, 20.0, GridSpec{256.0, 256.0, 2048, 2048, 0.0}};
  DiagnosticSection cutoff{{4.0, 8.0, 16.0, 32.0}, 0.0, GridSpec{64.0, 64.0, 512, 512, 0.0}};
  OutputSection output;
  unsigned threads = 1;

  /// Cross-field checks; throws ConfigError or ResolutionError naming the
  /// violated inequality.
  void validate() const;
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

ExperimentSpecs to_specs(const RunConfig& cfg);

/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& cfg);
/// CRC-32 of the canonical JSON echo, as 8 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace abe
