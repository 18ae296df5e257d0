#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "abe/field.hpp"

namespace abe {

/// Metadata stored next to a binary field dump.
struct SnapshotHeader {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double dx1 = 0.0;
  double dx2 = 0.0;
  /// Coordinates of node (0, 0).
  Point origin;
  double extent1 = 0.0;
  double extent2 = 0.0;
  double time = 0.0;
  double velocity = 0.0;
  std::string layout = "complex128-le-row-major-x2-fastest";
  std::uint32_t checksum = 0;
  std::string config_hash;
};

/// Header fields derived from the grid; time, velocity and hash left as given.
SnapshotHeader make_header(const GridSpec& grid, double time, double velocity, const std::string& config_hash);

/// Writes <stem>.bin (payload) and <stem>.json (header). The extension of
/// `path`, if any, is ignored. Returns the header with its checksum filled in.
SnapshotHeader write_snapshot(const ComplexField& field, SnapshotHeader header, const std::filesystem::path& path);

/// Throws InvariantError on checksum or dimension mismatch.
std::pair<ComplexField, SnapshotHeader> read_snapshot(const std::filesystem::path& path);

}  // namespace abe
