#include "abe/snapshot.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "abe/error.hpp"

namespace abe {
namespace {

constexpr std::size_t bytes_per_value = 16;

void put_le(std::uint8_t* out, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out[b] = static_cast<std::uint8_t>(bits >> (8 * b));
}

double get_le(const std::uint8_t* in) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(in[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::uint32_t crc32(const std::vector<std::uint8_t>& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::filesystem::path with_ext(std::filesystem::path p, const char* ext) { return p.replace_extension(ext); }

}  // namespace

SnapshotHeader make_header(const GridSpec& grid, double time, double velocity, const std::string& config_hash) {
  SnapshotHeader h;
  h.n1 = grid.points1;
  h.n2 = grid.points2;
  h.dx1 = grid.dx1();
  h.dx2 = grid.dx2();
  h.origin = grid.node(0, 0);
  h.extent1 = grid.extent1;
  h.extent2 = grid.extent2;
  h.time = time;
  h.velocity = velocity;
  h.config_hash = config_hash;
  return h;
}

SnapshotHeader write_snapshot(const ComplexField& field, SnapshotHeader header, const std::filesystem::path& path) {
  const GridSpec& g = field.grid();
  if (header.n1 != g.points1 || header.n2 != g.points2) throw InvariantError("snapshot: header dims differ from field");

  std::vector<std::uint8_t> bytes(field.size() * bytes_per_value);
  for (std::size_t k = 0; k < field.size(); ++k) {
    put_le(&bytes[k * bytes_per_value], field[k].real());
    put_le(&bytes[k * bytes_per_value + 8], field[k].imag());
  }
  header.checksum = crc32(bytes);

  std::ofstream bin(with_ext(path, ".bin"), std::ios::binary | std::ios::trunc);
  bin.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!bin) throw InvariantError("snapshot: cannot write " + with_ext(path, ".bin").string());

  nlohmann::ordered_json j;
  j["dims"] = {header.n1, header.n2};
  j["spacing"] = {header.dx1, header.dx2};
  j["origin"] = {header.origin.x1, header.origin.x2};
  j["extents"] = {header.extent1, header.extent2};
  j["time"] = header.time;
  j["velocity"] = header.velocity;
  j["layout"] = header.layout;
  j["checksum"] = header.checksum;
  j["config_hash"] = header.config_hash;
  std::ofstream js(with_ext(path, ".json"), std::ios::trunc);
  js << j.dump(2) << '\n';
  if (!js) throw InvariantError("snapshot: cannot write " + with_ext(path, ".json").string());
  return header;
}

std::pair<ComplexField, SnapshotHeader> read_snapshot(const std::filesystem::path& path) {
  std::ifstream js(with_ext(path, ".json"));
  if (!js) throw InvariantError("snapshot: missing header " + with_ext(path, ".json").string());
  SnapshotHeader h;
  try {
    const auto j = nlohmann::json::parse(js);
    h.n1 = j.at("dims").at(0).get<std::size_t>();
    h.n2 = j.at("dims").at(1).get<std::size_t>();
    h.dx1 = j.at("spacing").at(0).get<double>();
    h.dx2 = j.at("spacing").at(1).get<double>();
    h.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    h.extent1 = j.at("extents").at(0).get<double>();
    h.extent2 = j.at("extents").at(1).get<double>();
    h.time = j.at("time").get<double>();
    h.velocity = j.at("velocity").get<double>();
    h.layout = j.at("layout").get<std::string>();
    h.checksum = j.at("checksum").get<std::uint32_t>();
    h.config_hash = j.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvariantError(std::string("snapshot: malformed header: ") + e.what());
  }

  std::ifstream bin(with_ext(path, ".bin"), std::ios::binary);
  if (!bin) throw InvariantError("snapshot: missing payload " + with_ext(path, ".bin").string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  const std::size_t expected = h.n1 * h.n2 * bytes_per_value;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << "snapshot: dim mismatch: payload has " << bytes.size() << " bytes, header implies " << expected;
    throw InvariantError(msg.str());
  }
  if (crc32(bytes) != h.checksum) throw InvariantError("snapshot: checksum mismatch");

  GridSpec grid{h.extent1, h.extent2, h.n1, h.n2, 0.0};
  ComplexField field(grid);
  for (std::size_t k = 0; k < field.size(); ++k)
    field[k] = {get_le(&bytes[k * bytes_per_value]), get_le(&bytes[k * bytes_per_value + 8])};
  return {std::move(field), h};
}

}  // namespace abe
