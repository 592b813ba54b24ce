#include "lwct/raw_io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "lwct/bytes.hpp"
#include "lwct/error.hpp"

namespace lwct {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFormatTag = "lwct-raw 1";

bytes::Buffer encode_floats(std::span<const float> values) {
  bytes::Buffer out;
  out.reserve(values.size() * 4);
  for (float v : values) bytes::put_f32(out, v);
  return out;
}

void decode_floats(std::span<const std::byte> raw, std::span<float> out) {
  if (raw.size() != out.size() * 4)
    throw DataError("raw file size " + std::to_string(raw.size()) + " does not match header (" +
                    std::to_string(out.size() * 4) + " bytes expected)");
  bytes::Reader r(raw);
  for (auto& v : out) v = r.f32();
}

std::vector<double> parse_angle_lines(std::string_view text) {
  std::vector<double> angles;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    angles.push_back(parse_double(line, "angles_file"));
  }
  return angles;
}

void check_kind(const KeyValues& kv, std::string_view expected, const fs::path& path) {
  if (kv.get_or("format", "") != kFormatTag)
    throw DataError(path.string() + ": unsupported sidecar format");
  if (kv.get("kind") != expected)
    throw DataError(path.string() + ": expected kind=" + std::string(expected) + ", got " +
                    kv.get("kind"));
  if (kv.get_or("dtype", "float32le") != "float32le")
    throw DataError(path.string() + ": only float32le data is supported");
}

}  // namespace

fs::path sidecar_path(const fs::path& data_path) {
  return fs::path(data_path.string() + ".hdr");
}

fs::path angles_path(const fs::path& data_path) {
  return fs::path(data_path.string() + ".angles");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::byte> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> data(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size)))
    throw DataError("cannot read " + path.string());
  return data;
}

void write_file_atomic(const fs::path& path, std::span<const std::byte> data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_text_file(const fs::path& path, std::string_view text) {
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

void put_geometry(KeyValues& kv, const ScanGeometry& g, bool inline_angles) {
  kv.set("source_to_axis", g.source_to_axis());
  kv.set("rows", g.rows());
  kv.set("cols", g.cols());
  kv.set("pitch", g.pixel_pitch());
  kv.set("detector_offset_row", g.offset_row());
  kv.set("detector_offset_col", g.offset_col());
  kv.set("views", g.views());
  if (inline_angles) kv.set("angles", format_doubles(g.angles()));
}

ScanGeometry geometry_from(const KeyValues& kv, std::vector<double> angles) {
  if (kv.has("views") && kv.get_size("views") != angles.size())
    throw DataError("geometry: views=" + kv.get("views") + " but " +
                    std::to_string(angles.size()) + " angles given");
  return ScanGeometry(kv.get_double("source_to_axis"), kv.get_size("rows"), kv.get_size("cols"),
                      kv.get_double("pitch"), std::move(angles),
                      kv.get_double_or("detector_offset_row", 0.0),
                      kv.get_double_or("detector_offset_col", 0.0));
}

ScanGeometry geometry_from(const KeyValues& kv) { return geometry_from(kv, kv.get_doubles("angles")); }

std::string geometry_text(const ScanGeometry& g) {
  KeyValues kv;
  put_geometry(kv, g, true);
  return kv.str();
}

ScanGeometry parse_geometry_text(std::string_view text) {
  return geometry_from(KeyValues::parse(text));
}

void write_projections(const fs::path& path, const ProjectionStack& stack) {
  const auto& g = stack.geometry();
  KeyValues kv;
  kv.set("format", std::string(kFormatTag));
  kv.set("kind", std::string("projection"));
  kv.set("dtype", std::string("float32le"));
  kv.set("dims", std::to_string(stack.views()) + "," + std::to_string(stack.rows()) + "," +
                     std::to_string(stack.cols()));
  put_geometry(kv, g, false);
  kv.set("angles_file", angles_path(path).filename().string());

  std::string angle_lines;
  for (double a : g.angles()) angle_lines += format_double(a) + "\n";

  write_file_atomic(path, encode_floats(stack.data().flat()));
  write_text_file(angles_path(path), angle_lines);
  write_text_file(sidecar_path(path), kv.str());
}

ProjectionStack read_projections(const fs::path& path) {
  const auto kv = KeyValues::parse(read_text_file(sidecar_path(path)));
  check_kind(kv, "projection", path);
  const auto dims = kv.get_sizes("dims");
  if (dims.size() != 3) throw DataError(path.string() + ": dims needs 3 entries");

  std::vector<double> angles;
  if (kv.has("angles")) {
    angles = kv.get_doubles("angles");
  } else {
    const fs::path ref = sidecar_path(path).parent_path() / kv.get("angles_file");
    angles = parse_angle_lines(read_text_file(ref));
  }
  ScanGeometry g = geometry_from(kv, std::move(angles));
  if (dims[0] != g.views() || dims[1] != g.rows() || dims[2] != g.cols())
    throw DataError(path.string() + ": dims disagree with geometry");

  Array3<float> data(dims[0], dims[1], dims[2]);
  decode_floats(read_binary_file(path), data.flat());
  return ProjectionStack(std::move(g), std::move(data));
}

void write_volume(const fs::path& path, const Volume& volume) {
  KeyValues kv;
  kv.set("format", std::string(kFormatTag));
  kv.set("kind", std::string("volume"));
  kv.set("dtype", std::string("float32le"));
  kv.set("dims", std::to_string(volume.nx()) + "," + std::to_string(volume.ny()) + "," +
                     std::to_string(volume.nz()));
  kv.set("order", std::string("z,y,x"));
  kv.set("voxel_pitch", volume.voxel_pitch());
  write_file_atomic(path, encode_floats(volume.data().flat()));
  write_text_file(sidecar_path(path), kv.str());
}

Volume read_volume(const fs::path& path) {
  const auto kv = KeyValues::parse(read_text_file(sidecar_path(path)));
  check_kind(kv, "volume", path);
  const auto dims = kv.get_sizes("dims");
  if (dims.size() != 3) throw DataError(path.string() + ": dims needs 3 entries");
  VolumeGrid grid{dims[0], dims[1], dims[2], kv.get_double("voxel_pitch")};
  grid.validate();
  Array3<float> data(grid.nz, grid.ny, grid.nx);
  decode_floats(read_binary_file(path), data.flat());
  return Volume(grid, std::move(data));
}

}  // namespace lwct
