#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lwct/geometry.hpp"
#include "lwct/keyvalue.hpp"

namespace lwct {

// Raw format: a header-less array of little-endian float32 in C order,
// (view, row, col) for projections and (z, y, x) for volumes, next to a
// plain-text sidecar "<file>.hdr". Projection sidecars reference the view
// angles through "angles_file", a text file with one angle per line.
std::filesystem::path sidecar_path(const std::filesystem::path& data_path);
std::filesystem::path angles_path(const std::filesystem::path& data_path);

void write_projections(const std::filesystem::path& path, const ProjectionStack& stack);
ProjectionStack read_projections(const std::filesystem::path& path);

void write_volume(const std::filesystem::path& path, const Volume& volume);
Volume read_volume(const std::filesystem::path& path);

// Geometry as key=value records. With inline_angles the angle list is stored
// under "angles" as comma-separated values; otherwise the caller supplies
// the angles separately.
void put_geometry(KeyValues& kv, const ScanGeometry& g, bool inline_angles);
ScanGeometry geometry_from(const KeyValues& kv, std::vector<double> angles);
ScanGeometry geometry_from(const KeyValues& kv);

std::string geometry_text(const ScanGeometry& g);
ScanGeometry parse_geometry_text(std::string_view text);

// Whole-file helpers; throw DataError on I/O failure. write_file is atomic
// (temporary file then rename).
std::string read_text_file(const std::filesystem::path& path);
std::vector<std::byte> read_binary_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> data);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace lwct
