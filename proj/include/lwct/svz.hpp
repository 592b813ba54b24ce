#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lwct/svd_codec.hpp"

namespace lwct::svz {

// SVZ container, all integers little-endian:
//   "SVZ1" | u16 version=1 | u32 n_views | u32 m | u32 n | u32 k
//   | u32 geometry_length | geometry text (key=value, angles inline)
//   | per view: m*k f32 (U, column-major) | k f64 (sigma) | n*k f32 (V, column-major)
inline constexpr std::uint16_t kVersion = 1;

struct Header {
  std::uint32_t n_views = 0;
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  ScanGeometry geometry;
  std::size_t header_bytes = 0;  // offset of the first view record

  std::size_t view_bytes() const {
    return std::size_t{m} * k * 4 + std::size_t{k} * 8 + std::size_t{n} * k * 4;
  }
  std::size_t total_bytes() const { return header_bytes + view_bytes() * n_views; }
};

// Byte layout only, no semantic checks beyond magic and version. Lets a
// sender split a stream into header and view records without decoding it.
struct Layout {
  std::uint32_t n_views = 0;
  std::size_t header_bytes = 0;
  std::size_t view_bytes = 0;
};
Layout peek_layout(std::span<const std::byte> data);

std::vector<std::byte> encode_header(const SvdScan& scan);
std::vector<std::byte> encode_view(const SvdView& view);
std::vector<std::byte> encode(const SvdScan& scan);

// Parses and validates the header prefix of an SVZ byte stream. Throws
// DataError on a bad magic, unknown version, zero views or inconsistent sizes.
Header decode_header(std::span<const std::byte> data);
SvdView decode_view(std::span<const std::byte> record, const Header& header);
SvdScan decode(std::span<const std::byte> data);

void write_file(const std::filesystem::path& path, const SvdScan& scan);
SvdScan read_file(const std::filesystem::path& path);

}  // namespace lwct::svz
