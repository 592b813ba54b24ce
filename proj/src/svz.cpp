#include "lwct/svz.hpp"

#include <algorithm>
#include <string>

#include "lwct/bytes.hpp"
#include "lwct/error.hpp"
#include "lwct/raw_io.hpp"

namespace lwct::svz {
namespace {

constexpr char kMagic[4] = {'S', 'V', 'Z', '1'};
constexpr std::uint32_t kMaxGeometryBytes = 64u << 20;

}  // namespace

std::vector<std::byte> encode_header(const SvdScan& scan) {
  scan.validate();
  bytes::Buffer out;
  bytes::put_text(out, std::string_view(kMagic, 4));
  bytes::put_u16(out, kVersion);
  bytes::put_u32(out, static_cast<std::uint32_t>(scan.views.size()));
  bytes::put_u32(out, static_cast<std::uint32_t>(scan.geometry.rows()));
  bytes::put_u32(out, static_cast<std::uint32_t>(scan.geometry.cols()));
  bytes::put_u32(out, static_cast<std::uint32_t>(scan.rank));
  bytes::put_string(out, geometry_text(scan.geometry));
  return out;
}

std::vector<std::byte> encode_view(const SvdView& view) {
  bytes::Buffer out;
  out.reserve(view.u.size() * 4 + view.sigma.size() * 8 + view.v.size() * 4);
  for (double x : view.u) bytes::put_f32(out, static_cast<float>(x));
  for (double s : view.sigma) bytes::put_f64(out, s);
  for (double x : view.v) bytes::put_f32(out, static_cast<float>(x));
  return out;
}

std::vector<std::byte> encode(const SvdScan& scan) {
  auto out = encode_header(scan);
  for (const auto& view : scan.views) {
    auto rec = encode_view(view);
    out.insert(out.end(), rec.begin(), rec.end());
  }
  return out;
}

Layout peek_layout(std::span<const std::byte> data) {
  bytes::Reader r(data);
  if (r.text(4) != std::string_view(kMagic, 4)) throw DataError("svz: bad magic");
  const auto version = r.u16();
  if (version != kVersion) throw DataError("svz: unsupported version " + std::to_string(version));
  Layout layout;
  layout.n_views = r.u32();
  const std::size_t m = r.u32(), n = r.u32(), k = r.u32();
  r.take(r.u32());
  layout.header_bytes = r.position();
  layout.view_bytes = m * k * 4 + k * 8 + n * k * 4;
  if (data.size() != layout.header_bytes + layout.view_bytes * layout.n_views)
    throw DataError("svz: stream length does not match its header");
  return layout;
}

Header decode_header(std::span<const std::byte> data) {
  bytes::Reader r(data);
  if (r.text(4) != std::string_view(kMagic, 4)) throw DataError("svz: bad magic");
  const auto version = r.u16();
  if (version != kVersion) throw DataError("svz: unsupported version " + std::to_string(version));
  const auto n_views = r.u32();
  const auto m = r.u32();
  const auto n = r.u32();
  const auto k = r.u32();
  if (n_views == 0) throw DataError("svz: scan has no views");
  const auto geo_len = r.u32();
  if (geo_len > kMaxGeometryBytes) throw DataError("svz: geometry block too large");
  ScanGeometry geometry = parse_geometry_text(r.text(geo_len));
  if (geometry.views() != n_views || geometry.rows() != m || geometry.cols() != n)
    throw DataError("svz: header dimensions disagree with geometry block");
  if (k < 1 || k > std::min(m, n)) throw DataError("svz: rank out of range");
  return Header{n_views, m, n, k, std::move(geometry), r.position()};
}

SvdView decode_view(std::span<const std::byte> record, const Header& h) {
  if (record.size() != h.view_bytes())
    throw DataError("svz: view record has " + std::to_string(record.size()) + " bytes, expected " +
                    std::to_string(h.view_bytes()));
  bytes::Reader r(record);
  SvdView view;
  view.m = h.m;
  view.n = h.n;
  view.k = h.k;
  view.u.resize(std::size_t{h.m} * h.k);
  view.sigma.resize(h.k);
  view.v.resize(std::size_t{h.n} * h.k);
  for (auto& x : view.u) x = r.f32();
  for (auto& s : view.sigma) s = r.f64();
  for (auto& x : view.v) x = r.f32();
  view.validate();
  return view;
}

SvdScan decode(std::span<const std::byte> data) {
  Header h = decode_header(data);
  if (data.size() != h.total_bytes())
    throw DataError("svz: file has " + std::to_string(data.size()) + " bytes, expected " +
                    std::to_string(h.total_bytes()));
  SvdScan scan{h.geometry, h.k, {}};
  scan.views.reserve(h.n_views);
  for (std::size_t i = 0; i < h.n_views; ++i)
    scan.views.push_back(decode_view(data.subspan(h.header_bytes + i * h.view_bytes(), h.view_bytes()), h));
  return scan;
}

void write_file(const std::filesystem::path& path, const SvdScan& scan) {
  write_file_atomic(path, encode(scan));
}

SvdScan read_file(const std::filesystem::path& path) { return decode(read_binary_file(path)); }

}  // namespace lwct::svz
