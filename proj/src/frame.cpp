#include "lwct/frame.hpp"

#include <array>

#include "lwct/error.hpp"

namespace lwct::transport {

bool is_known(FrameType type) {
  const auto v = static_cast<std::uint32_t>(type);
  return v >= 1 && v <= 8;
}

const char* to_string(FrameType type) {
  switch (type) {
    case FrameType::Hello: return "HELLO";
    case FrameType::ScanMeta: return "SCAN_META";
    case FrameType::ViewData: return "VIEW_DATA";
    case FrameType::EndScan: return "END_SCAN";
    case FrameType::Ack: return "ACK";
    case FrameType::Err: return "ERR";
    case FrameType::Fetch: return "FETCH";
    case FrameType::Result: return "RESULT";
  }
  return "UNKNOWN";
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::UnknownType: return "unknown-type";
    case ErrorCode::OutOfOrder: return "out-of-order";
    case ErrorCode::DuplicateView: return "duplicate-view";
    case ErrorCode::UnknownScan: return "unknown-scan";
    case ErrorCode::Incomplete: return "incomplete";
    case ErrorCode::StoreIo: return "store-io";
    case ErrorCode::InvalidScan: return "invalid-scan";
    case ErrorCode::SessionFailed: return "session-failed";
    case ErrorCode::NotOwner: return "not-owner";
    case ErrorCode::ReconstructionFailed: return "reconstruction-failed";
    case ErrorCode::VersionMismatch: return "version-mismatch";
  }
  return "unknown";
}

const char* to_string(SessionState state) {
  switch (state) {
    case SessionState::Open: return "OPEN";
    case SessionState::Complete: return "COMPLETE";
    case SessionState::Failed: return "FAILED";
  }
  return "?";
}

bytes::Buffer encode_frame(const Frame& frame) {
  bytes::Buffer out;
  out.reserve(kFrameHeaderBytes + frame.payload.size());
  bytes::put_u32(out, static_cast<std::uint32_t>(frame.type));
  bytes::put_u32(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

ReadResult read_frame(net::Socket& socket) {
  std::array<std::byte, kFrameHeaderBytes> header{};
  if (!socket.recv_exact(header)) return {};
  bytes::Reader r(header);
  const auto type = r.u32();
  const auto length = r.u32();
  if (length > kMaxPayloadBytes) return {std::nullopt, FrameTooLarge{type, length}};
  Frame frame{static_cast<FrameType>(type), bytes::Buffer(length)};
  if (length > 0 && !socket.recv_exact(frame.payload))
    throw TransportError(TransportError::Kind::Transient, "connection closed mid-frame");
  return {std::move(frame), std::nullopt};
}

void write_frame(net::Socket& socket, const Frame& frame) {
  socket.send_all(encode_frame(frame));
}

Frame make_ack(FrameType acked, const bytes::Buffer& body) {
  Frame f{FrameType::Ack, {}};
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(acked));
  f.payload.insert(f.payload.end(), body.begin(), body.end());
  return f;
}

FrameType ack_target(const Frame& ack) {
  bytes::Reader r(ack.payload);
  return static_cast<FrameType>(r.u32());
}

std::span<const std::byte> ack_body(const Frame& ack) {
  if (ack.payload.size() < 4) throw DataError("ack: payload too short");
  return std::span<const std::byte>(ack.payload).subspan(4);
}

Frame make_hello(const Hello& hello) {
  Frame f{FrameType::Hello, {}};
  bytes::put_u32(f.payload, hello.version);
  bytes::put_string(f.payload, hello.scan_id);
  return f;
}

Hello parse_hello(std::span<const std::byte> payload) {
  bytes::Reader r(payload);
  Hello h;
  h.version = r.u32();
  h.scan_id = r.string();
  if (r.remaining() != 0) throw DataError("hello: trailing bytes");
  return h;
}

bytes::Buffer encode_hello_ack(const HelloAck& ack) {
  bytes::Buffer out;
  bytes::put_string(out, ack.scan_id);
  bytes::put_u32(out, static_cast<std::uint32_t>(ack.state));
  bytes::put_u32(out, static_cast<std::uint32_t>(ack.received.size()));
  bytes::Buffer bitmap((ack.received.size() + 7) / 8, std::byte{0});
  for (std::size_t i = 0; i < ack.received.size(); ++i)
    if (ack.received[i]) bitmap[i / 8] |= std::byte{static_cast<unsigned char>(1u << (i % 8))};
  out.insert(out.end(), bitmap.begin(), bitmap.end());
  return out;
}

HelloAck parse_hello_ack(std::span<const std::byte> body) {
  bytes::Reader r(body);
  HelloAck ack;
  ack.scan_id = r.string();
  ack.state = static_cast<SessionState>(r.u32());
  const auto n = r.u32();
  auto bitmap = r.take((std::size_t{n} + 7) / 8);
  ack.received.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ack.received[i] = (std::to_integer<unsigned>(bitmap[i / 8]) >> (i % 8)) & 1u;
  return ack;
}

Frame make_view_data(std::uint32_t index, std::span<const std::byte> record) {
  Frame f{FrameType::ViewData, {}};
  f.payload.reserve(4 + record.size());
  bytes::put_u32(f.payload, index);
  f.payload.insert(f.payload.end(), record.begin(), record.end());
  return f;
}

ViewData parse_view_data(std::span<const std::byte> payload) {
  bytes::Reader r(payload);
  ViewData v;
  v.index = r.u32();
  v.record = payload.subspan(4);
  return v;
}

Frame make_error(ErrorCode code, const std::string& message) {
  Frame f{FrameType::Err, {}};
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(code));
  bytes::put_string(f.payload, message);
  return f;
}

ErrorInfo parse_error(std::span<const std::byte> payload) {
  bytes::Reader r(payload);
  ErrorInfo e;
  e.code = static_cast<ErrorCode>(r.u32());
  e.message = r.string();
  return e;
}

Frame make_fetch(const FetchRequest& request) {
  Frame f{FrameType::Fetch, {}};
  bytes::put_string(f.payload, request.scan_id);
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(request.grid.nx));
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(request.grid.ny));
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(request.grid.nz));
  bytes::put_f64(f.payload, request.grid.voxel_pitch);
  bytes::put_u32(f.payload, request.window == FilterWindow::Hann ? 1u : 0u);
  bytes::put_u32(f.payload, request.weight == FdkWeight::Linear ? 1u : 0u);
  return f;
}

FetchRequest parse_fetch(std::span<const std::byte> payload) {
  bytes::Reader r(payload);
  FetchRequest req;
  req.scan_id = r.string();
  req.grid.nx = r.u32();
  req.grid.ny = r.u32();
  req.grid.nz = r.u32();
  req.grid.voxel_pitch = r.f64();
  const auto window = r.u32();
  const auto weight = r.u32();
  if (window > 1 || weight > 1) throw DataError("fetch: unknown reconstruction option");
  req.window = window ? FilterWindow::Hann : FilterWindow::None;
  req.weight = weight ? FdkWeight::Linear : FdkWeight::Standard;
  if (r.remaining() != 0) throw DataError("fetch: trailing bytes");
  req.grid.validate();
  return req;
}

Frame make_result(const Volume& volume) {
  Frame f{FrameType::Result, {}};
  f.payload.reserve(20 + volume.data().size() * 4);
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(volume.nx()));
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(volume.ny()));
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(volume.nz()));
  bytes::put_f64(f.payload, volume.voxel_pitch());
  for (float x : volume.data().flat()) bytes::put_f32(f.payload, x);
  return f;
}

Volume parse_result(std::span<const std::byte> payload) {
  bytes::Reader r(payload);
  VolumeGrid grid;
  grid.nx = r.u32();
  grid.ny = r.u32();
  grid.nz = r.u32();
  grid.voxel_pitch = r.f64();
  grid.validate();
  Array3<float> data(grid.nz, grid.ny, grid.nx);
  if (r.remaining() != data.size() * 4) throw DataError("result: volume payload size mismatch");
  for (auto& x : data.flat()) x = r.f32();
  return Volume(grid, std::move(data));
}

}  // namespace lwct::transport
