#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lwct/bytes.hpp"
#include "lwct/fdk.hpp"
#include "lwct/geometry.hpp"
#include "lwct/socket.hpp"

namespace lwct::transport {

// Wire frame: u32 LE type | u32 LE payload length | payload.
enum class FrameType : std::uint32_t {
  Hello = 1,
  ScanMeta = 2,
  ViewData = 3,
  EndScan = 4,
  Ack = 5,
  Err = 6,
  Fetch = 7,
  Result = 8,
};

inline constexpr std::size_t kFrameHeaderBytes = 8;
inline constexpr std::uint32_t kMaxPayloadBytes = 1u << 30;
inline constexpr std::uint32_t kProtocolVersion = 1;

bool is_known(FrameType type);
const char* to_string(FrameType type);

enum class ErrorCode : std::uint32_t {
  Malformed = 1,
  UnknownType = 2,
  OutOfOrder = 3,
  DuplicateView = 4,
  UnknownScan = 5,
  Incomplete = 6,
  StoreIo = 7,
  InvalidScan = 8,
  SessionFailed = 9,
  NotOwner = 10,
  ReconstructionFailed = 11,
  VersionMismatch = 12,
};

const char* to_string(ErrorCode code);

struct Frame {
  FrameType type{};
  bytes::Buffer payload;
};

bytes::Buffer encode_frame(const Frame& frame);

// Oversized payloads are reported without reading them.
struct FrameTooLarge {
  std::uint32_t type;
  std::uint32_t length;
};

struct ReadResult {
  std::optional<Frame> frame;             // empty on clean end-of-stream
  std::optional<FrameTooLarge> too_large;  // set instead of frame when length exceeds the limit
};

ReadResult read_frame(net::Socket& socket);
void write_frame(net::Socket& socket, const Frame& frame);

// ---------------------------------------------------------------------------
// Payloads

struct Hello {
  std::uint32_t version = kProtocolVersion;
  std::string scan_id;  // empty: new upload or fetch-only connection
};

enum class SessionState : std::uint32_t { Open = 1, Complete = 2, Failed = 3 };
const char* to_string(SessionState state);

// ACK to HELLO. For a resumed scan, `received` flags views the server holds.
struct HelloAck {
  std::string scan_id;
  SessionState state = SessionState::Open;
  std::vector<bool> received;
};

struct ViewData {
  std::uint32_t index = 0;
  std::span<const std::byte> record;
};

struct ErrorInfo {
  ErrorCode code{};
  std::string message;
};

struct FetchRequest {
  std::string scan_id;
  VolumeGrid grid;
  FilterWindow window = FilterWindow::None;
  FdkWeight weight = FdkWeight::Standard;
};

// ACK payloads start with the acknowledged frame type.
Frame make_ack(FrameType acked, const bytes::Buffer& body = {});
FrameType ack_target(const Frame& ack);
std::span<const std::byte> ack_body(const Frame& ack);

Frame make_hello(const Hello& hello);
Hello parse_hello(std::span<const std::byte> payload);

bytes::Buffer encode_hello_ack(const HelloAck& ack);
HelloAck parse_hello_ack(std::span<const std::byte> body);

Frame make_view_data(std::uint32_t index, std::span<const std::byte> record);
ViewData parse_view_data(std::span<const std::byte> payload);

Frame make_error(ErrorCode code, const std::string& message);
ErrorInfo parse_error(std::span<const std::byte> payload);

Frame make_fetch(const FetchRequest& request);
FetchRequest parse_fetch(std::span<const std::byte> payload);

Frame make_result(const Volume& volume);
Volume parse_result(std::span<const std::byte> payload);

}  // namespace lwct::transport
