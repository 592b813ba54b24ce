#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "lwct/frame.hpp"
#include "lwct/socket.hpp"
#include "lwct/svd_codec.hpp"

namespace lwct::transport {

struct UploadOptions {
  int max_attempts = 5;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds retry_delay{200};
  // Test hook: drop the connection once this many views have been acknowledged
  // in the first attempt. 0 disables.
  std::size_t interrupt_after_views = 0;
};

struct UploadResult {
  std::string scan_id;
  std::uint64_t stored_bytes = 0;
  int attempts = 0;
  std::size_t views_sent = 0;  // VIEW_DATA frames over all attempts
  std::size_t view_acks = 0;
  std::size_t end_acks = 0;
  std::uint64_t bytes_sent = 0;  // frame headers plus payloads, all attempts
  std::size_t frames_sent = 0;
};

// Streams an SVZ byte stream view by view. Transient failures are retried,
// resuming the same scan_id and skipping views the server already holds.
// Server rejections throw TransportError(Protocol) carrying the ERR code.
UploadResult upload(const net::Endpoint& server, std::span<const std::byte> svz_bytes,
                    const UploadOptions& options = {});
UploadResult upload(const net::Endpoint& server, const SvdScan& scan,
                    const UploadOptions& options = {});

struct FetchOptions {
  VolumeGrid grid;
  FilterWindow window = FilterWindow::None;
  FdkWeight weight = FdkWeight::Standard;
  std::chrono::milliseconds timeout{600000};
};

Volume fetch(const net::Endpoint& server, const std::string& scan_id, const FetchOptions& options);

}  // namespace lwct::transport
