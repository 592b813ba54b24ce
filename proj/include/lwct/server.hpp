#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lwct/frame.hpp"
#include "lwct/socket.hpp"

namespace lwct::transport {

struct ServerConfig {
  net::Endpoint listen;
  std::filesystem::path store_dir;
  std::size_t recon_slots = 1;  // concurrent reconstructions
  int recon_workers = 0;        // OpenMP threads per reconstruction, 0 = default
  std::chrono::milliseconds io_timeout{30000};
};

struct SessionInfo {
  std::string scan_id;
  std::size_t expected_views = 0;
  std::size_t received_views = 0;
  SessionState state = SessionState::Open;
};

struct Transition {
  std::string scan_id;
  SessionState from;
  SessionState to;
};

struct ServerStats {
  std::size_t connections = 0;
  std::size_t frames_received = 0;
  std::uint64_t bytes_received = 0;
  std::size_t views_stored = 0;
  std::size_t duplicate_views = 0;
  std::size_t errors_sent = 0;
  std::size_t reconstructions = 0;
};

// Scan store and reconstruction service. Each connection is served on its
// own thread and carries at most one upload session.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  std::uint16_t port() const;
  net::Endpoint endpoint() const;
  // Closes the listener and every open connection, then joins all threads.
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

  std::vector<Transition> transitions() const;
  ServerStats stats() const;
  std::optional<SessionInfo> session(const std::string& scan_id) const;
  std::filesystem::path scan_path(const std::string& scan_id) const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace lwct::transport
