#include "lwct/server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <semaphore>
#include <thread>

#include "lwct/error.hpp"
#include "lwct/fdk.hpp"
#include "lwct/raw_io.hpp"
#include "lwct/svd_codec.hpp"
#include "lwct/svz.hpp"

namespace lwct::transport {
namespace {

struct Session {
  std::string id;
  std::mutex mu;
  SessionState state = SessionState::Open;
  std::uint64_t owner = 0;
  bool has_meta = false;
  bytes::Buffer header;
  std::size_t view_bytes = 0;
  std::vector<bytes::Buffer> views;
  std::vector<bool> received;
  std::size_t received_count = 0;
  std::uint64_t stored_size = 0;
};

bool valid_scan_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  return true;
}

// Thrown inside a connection handler: send ERR, then optionally fail the
// session and drop the connection.
struct Reject {
  ErrorCode code;
  std::string message;
  bool close = true;
  bool fail_session = true;
};

}  // namespace

struct Server::Impl {
  ServerConfig config;
  net::Listener listener;
  std::thread acceptor;
  std::counting_semaphore<1024> recon_slots;

  mutable std::mutex mu;
  std::condition_variable stopped_cv;
  bool started = false;
  bool stopped = false;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::vector<Transition> transitions;
  ServerStats stats;
  std::map<std::uint64_t, int> live;  // connection id -> fd
  std::vector<std::thread> workers;
  std::uint64_t next_conn = 1;
  std::mt19937_64 id_rng{std::random_device{}()};

  explicit Impl(ServerConfig c)
      : config(std::move(c)),
        recon_slots(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config.recon_slots, 1, 1024))) {}

  std::filesystem::path scan_path(const std::string& id) const {
    return config.store_dir / (id + ".svz");
  }

  std::shared_ptr<Session> new_session(std::uint64_t owner) {
    std::lock_guard lock(mu);
    auto s = std::make_shared<Session>();
    do {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_rng()));
      s->id = buf;
    } while (sessions.count(s->id) || std::filesystem::exists(scan_path(s->id)));
    s->owner = owner;
    sessions.emplace(s->id, s);
    return s;
  }

  std::shared_ptr<Session> find_session(const std::string& id) const {
    std::lock_guard lock(mu);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Caller holds s.mu.
  void transition(Session& s, SessionState to) {
    if (s.state != SessionState::Open) return;
    std::lock_guard lock(mu);
    transitions.push_back({s.id, s.state, to});
    s.state = to;
  }

  template <class F>
  void bump(F&& f) {
    std::lock_guard lock(mu);
    f(stats);
  }

  void accept_loop();
  void serve(std::uint64_t conn, net::Socket sock);
};

namespace {

class Connection {
 public:
  Connection(Server::Impl& server, std::uint64_t id, net::Socket& sock)
      : srv_(server), id_(id), sock_(sock) {}

  void run();
  void finish();

 private:
  void dispatch(Frame& f);
  void on_hello(const Frame& f);
  void on_scan_meta(const Frame& f);
  void on_view_data(const Frame& f);
  void on_end_scan();
  void on_fetch(const Frame& f);

  Session& owned_session();
  void send(const Frame& f) { write_frame(sock_, f); }
  void reject(const Reject& r);

  Server::Impl& srv_;
  std::uint64_t id_;
  net::Socket& sock_;
  bool hello_ = false;
  std::shared_ptr<Session> session_;
};

void Connection::run() {
  for (;;) {
    ReadResult rr = read_frame(sock_);
    if (rr.too_large) {
      reject({ErrorCode::Malformed, "frame length " + std::to_string(rr.too_large->length) +
                                        " exceeds limit"});
      return;
    }
    if (!rr.frame) return;
    srv_.bump([&](ServerStats& s) {
      ++s.frames_received;
      s.bytes_received += kFrameHeaderBytes + rr.frame->payload.size();
    });
    try {
      dispatch(*rr.frame);
    } catch (const Reject& r) {
      reject(r);
      if (r.close) return;
    } catch (const DataError& e) {
      reject({ErrorCode::Malformed, e.what()});
      return;
    }
  }
}

void Connection::reject(const Reject& r) {
  if (r.fail_session && session_) {
    std::lock_guard lock(session_->mu);
    srv_.transition(*session_, SessionState::Failed);
  }
  srv_.bump([](ServerStats& s) { ++s.errors_sent; });
  try {
    send(make_error(r.code, r.message));
  } catch (const TransportError&) {
  }
}

void Connection::dispatch(Frame& f) {
  if (!is_known(f.type))
    throw Reject{ErrorCode::UnknownType,
                 "unknown frame type " + std::to_string(static_cast<std::uint32_t>(f.type))};
  if (!hello_ && f.type != FrameType::Hello)
    throw Reject{ErrorCode::OutOfOrder, "HELLO must be the first frame"};
  switch (f.type) {
    case FrameType::Hello: return on_hello(f);
    case FrameType::ScanMeta: return on_scan_meta(f);
    case FrameType::ViewData: return on_view_data(f);
    case FrameType::EndScan: return on_end_scan();
    case FrameType::Fetch: return on_fetch(f);
    default:
      throw Reject{ErrorCode::OutOfOrder,
                   std::string(to_string(f.type)) + " is not accepted by the server"};
  }
}

void Connection::on_hello(const Frame& f) {
  if (hello_) throw Reject{ErrorCode::OutOfOrder, "duplicate HELLO"};
  const Hello hello = parse_hello(f.payload);
  if (hello.version != kProtocolVersion)
    throw Reject{ErrorCode::VersionMismatch,
                 "protocol version " + std::to_string(hello.version) + " not supported"};
  hello_ = true;
  HelloAck ack;
  if (hello.scan_id.empty()) {
    session_ = srv_.new_session(id_);
    ack.scan_id = session_->id;
  } else {
    auto s = srv_.find_session(hello.scan_id);
    if (!s) throw Reject{ErrorCode::UnknownScan, "no session " + hello.scan_id};
    session_ = s;
    std::lock_guard lock(s->mu);
    s->owner = id_;
    ack.scan_id = s->id;
    ack.state = s->state;
    if (s->has_meta) ack.received = s->received;
  }
  send(make_ack(FrameType::Hello, encode_hello_ack(ack)));
}

Session& Connection::owned_session() {
  Session& s = *session_;
  if (s.owner != id_)
    throw Reject{ErrorCode::NotOwner, "session resumed by another connection", true, false};
  return s;
}

void Connection::on_scan_meta(const Frame& f) {
  std::lock_guard lock(session_->mu);
  Session& s = owned_session();
  if (s.has_meta) throw Reject{ErrorCode::OutOfOrder, "SCAN_META already received"};
  std::optional<svz::Header> parsed;
  try {
    parsed = svz::decode_header(f.payload);
  } catch (const DataError& e) {
    throw Reject{ErrorCode::InvalidScan, e.what()};
  }
  const svz::Header& h = *parsed;
  if (h.header_bytes != f.payload.size())
    throw Reject{ErrorCode::InvalidScan, "SCAN_META must carry exactly the SVZ header"};
  s.has_meta = true;
  s.header = f.payload;
  s.view_bytes = h.view_bytes();
  s.views.assign(h.n_views, {});
  s.received.assign(h.n_views, false);
  bytes::Buffer body;
  bytes::put_string(body, s.id);
  send(make_ack(FrameType::ScanMeta, body));
}

void Connection::on_view_data(const Frame& f) {
  std::lock_guard lock(session_->mu);
  Session& s = owned_session();
  if (!s.has_meta) throw Reject{ErrorCode::OutOfOrder, "VIEW_DATA before SCAN_META"};
  if (s.state != SessionState::Open)
    throw Reject{ErrorCode::SessionFailed, "session is not open", true, false};
  const ViewData v = parse_view_data(f.payload);
  if (v.index >= s.views.size())
    throw Reject{ErrorCode::Malformed, "view index " + std::to_string(v.index) + " out of range"};
  if (v.record.size() != s.view_bytes)
    throw Reject{ErrorCode::Malformed, "view record has " + std::to_string(v.record.size()) +
                                           " bytes, expected " + std::to_string(s.view_bytes)};
  if (s.received[v.index]) {
    srv_.bump([](ServerStats& st) { ++st.duplicate_views; });
    throw Reject{ErrorCode::DuplicateView, "view " + std::to_string(v.index) + " already received",
                 false, false};
  }
  s.views[v.index].assign(v.record.begin(), v.record.end());
  s.received[v.index] = true;
  ++s.received_count;
  srv_.bump([](ServerStats& st) { ++st.views_stored; });
  bytes::Buffer body;
  bytes::put_u32(body, v.index);
  send(make_ack(FrameType::ViewData, body));
}

void Connection::on_end_scan() {
  std::lock_guard lock(session_->mu);
  Session& s = owned_session();
  if (!s.has_meta) throw Reject{ErrorCode::OutOfOrder, "END_SCAN before SCAN_META"};
  if (s.state == SessionState::Failed)
    throw Reject{ErrorCode::SessionFailed, "session failed", true, false};
  if (s.state == SessionState::Open) {
    if (s.received_count != s.views.size())
      throw Reject{ErrorCode::Incomplete,
                   std::to_string(s.views.size() - s.received_count) + " views missing", false,
                   false};
    bytes::Buffer file = s.header;
    file.reserve(s.header.size() + s.view_bytes * s.views.size());
    for (const auto& rec : s.views) file.insert(file.end(), rec.begin(), rec.end());
    try {
      write_file_atomic(srv_.scan_path(s.id), file);
    } catch (const std::exception& e) {
      throw Reject{ErrorCode::StoreIo, std::string("store write failed: ") + e.what()};
    }
    s.stored_size = file.size();
    s.views.clear();
    s.views.shrink_to_fit();
    srv_.transition(s, SessionState::Complete);
  }
  bytes::Buffer body;
  bytes::put_string(body, s.id);
  bytes::put_u64(body, s.stored_size);
  send(make_ack(FrameType::EndScan, body));
}

void Connection::on_fetch(const Frame& f) {
  const FetchRequest req = parse_fetch(f.payload);
  bool available = false;
  if (valid_scan_id(req.scan_id)) {
    if (auto s = srv_.find_session(req.scan_id)) {
      std::lock_guard lock(s->mu);
      available = s->state == SessionState::Complete;
    } else {
      available = std::filesystem::exists(srv_.scan_path(req.scan_id));
    }
  }
  if (!available)
    throw Reject{ErrorCode::UnknownScan, "no completed scan " + req.scan_id, false, false};

  std::optional<Volume> volume;
  srv_.recon_slots.acquire();
  try {
    const SvdScan scan = svz::read_file(srv_.scan_path(req.scan_id));
    FdkOptions options{req.window, req.weight, srv_.config.recon_workers};
    volume = reconstruct(svd_decode(scan), req.grid, options);
  } catch (const std::exception& e) {
    srv_.recon_slots.release();
    throw Reject{ErrorCode::ReconstructionFailed, e.what(), false, false};
  }
  srv_.recon_slots.release();
  srv_.bump([](ServerStats& st) { ++st.reconstructions; });
  send(make_result(*volume));
}

void Connection::finish() {
  if (!session_) return;
  bool drop = false;
  {
    std::lock_guard lock(session_->mu);
    drop = !session_->has_meta && session_->state == SessionState::Open && session_->owner == id_;
  }
  if (drop) {
    std::lock_guard lock(srv_.mu);
    srv_.sessions.erase(session_->id);
  }
}

}  // namespace

void Server::Impl::accept_loop() {
  for (;;) {
    net::Socket sock;
    try {
      sock = listener.accept();
    } catch (const TransportError&) {
      continue;
    }
    if (!sock.valid()) return;
    std::lock_guard lock(mu);
    if (stopped) return;
    const std::uint64_t conn = next_conn++;
    live.emplace(conn, sock.fd());
    ++stats.connections;
    workers.emplace_back([this, conn, s = std::move(sock)]() mutable { serve(conn, std::move(s)); });
  }
}

void Server::Impl::serve(std::uint64_t conn, net::Socket sock) {
  Connection c(*this, conn, sock);
  try {
    sock.set_timeout(config.io_timeout);
    c.run();
  } catch (const TransportError&) {
  } catch (const std::exception&) {
  }
  c.finish();
  std::lock_guard lock(mu);
  live.erase(conn);
  sock.close();
}

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

void Server::start() {
  std::lock_guard lock(impl_->mu);
  if (impl_->started) throw DataError("server already started");
  std::error_code ec;
  std::filesystem::create_directories(impl_->config.store_dir, ec);
  if (!std::filesystem::is_directory(impl_->config.store_dir))
    throw DataError("store directory unavailable: " + impl_->config.store_dir.string());
  impl_->listener = net::Listener::bind(impl_->config.listen);
  impl_->started = true;
  impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

std::uint16_t Server::port() const { return impl_->listener.port(); }

net::Endpoint Server::endpoint() const {
  return {impl_->config.listen.host, impl_->listener.port()};
}

void Server::stop() {
  {
    std::lock_guard lock(impl_->mu);
    if (!impl_->started || impl_->stopped) return;
    impl_->stopped = true;
    for (const auto& [conn, fd] : impl_->live) ::shutdown(fd, SHUT_RDWR);
  }
  impl_->listener.shutdown();
  if (impl_->acceptor.joinable()) impl_->acceptor.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    workers.swap(impl_->workers);
  }
  for (auto& t : workers) t.join();
  impl_->stopped_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

std::vector<Transition> Server::transitions() const {
  std::lock_guard lock(impl_->mu);
  return impl_->transitions;
}

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->mu);
  return impl_->stats;
}

std::optional<SessionInfo> Server::session(const std::string& scan_id) const {
  auto s = impl_->find_session(scan_id);
  if (!s) return std::nullopt;
  std::lock_guard lock(s->mu);
  return SessionInfo{s->id, s->received.size(), s->received_count, s->state};
}

std::filesystem::path Server::scan_path(const std::string& scan_id) const {
  return impl_->scan_path(scan_id);
}

}  // namespace lwct::transport
