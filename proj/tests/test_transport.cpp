#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "lwct/client.hpp"
#include "lwct/error.hpp"
#include "lwct/fdk.hpp"
#include "lwct/frame.hpp"
#include "lwct/phantom.hpp"
#include "lwct/raw_io.hpp"
#include "lwct/server.hpp"
#include "lwct/simulate.hpp"
#include "lwct/svz.hpp"
#include "support.hpp"

using namespace lwct;
using namespace lwct::transport;
using namespace std::chrono_literals;

namespace {

std::map<std::string, bytes::Buffer> load_golden() {
  std::ifstream in(LWCT_GOLDEN_DIR "/frames.txt");
  REQUIRE(in);
  std::map<std::string, bytes::Buffer> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    std::string hex;
    for (char c : line.substr(colon + 1))
      if (!std::isspace(static_cast<unsigned char>(c))) hex += c;
    bytes::Buffer b;
    for (std::size_t i = 0; i < hex.size(); i += 2)
      b.push_back(static_cast<std::byte>(std::stoul(hex.substr(i, 2), nullptr, 16)));
    out[line.substr(0, colon)] = b;
  }
  return out;
}

bytes::Buffer raw(std::initializer_list<int> v) {
  bytes::Buffer b;
  for (int x : v) b.push_back(static_cast<std::byte>(x));
  return b;
}

struct Fixture {
  test::TempDir dir{"srv"};
  Server server;
  explicit Fixture(std::size_t slots = 1)
      : server(ServerConfig{{"127.0.0.1", 0}, dir / "store", slots, 1, 10000ms}) {
    server.start();
  }
  net::Endpoint ep() const { return server.endpoint(); }
};

SvdScan small_scan(std::size_t views, std::size_t k = 5) {
  const auto g = make_circular_geometry(views, 24, 20, 2.0, 300.0);
  return svd_encode(forward_project(builtin_phantom("sphere_box"), g), k);
}

// Minimal hand-driven peer.
struct RawPeer {
  net::Socket sock;
  explicit RawPeer(const net::Endpoint& ep) : sock(net::Socket::connect(ep, 5000ms)) {
    sock.set_timeout(10000ms);
  }
  void send(const Frame& f) { write_frame(sock, f); }
  std::optional<Frame> recv() { return read_frame(sock).frame; }
  std::string hello() {
    send(make_hello({}));
    auto f = recv();
    REQUIRE(f);
    REQUIRE(f->type == FrameType::Ack);
    return parse_hello_ack(ack_body(*f)).scan_id;
  }
  ErrorCode expect_error() {
    auto f = recv();
    REQUIRE(f);
    REQUIRE(f->type == FrameType::Err);
    return parse_error(f->payload).code;
  }
  void expect_ack(FrameType t) {
    auto f = recv();
    REQUIRE(f);
    if (f->type == FrameType::Err) FAIL(parse_error(f->payload).message);
    REQUIRE(f->type == FrameType::Ack);
    CHECK(ack_target(*f) == t);
  }
  bool closed() {
    try {
      return !recv().has_value();
    } catch (const TransportError&) {
      return true;  // reset instead of an orderly close
    }
  }
};

bool transitions_legal(const std::vector<Transition>& ts) {
  for (const auto& t : ts)
    if (t.from != SessionState::Open || t.to == SessionState::Open) return false;
  return true;
}

}  // namespace

TEST_CASE("frame encodings match the golden bytes") {
  const auto golden = load_golden();
  CHECK(encode_frame(make_hello({})) == golden.at("hello_new"));
  CHECK(encode_frame(make_hello({1, "abcd"})) == golden.at("hello_resume"));
  CHECK(encode_frame(make_view_data(3, raw({10, 11, 12}))) == golden.at("view_data_3"));
  CHECK(encode_frame(Frame{FrameType::EndScan, {}}) == golden.at("end_scan"));
  bytes::Buffer idx;
  bytes::put_u32(idx, 3);
  CHECK(encode_frame(make_ack(FrameType::ViewData, idx)) == golden.at("ack_view_3"));
  CHECK(encode_frame(make_error(ErrorCode::DuplicateView, "dup")) == golden.at("err_duplicate"));
  CHECK(encode_frame(make_fetch({"x", {4, 5, 6, 1.5}, FilterWindow::Hann, FdkWeight::Standard})) ==
        golden.at("fetch"));
}

TEST_CASE("payload codecs round-trip") {
  HelloAck ack{"id", SessionState::Open, {true, false, true, true, false, false, false, false, true}};
  CHECK(parse_hello_ack(encode_hello_ack(ack)).received == ack.received);
  const auto fr = parse_fetch(make_fetch({"s", {3, 4, 5, 0.5}, FilterWindow::None, FdkWeight::Linear}).payload);
  CHECK(fr.grid == VolumeGrid{3, 4, 5, 0.5});
  CHECK(fr.weight == FdkWeight::Linear);
  Volume v(VolumeGrid{2, 3, 4, 1.0});
  CHECK(parse_result(make_result(v).payload) == v);
  CHECK_THROWS_AS(parse_result(raw({1, 2, 3})), DataError);
}

TEST_CASE("upload: every view acknowledged, stored bytes identical, bandwidth bounded") {
  Fixture fx;
  const auto scan = small_scan(60);
  const auto bytes = svz::encode(scan);
  const auto r = upload(fx.ep(), bytes);
  CHECK(r.attempts == 1);
  CHECK(r.views_sent == 60);
  CHECK(r.view_acks == 60);
  CHECK(r.end_acks == 1);
  CHECK(r.stored_bytes == bytes.size());
  CHECK(read_binary_file(fx.server.scan_path(r.scan_id)) == bytes);
  CHECK(r.bytes_sent <= bytes.size() + r.frames_sent * 16);
  CHECK(r.frames_sent == 63);

  const auto info = fx.server.session(r.scan_id);
  REQUIRE(info);
  CHECK(info->state == SessionState::Complete);
  CHECK(info->received_views == 60);
  CHECK(info->expected_views == 60);
  const auto ts = fx.server.transitions();
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].to == SessionState::Complete);
}

TEST_CASE("interrupted upload resumes without duplicate views") {
  Fixture fx;
  const auto bytes = svz::encode(small_scan(60));
  UploadOptions opt;
  opt.interrupt_after_views = 25;
  opt.retry_delay = 10ms;
  const auto r = upload(fx.ep(), bytes, opt);
  CHECK(r.attempts == 2);
  CHECK(r.views_sent == 60);
  CHECK(r.view_acks == 60);
  CHECK(fx.server.stats().duplicate_views == 0);
  CHECK(fx.server.stats().views_stored == 60);
  CHECK(read_binary_file(fx.server.scan_path(r.scan_id)) == bytes);
  CHECK(transitions_legal(fx.server.transitions()));
}

TEST_CASE("fetch reconstructs the stored scan") {
  Fixture fx;
  const auto scan = small_scan(36, 6);
  const auto bytes = svz::encode(scan);
  const auto r = upload(fx.ep(), bytes);
  FetchOptions opt;
  opt.grid = {16, 16, 12, 1.5};
  opt.window = FilterWindow::Hann;
  const Volume remote = fetch(fx.ep(), r.scan_id, opt);
  const Volume local = reconstruct(svd_decode(svz::decode(bytes)), opt.grid, {FilterWindow::Hann});
  CHECK(test::relative_rmse(remote.data().flat(), local.data().flat()) <= 1e-6);

  try {
    fetch(fx.ep(), "0000000000000000", opt);
    FAIL("expected rejection");
  } catch (const TransportError& e) {
    CHECK_FALSE(e.transient());
    CHECK(e.code() == static_cast<unsigned>(ErrorCode::UnknownScan));
  }
  try {
    fetch(fx.ep(), "../etc/passwd", opt);
    FAIL("expected rejection");
  } catch (const TransportError& e) {
    CHECK(e.code() == static_cast<unsigned>(ErrorCode::UnknownScan));
  }
}

TEST_CASE("protocol order violations") {
  Fixture fx;
  SUBCASE("VIEW_DATA before SCAN_META fails the session") {
    RawPeer p(fx.ep());
    const std::string id = p.hello();
    p.send(make_view_data(0, raw({1, 2, 3, 4})));
    CHECK(p.expect_error() == ErrorCode::OutOfOrder);
    CHECK(p.closed());
    const auto info = fx.server.session(id);
    REQUIRE(info);
    CHECK(info->state == SessionState::Failed);
    const auto ts = fx.server.transitions();
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].from == SessionState::Open);
    CHECK(ts[0].to == SessionState::Failed);
  }
  SUBCASE("HELLO is required first") {
    RawPeer p(fx.ep());
    p.send(Frame{FrameType::EndScan, {}});
    CHECK(p.expect_error() == ErrorCode::OutOfOrder);
    CHECK(p.closed());
  }
  SUBCASE("unknown frame type") {
    RawPeer p(fx.ep());
    p.hello();
    p.send(Frame{static_cast<FrameType>(99), raw({0})});
    CHECK(p.expect_error() == ErrorCode::UnknownType);
  }
  SUBCASE("oversized frame length") {
    RawPeer p(fx.ep());
    p.hello();
    bytes::Buffer hdr;
    bytes::put_u32(hdr, 3);
    bytes::put_u32(hdr, 0xFFFFFFFFu);
    p.sock.send_all(hdr);
    CHECK(p.expect_error() == ErrorCode::Malformed);
  }
  SUBCASE("unsupported protocol version") {
    RawPeer p(fx.ep());
    p.send(make_hello({7, ""}));
    CHECK(p.expect_error() == ErrorCode::VersionMismatch);
  }
  CHECK(transitions_legal(fx.server.transitions()));
}

TEST_CASE("duplicate and missing views") {
  Fixture fx;
  const auto bytes = svz::encode(small_scan(4));
  const auto layout = svz::peek_layout(bytes);
  const std::span<const std::byte> all(bytes);
  auto record = [&](std::uint32_t i) {
    return all.subspan(layout.header_bytes + i * layout.view_bytes, layout.view_bytes);
  };
  RawPeer p(fx.ep());
  const std::string id = p.hello();
  p.send(Frame{FrameType::ScanMeta, bytes::Buffer(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(layout.header_bytes))});
  p.expect_ack(FrameType::ScanMeta);
  p.send(make_view_data(0, record(0)));
  p.expect_ack(FrameType::ViewData);
  p.send(make_view_data(0, record(0)));
  CHECK(p.expect_error() == ErrorCode::DuplicateView);
  p.send(Frame{FrameType::EndScan, {}});
  CHECK(p.expect_error() == ErrorCode::Incomplete);
  for (std::uint32_t i = 1; i < 4; ++i) {
    p.send(make_view_data(i, record(i)));
    p.expect_ack(FrameType::ViewData);
  }
  p.send(Frame{FrameType::EndScan, {}});
  p.expect_ack(FrameType::EndScan);
  CHECK(read_binary_file(fx.server.scan_path(id)) == bytes);
  CHECK(fx.server.session(id)->state == SessionState::Complete);

  SUBCASE("wrong record size is malformed") {
    RawPeer q(fx.ep());
    q.hello();
    q.send(Frame{FrameType::ScanMeta, bytes::Buffer(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(layout.header_bytes))});
    q.expect_ack(FrameType::ScanMeta);
    q.send(make_view_data(1, record(1).first(10)));
    CHECK(q.expect_error() == ErrorCode::Malformed);
    q.send(make_view_data(7, record(1)));
    CHECK(q.closed());
  }
}

TEST_CASE("zero-view scan is rejected at SCAN_META") {
  Fixture fx;
  auto header = svz::encode_header(small_scan(3));
  for (int i = 6; i < 10; ++i) header[static_cast<std::size_t>(i)] = std::byte{0};
  CHECK(svz::peek_layout(header).n_views == 0);
  try {
    upload(fx.ep(), header);
    FAIL("expected rejection");
  } catch (const TransportError& e) {
    CHECK_FALSE(e.transient());
    CHECK(e.code() == static_cast<unsigned>(ErrorCode::InvalidScan));
  }
  const auto ts = fx.server.transitions();
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].to == SessionState::Failed);
}

TEST_CASE("store failure is reported and fails the session") {
  Fixture fx;
  std::filesystem::remove_all(fx.dir / "store");
  std::ofstream(fx.dir / "store") << "not a directory";
  try {
    upload(fx.ep(), small_scan(3));
    FAIL("expected rejection");
  } catch (const TransportError& e) {
    CHECK(e.code() == static_cast<unsigned>(ErrorCode::StoreIo));
  }
  const auto ts = fx.server.transitions();
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].to == SessionState::Failed);
}

TEST_CASE("unreachable server is a transient failure") {
  std::uint16_t port = 0;
  {
    auto l = net::Listener::bind({"127.0.0.1", 0});
    port = l.port();
  }
  UploadOptions opt;
  opt.max_attempts = 2;
  opt.retry_delay = 1ms;
  opt.timeout = 500ms;
  try {
    upload({"127.0.0.1", port}, small_scan(2), opt);
    FAIL("expected failure");
  } catch (const TransportError& e) {
    CHECK(e.transient());
  }
}

TEST_CASE("concurrent uploads and shutdown with idle connections") {
  Fixture fx(2);
  const auto a = svz::encode(small_scan(20, 3));
  const auto b = svz::encode(small_scan(30, 4));
  UploadResult ra, rb;
  std::thread ta([&] { ra = upload(fx.ep(), a); });
  std::thread tb([&] { rb = upload(fx.ep(), b); });
  ta.join();
  tb.join();
  CHECK(ra.scan_id != rb.scan_id);
  CHECK(read_binary_file(fx.server.scan_path(ra.scan_id)) == a);
  CHECK(read_binary_file(fx.server.scan_path(rb.scan_id)) == b);

  RawPeer idle(fx.ep());
  idle.hello();
  fx.server.stop();
  CHECK(idle.closed());
  CHECK(transitions_legal(fx.server.transitions()));
}
