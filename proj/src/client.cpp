#include "lwct/client.hpp"

#include <thread>

#include "lwct/error.hpp"
#include "lwct/svz.hpp"

namespace lwct::transport {
namespace {

class Channel {
 public:
  Channel(const net::Endpoint& ep, std::chrono::milliseconds timeout)
      : sock_(net::Socket::connect(ep, timeout)) {
    sock_.set_timeout(timeout);
  }

  void send(const Frame& f) {
    write_frame(sock_, f);
    ++frames_;
    bytes_ += kFrameHeaderBytes + f.payload.size();
  }

  // Next frame, with ERR turned into a protocol error.
  Frame receive() {
    ReadResult rr = read_frame(sock_);
    if (rr.too_large) throw TransportError(TransportError::Kind::Protocol, "oversized reply frame");
    if (!rr.frame)
      throw TransportError(TransportError::Kind::Transient, "server closed the connection");
    if (rr.frame->type == FrameType::Err) {
      const ErrorInfo e = parse_error(rr.frame->payload);
      throw TransportError(TransportError::Kind::Protocol,
                           std::string("server error ") + to_string(e.code) + ": " + e.message,
                           static_cast<unsigned>(e.code));
    }
    return std::move(*rr.frame);
  }

  std::span<const std::byte> expect_ack(Frame& f, FrameType acked) {
    if (f.type != FrameType::Ack || ack_target(f) != acked)
      throw TransportError(TransportError::Kind::Protocol,
                           std::string("expected ACK of ") + to_string(acked));
    return ack_body(f);
  }

  void drop() { sock_.close(); }
  std::size_t frames() const { return frames_; }
  std::uint64_t bytes() const { return bytes_; }

 private:
  net::Socket sock_;
  std::size_t frames_ = 0;
  std::uint64_t bytes_ = 0;
};

struct Interrupted {};

void attempt_upload(Channel& ch, std::span<const std::byte> data, const svz::Layout& layout,
                    const UploadOptions& options, bool first, UploadResult& out) {
  ch.send(make_hello({kProtocolVersion, out.scan_id}));
  Frame f = ch.receive();
  const HelloAck hello = parse_hello_ack(ch.expect_ack(f, FrameType::Hello));
  if (hello.state == SessionState::Failed)
    throw TransportError(TransportError::Kind::Protocol, "scan " + hello.scan_id + " has failed",
                         static_cast<unsigned>(ErrorCode::SessionFailed));
  out.scan_id = hello.scan_id;

  std::vector<bool> have = hello.received;
  if (hello.state == SessionState::Open && have.empty()) {
    ch.send(Frame{FrameType::ScanMeta,
                  bytes::Buffer(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(layout.header_bytes))});
    Frame ack = ch.receive();
    ch.expect_ack(ack, FrameType::ScanMeta);
    have.assign(layout.n_views, false);
  }
  if (hello.state == SessionState::Open && have.size() != layout.n_views)
    throw TransportError(TransportError::Kind::Protocol, "server view count disagrees with scan");

  std::size_t acked_here = 0;
  if (hello.state == SessionState::Open) {
    for (std::uint32_t i = 0; i < layout.n_views; ++i) {
      if (have[i]) continue;
      const auto record = data.subspan(layout.header_bytes + i * layout.view_bytes, layout.view_bytes);
      ch.send(make_view_data(i, record));
      ++out.views_sent;
      try {
        Frame ack = ch.receive();
        const auto body = ch.expect_ack(ack, FrameType::ViewData);
        bytes::Reader r(body);
        if (r.u32() != i) throw TransportError(TransportError::Kind::Protocol, "ACK for wrong view");
      } catch (const TransportError& e) {
        // Already stored from an earlier attempt whose ACK was lost.
        if (e.code() != static_cast<unsigned>(ErrorCode::DuplicateView)) throw;
      }
      ++out.view_acks;
      ++acked_here;
      if (first && options.interrupt_after_views > 0 && acked_here == options.interrupt_after_views) {
        ch.drop();
        throw Interrupted{};
      }
    }
  }

  ch.send(Frame{FrameType::EndScan, {}});
  Frame end = ch.receive();
  bytes::Reader r(ch.expect_ack(end, FrameType::EndScan));
  if (r.string() != out.scan_id)
    throw TransportError(TransportError::Kind::Protocol, "END_SCAN ACK for another scan");
  out.stored_bytes = r.u64();
  ++out.end_acks;
  if (out.stored_bytes != data.size())
    throw TransportError(TransportError::Kind::Protocol,
                         "server stored " + std::to_string(out.stored_bytes) + " bytes, sent " +
                             std::to_string(data.size()));
}

}  // namespace

UploadResult upload(const net::Endpoint& server, std::span<const std::byte> svz_bytes,
                    const UploadOptions& options) {
  const svz::Layout layout = svz::peek_layout(svz_bytes);
  UploadResult out;
  for (int attempt = 1;; ++attempt) {
    out.attempts = attempt;
    std::optional<Channel> ch;
    try {
      ch.emplace(server, options.timeout);
      attempt_upload(*ch, svz_bytes, layout, options, attempt == 1, out);
      out.frames_sent += ch->frames();
      out.bytes_sent += ch->bytes();
      return out;
    } catch (const Interrupted&) {
    } catch (const TransportError& e) {
      if (!e.transient() || attempt >= options.max_attempts) throw;
    }
    if (ch) {
      out.frames_sent += ch->frames();
      out.bytes_sent += ch->bytes();
    }
    std::this_thread::sleep_for(options.retry_delay);
  }
}

UploadResult upload(const net::Endpoint& server, const SvdScan& scan, const UploadOptions& options) {
  const auto data = svz::encode(scan);
  return upload(server, data, options);
}

Volume fetch(const net::Endpoint& server, const std::string& scan_id, const FetchOptions& options) {
  Channel ch(server, options.timeout);
  ch.send(make_hello({kProtocolVersion, ""}));
  Frame f = ch.receive();
  ch.expect_ack(f, FrameType::Hello);
  ch.send(make_fetch({scan_id, options.grid, options.window, options.weight}));
  Frame result = ch.receive();
  if (result.type != FrameType::Result)
    throw TransportError(TransportError::Kind::Protocol, "expected RESULT");
  return parse_result(result.payload);
}

}  // namespace lwct::transport
