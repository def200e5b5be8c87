#include "remem/remote_backend.hpp"

#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <set>

#include "remem/error.hpp"

namespace remem {

using wire::Fault;
using wire::MsgType;
using wire::ProtocolError;
using wire::Status;

namespace {

void send_message(int fd, const wire::Message& msg) { net::write_all(fd, wire::encode(msg)); }

// Reads up to the end of a frame's fixed part; header + body.
std::pair<MsgType, Bytes> read_frame_prefix(int fd) {
  std::uint8_t header[wire::kHeaderSize];
  const std::size_t n = net::read_full(fd, header);
  if (n < wire::kHeaderSize) {
    throw Error(ErrorCode::ConnectionLost, "peer closed the connection");
  }
  const MsgType type = wire::decode_header(header);
  Bytes frame(header, header + wire::kHeaderSize);
  frame.resize(wire::kHeaderSize + wire::fixed_body_size(type));
  MutableByteView body(frame.data() + wire::kHeaderSize, frame.size() - wire::kHeaderSize);
  if (net::read_full(fd, body) < body.size()) {
    throw ProtocolError(Fault::Truncated, "frame body cut short");
  }
  return {type, std::move(frame)};
}

void expect_type(MsgType got, MsgType want) {
  if (got != want) {
    throw ProtocolError(Fault::UnexpectedType,
                        "expected type " + std::to_string(static_cast<int>(want)) + ", got " +
                            std::to_string(static_cast<int>(got)));
  }
}

[[noreturn]] void throw_status(Status status, const std::string& context) {
  switch (status) {
    case Status::UnknownWindow: throw Error(ErrorCode::UnknownWindow, context);
    case Status::OutOfBounds: throw Error(ErrorCode::OutOfBounds, context);
    case Status::ProtocolError:
      throw ProtocolError(Fault::UnexpectedType, context + ": server reported a protocol error");
    case Status::Ok: break;
  }
  throw ProtocolError(Fault::BadStatus, context);
}

}  // namespace

wire::Message read_message(int fd) {
  auto [type, frame] = read_frame_prefix(fd);
  std::uint64_t tail = 0;
  if (type == MsgType::ReadResp) {
    tail = wire::get_u64(frame.data() + wire::kHeaderSize + 1);
  } else if (type == MsgType::ListResp) {
    const std::uint64_t count = wire::get_u64(frame.data() + wire::kHeaderSize + 1);
    if (count > wire::kMaxListEntries) {
      throw ProtocolError(Fault::LengthMismatch, "LIST_RESP count " + std::to_string(count));
    }
    tail = count * 16;
  }
  if (tail > 0) {
    const std::size_t head = frame.size();
    frame.resize(head + tail);
    if (net::read_full(fd, MutableByteView(frame.data() + head, tail)) < tail) {
      throw ProtocolError(Fault::Truncated, "frame tail cut short");
    }
  }
  return wire::decode(frame);
}

// ---------------------------------------------------------------------------
// Server

std::unique_ptr<WindowServer> WindowServer::serve(const net::Endpoint& bind,
                                                  std::vector<Exposure> exposures) {
  std::unique_ptr<WindowServer> server(new WindowServer());
  std::set<std::uint64_t> taken;
  for (const auto& e : exposures) {
    if (!e.requested_id) continue;
    if (e.requested_id->value == 0) throw Error(ErrorCode::BadValue, "window id 0 is reserved");
    if (!taken.insert(e.requested_id->value).second) {
      throw Error(ErrorCode::DuplicateWindowId, "window " + std::to_string(e.requested_id->value));
    }
  }
  std::uint64_t next = 1;
  for (const auto& e : exposures) {
    std::uint64_t id = 0;
    if (e.requested_id) {
      id = e.requested_id->value;
    } else {
      while (taken.contains(next)) ++next;
      id = next;
      taken.insert(id);
    }
    server->windows_.emplace(id, e.region);
  }

  server->listen_fd_ = net::listen_tcp(bind);
  server->endpoint_ = bind;
  server->endpoint_.port = net::local_port(server->listen_fd_.get());

  int pipe_fds[2];
  if (::pipe2(pipe_fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::BindError, std::string("pipe: ") + std::strerror(errno));
  }
  server->wake_read_.reset(pipe_fds[0]);
  server->wake_write_.reset(pipe_fds[1]);
  server->acceptor_ = std::thread([s = server.get()] { s->accept_loop(); });
  return server;
}

WindowServer::~WindowServer() { shutdown(); }

std::vector<wire::WindowInfo> WindowServer::windows() const {
  std::vector<wire::WindowInfo> out;
  out.reserve(windows_.size());
  for (const auto& [id, region] : windows_) out.push_back({id, region.size()});
  return out;
}

std::size_t WindowServer::active_connections() const {
  std::lock_guard lock(conn_mutex_);
  std::size_t n = 0;
  for (const auto& c : connections_) n += c.done.load() ? 0 : 1;
  return n;
}

void WindowServer::shutdown() {
  if (stopping_.exchange(true)) return;
  if (wake_write_) {
    const char byte = 'x';
    [[maybe_unused]] auto rc = ::write(wake_write_.get(), &byte, 1);
  }
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conn_mutex_);
    // Unblocks idle readers; a request already read still gets its reply.
    for (auto& c : connections_) ::shutdown(c.fd.get(), SHUT_RD);
  }
  reap_finished(true);
  listen_fd_.reset();
}

void WindowServer::reap_finished(bool all) {
  std::lock_guard lock(conn_mutex_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    if (all || it->done.load()) {
      if (it->thread.joinable()) it->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void WindowServer::accept_loop() {
  while (!stopping_.load()) {
    pollfd fds[2] = {{listen_fd_.get(), POLLIN, 0}, {wake_read_.get(), POLLIN, 0}};
    const int rc = ::poll(fds, 2, 1000);
    if (rc < 0 && errno != EINTR) break;
    if (fds[1].revents != 0) break;
    if (rc > 0 && (fds[0].revents & POLLIN)) {
      const int client = ::accept4(listen_fd_.get(), nullptr, nullptr, SOCK_CLOEXEC);
      if (client >= 0) {
        int one = 1;
        ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        std::lock_guard lock(conn_mutex_);
        Connection& conn = connections_.emplace_back();
        conn.fd.reset(client);
        conn.thread = std::thread([this, &conn] { serve_connection(conn); });
      }
    }
    reap_finished(false);
  }
}

void WindowServer::serve_connection(Connection& conn) {
  const int fd = conn.fd.get();
  std::set<std::uint64_t> opened;
  try {
    for (;;) {
      std::uint8_t header[wire::kHeaderSize];
      const std::size_t n = net::read_full(fd, header);
      if (n == 0) break;
      std::optional<MsgType> type;
      try {
        if (n < wire::kHeaderSize) throw ProtocolError(Fault::Truncated, "short header");
        const MsgType parsed = wire::decode_header(header);
        if (!wire::is_request(parsed)) {
          throw ProtocolError(Fault::UnexpectedType, "client sent a response frame");
        }
        type = parsed;
        std::uint8_t body[24];
        const std::size_t body_len = wire::fixed_body_size(parsed);
        if (net::read_full(fd, MutableByteView(body, body_len)) < body_len) {
          throw ProtocolError(Fault::Truncated, "short body");
        }

        switch (parsed) {
          case MsgType::OpenReq: {
            const std::uint64_t id = wire::get_u64(body);
            auto it = windows_.find(id);
            if (it == windows_.end()) {
              send_message(fd, wire::OpenResp{Status::UnknownWindow, 0});
            } else {
              opened.insert(id);
              send_message(fd, wire::OpenResp{Status::Ok, it->second.size()});
            }
            break;
          }
          case MsgType::ReadReq: {
            const std::uint64_t id = wire::get_u64(body);
            const std::uint64_t offset = wire::get_u64(body + 8);
            const std::uint64_t length = wire::get_u64(body + 16);
            auto it = windows_.find(id);
            if (it == windows_.end()) {
              net::write_all(fd, wire::encode_read_resp_prefix(Status::UnknownWindow, 0));
            } else if (offset > it->second.size() || length > it->second.size() - offset) {
              net::write_all(fd, wire::encode_read_resp_prefix(Status::OutOfBounds, 0));
            } else {
              const auto prefix = wire::encode_read_resp_prefix(Status::Ok, length);
              net::write_all(fd, prefix, it->second.subspan(offset, length));
            }
            break;
          }
          case MsgType::ListReq:
            send_message(fd, wire::ListResp{Status::Ok, windows()});
            break;
          case MsgType::CloseReq: {
            const std::uint64_t id = wire::get_u64(body);
            const bool known = opened.erase(id) > 0 || windows_.contains(id);
            send_message(fd, wire::CloseResp{known ? Status::Ok : Status::UnknownWindow});
            break;
          }
          default:
            break;
        }
        requests_.fetch_add(1);
      } catch (const ProtocolError&) {
        // A bad frame ends the connection after the error reply.
        try {
          send_message(fd, wire::error_response(type, Status::ProtocolError));
        } catch (const Error&) {
        }
        break;
      }
    }
  } catch (const Error&) {
    // Peer vanished mid-request.
  }
  // The descriptor itself is closed when the acceptor reaps this connection.
  ::shutdown(fd, SHUT_RDWR);
  conn.done.store(true);
}

// ---------------------------------------------------------------------------
// Client

RemoteWindow RemoteWindow::open(const net::Endpoint& endpoint, WindowId id) {
  RemoteWindow window;
  window.endpoint_ = endpoint;
  window.id_ = id;
  window.fd_ = net::connect_tcp(endpoint);
  send_message(window.fd_.get(), wire::OpenReq{id.value});
  const wire::Message reply = read_message(window.fd_.get());
  expect_type(wire::type_of(reply), MsgType::OpenResp);
  const auto& resp = std::get<wire::OpenResp>(reply);
  if (resp.status != Status::Ok) throw_status(resp.status, "window " + std::to_string(id.value));
  window.size_ = resp.size_bytes;
  return window;
}

RemoteWindow::~RemoteWindow() {
  try {
    close();
  } catch (...) {
  }
}

void RemoteWindow::close() {
  if (!fd_) return;
  try {
    send_message(fd_.get(), wire::CloseReq{id_.value});
    read_message(fd_.get());
  } catch (const Error&) {
  }
  fd_.reset();
}

Bytes RemoteWindow::read(std::uint64_t offset, std::uint64_t len) {
  if (!fd_) throw Error(ErrorCode::WindowClosed, "window " + std::to_string(id_.value));
  check_bounds(size_, offset, len);
  Bytes out(len);
  read_into(offset, out);
  return out;
}

void RemoteWindow::read_into(std::uint64_t offset, MutableByteView dst) {
  if (!fd_) throw Error(ErrorCode::WindowClosed, "window " + std::to_string(id_.value));
  check_bounds(size_, offset, dst.size());
  std::uint64_t done = 0;
  while (done < dst.size()) {
    const std::uint64_t len = std::min<std::uint64_t>(chunk_bytes_, dst.size() - done);
    read_chunk(offset + done, dst.data() + done, len);
    done += len;
  }
}

void RemoteWindow::read_chunk(std::uint64_t offset, std::uint8_t* dst, std::uint64_t len) {
  try {
    send_message(fd_.get(), wire::ReadReq{id_.value, offset, len});
    ++round_trips_;
    std::uint8_t prefix[wire::kHeaderSize + 9];
    if (net::read_full(fd_.get(), prefix) < sizeof prefix) {
      throw Error(ErrorCode::ConnectionLost, "connection closed during READ");
    }
    expect_type(wire::decode_header(ByteView(prefix, wire::kHeaderSize)), MsgType::ReadResp);
    const std::uint8_t raw_status = prefix[wire::kHeaderSize];
    if (raw_status > static_cast<std::uint8_t>(Status::ProtocolError)) {
      throw ProtocolError(Fault::BadStatus, "status " + std::to_string(raw_status));
    }
    const auto status = static_cast<Status>(raw_status);
    const std::uint64_t payload_len = wire::get_u64(prefix + wire::kHeaderSize + 1);
    if (status != Status::Ok) {
      if (payload_len != 0) throw ProtocolError(Fault::LengthMismatch, "error reply with payload");
      throw_status(status, "READ window " + std::to_string(id_.value));
    }
    if (payload_len != len) {
      throw ProtocolError(Fault::LengthMismatch, "asked for " + std::to_string(len) + " bytes, got " +
                                                     std::to_string(payload_len));
    }
    if (net::read_full(fd_.get(), MutableByteView(dst, len)) < len) {
      throw Error(ErrorCode::ConnectionLost, "connection closed mid-payload");
    }
  } catch (const Error& e) {
    // Status-level errors leave the stream in sync; anything else does not.
    if (e.code() != ErrorCode::OutOfBounds && e.code() != ErrorCode::UnknownWindow) fd_.reset();
    throw;
  }
}

std::vector<wire::WindowInfo> list_windows(const net::Endpoint& endpoint) {
  UniqueFd fd = net::connect_tcp(endpoint);
  send_message(fd.get(), wire::ListReq{});
  const wire::Message reply = read_message(fd.get());
  expect_type(wire::type_of(reply), MsgType::ListResp);
  const auto& resp = std::get<wire::ListResp>(reply);
  if (resp.status != Status::Ok) throw_status(resp.status, "LIST");
  return resp.windows;
}

// ---------------------------------------------------------------------------
// PageStore adapter

RemoteStore::RemoteStore(net::Endpoint endpoint, std::uint64_t page_size)
    : endpoint_(std::move(endpoint)), page_size_(page_size) {
  validate_page_size(page_size);
}

AllocationId RemoteStore::attach(WindowId window) {
  RemoteWindow handle = RemoteWindow::open(endpoint_, window);
  const auto record = table_.register_allocation(handle.size(), page_size_, BackendKind::Remote);
  std::lock_guard lock(mutex_);
  slots_.emplace(record.id.value, std::make_shared<Slot>(std::move(handle)));
  return record.id;
}

AllocationId RemoteStore::allocate(std::uint64_t) {
  throw Error(ErrorCode::Unsupported, "remote windows are provisioned server-side; use attach()");
}

void RemoteStore::write(AllocationId, std::uint64_t, ByteView) {
  throw Error(ErrorCode::Unsupported, "remote windows are read-only");
}

std::shared_ptr<RemoteStore::Slot> RemoteStore::slot(AllocationId id) const {
  std::lock_guard lock(mutex_);
  auto it = slots_.find(id.value);
  if (it == slots_.end()) throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
  return it->second;
}

void RemoteStore::read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) {
  auto s = slot(id);
  std::lock_guard lock(s->mutex);
  s->window.read_into(offset, dst);
}

void RemoteStore::free(AllocationId id) {
  table_.unregister_allocation(id);
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(mutex_);
    auto it = slots_.find(id.value);
    if (it == slots_.end()) return;
    s = std::move(it->second);
    slots_.erase(it);
  }
  std::lock_guard lock(s->mutex);
  s->window.close();
}

std::uint64_t RemoteStore::size_of(AllocationId id) const { return table_.lookup(id).size_bytes; }

}  // namespace remem
