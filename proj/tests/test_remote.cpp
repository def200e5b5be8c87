#include <sys/socket.h>

#include <random>
#include <thread>

#include "doctest.h"
#include "remem/error.hpp"
#include "remem/net.hpp"
#include "remem/pattern.hpp"
#include "remem/remote_backend.hpp"
#include "wire_gen.hpp"

using namespace remem;

namespace {

const net::Endpoint kLoopback{"127.0.0.1", 0};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

struct Fixture {
  Bytes small = generate_pattern(42, 16);
  Bytes large = generate_pattern(7, 3'000'000);
  std::unique_ptr<WindowServer> server =
      WindowServer::serve(kLoopback, {{small, WindowId{1}}, {large, WindowId{2}}});
};

// Sends raw bytes, half-closes, and decodes whatever single reply comes back.
wire::Message raw_exchange(const net::Endpoint& ep, const Bytes& bytes) {
  UniqueFd fd = net::connect_tcp(ep);
  net::write_all(fd.get(), bytes);
  ::shutdown(fd.get(), SHUT_WR);
  return read_message(fd.get());
}

wire::Status status_of(const wire::Message& msg) {
  return std::visit(
      [](const auto& m) -> wire::Status {
        if constexpr (requires { m.status; }) return m.status;
        return wire::Status::Ok;
      },
      msg);
}

}  // namespace

TEST_CASE("endpoints parse") {
  CHECK(net::parse_endpoint("example.org:99").port == 99);
  CHECK(net::parse_endpoint("example.org").port == net::kDefaultPort);
  CHECK(net::parse_endpoint(":5").host == "127.0.0.1");
  CHECK(code_of([] { net::parse_endpoint("h:99999"); }) == ErrorCode::BadValue);
  CHECK(code_of([] { net::parse_endpoint("h:x"); }) == ErrorCode::BadValue);
}

TEST_CASE("open, list and read over loopback") {
  Fixture f;
  const auto ep = f.server->endpoint();
  CHECK(ep.port != 0);
  const auto windows = list_windows(ep);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0] == wire::WindowInfo{1, 16});
  CHECK(windows[1] == wire::WindowInfo{2, 3'000'000});

  RemoteWindow w = RemoteWindow::open(ep, WindowId{1});
  CHECK(w.size() == 16);
  CHECK(w.read(0, 16) == f.small);
  CHECK(w.read(15, 1) == Bytes{f.small[15]});
  CHECK(w.read(16, 0).empty());
}

TEST_CASE("bounds and unknown windows are reported") {
  Fixture f;
  const auto ep = f.server->endpoint();
  RemoteWindow w = RemoteWindow::open(ep, WindowId{1});
  CHECK(code_of([&] { w.read(10, 7); }) == ErrorCode::OutOfBounds);
  CHECK(w.read(0, 4) == Bytes(f.small.begin(), f.small.begin() + 4));
  CHECK(code_of([&] { RemoteWindow::open(ep, WindowId{99}); }) == ErrorCode::UnknownWindow);
  CHECK(code_of([] { RemoteWindow::open({"127.0.0.1", 1}, WindowId{1}); }) == ErrorCode::ConnectError);
}

TEST_CASE("server-side bounds check covers wrapping offsets") {
  Fixture f;
  const auto reply = raw_exchange(f.server->endpoint(), wire::encode(wire::ReadReq{1, ~0ull, 2}));
  CHECK(status_of(reply) == wire::Status::OutOfBounds);
}

TEST_CASE("close is idempotent and windows can be reopened") {
  Fixture f;
  const auto ep = f.server->endpoint();
  RemoteWindow w = RemoteWindow::open(ep, WindowId{2});
  w.close();
  w.close();
  CHECK_FALSE(w.is_open());
  CHECK(code_of([&] { w.read(0, 1); }) == ErrorCode::WindowClosed);
  RemoteWindow again = RemoteWindow::open(ep, WindowId{2});
  CHECK(again.read(100, 10) == Bytes(f.large.begin() + 100, f.large.begin() + 110));
}

TEST_CASE("large reads are split into chunks") {
  Fixture f;
  RemoteWindow w = RemoteWindow::open(f.server->endpoint(), WindowId{2});
  w.set_chunk_bytes(1'000'000);
  const std::uint64_t before = w.round_trips();
  CHECK(w.read(500'000, 2'500'000) == Bytes(f.large.begin() + 500'000, f.large.end()));
  CHECK(w.round_trips() - before == 3);
}

TEST_CASE("concurrent clients read consistent data") {
  Fixture f;
  const auto ep = f.server->endpoint();
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      RemoteWindow w = RemoteWindow::open(ep, WindowId{2});
      std::mt19937_64 rng(t);
      for (int i = 0; i < 50; ++i) {
        const std::uint64_t off = rng() % f.large.size();
        const std::uint64_t len = rng() % std::min<std::uint64_t>(f.large.size() - off, 100'000);
        if (w.read(off, len) != Bytes(f.large.begin() + off, f.large.begin() + off + len)) ++mismatches;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(mismatches == 0);
  CHECK(f.server->requests_served() >= 300);
}

TEST_CASE("duplicate or zero window ids are refused") {
  Bytes a(4);
  CHECK(code_of([&] { WindowServer::serve(kLoopback, {{a, WindowId{3}}, {a, WindowId{3}}}); }) ==
        ErrorCode::DuplicateWindowId);
  CHECK(code_of([&] { WindowServer::serve(kLoopback, {{a, WindowId{0}}}); }) == ErrorCode::BadValue);
  auto auto_ids = WindowServer::serve(kLoopback, {{a, std::nullopt}, {a, WindowId{1}}});
  CHECK(auto_ids->windows().size() == 2);
}

TEST_CASE("malformed frames get a protocol error reply") {
  Fixture f;
  const auto ep = f.server->endpoint();
  Bytes bad = wire::encode(wire::ReadReq{1, 0, 4});
  bad[0] = 'Z';
  CHECK(status_of(raw_exchange(ep, bad)) == wire::Status::ProtocolError);
  bad = wire::encode(wire::ReadReq{1, 0, 4});
  bad[4] = 9;
  CHECK(status_of(raw_exchange(ep, bad)) == wire::Status::ProtocolError);
  bad = wire::encode(wire::ReadReq{1, 0, 4});
  bad.resize(20);
  const auto truncated = raw_exchange(ep, bad);
  CHECK(wire::type_of(truncated) == wire::MsgType::ReadResp);
  CHECK(status_of(truncated) == wire::Status::ProtocolError);
  CHECK(status_of(raw_exchange(ep, wire::encode(wire::CloseResp{}))) == wire::Status::ProtocolError);
  CHECK(RemoteWindow::open(ep, WindowId{1}).read(0, 16) == f.small);
}

TEST_CASE("random garbage never takes the server down") {
  Fixture f;
  const auto ep = f.server->endpoint();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Bytes junk = wire::encode(testing::random_message(rng, rng() % 8));
    const int mode = static_cast<int>(rng() % 3);
    if (mode == 0) junk.resize(rng() % junk.size());
    if (mode == 1) junk[rng() % junk.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    UniqueFd fd = net::connect_tcp(ep);
    try {
      net::write_all(fd.get(), junk);
      ::shutdown(fd.get(), SHUT_WR);
      while (true) read_message(fd.get());
    } catch (const Error&) {
    }
  }
  CHECK(RemoteWindow::open(ep, WindowId{2}).read(0, 8) == Bytes(f.large.begin(), f.large.begin() + 8));
}

TEST_CASE("client rejects a server speaking the wrong protocol") {
  UniqueFd listener = net::listen_tcp(kLoopback);
  const net::Endpoint ep{"127.0.0.1", net::local_port(listener.get())};
  std::thread stub([&] {
    UniqueFd conn(::accept(listener.get(), nullptr, nullptr));
    std::uint8_t request[14];
    net::read_full(conn.get(), request);
    Bytes reply = wire::encode(wire::OpenResp{wire::Status::Ok, 16});
    reply[1] = 'X';
    net::write_all(conn.get(), reply);
  });
  try {
    RemoteWindow::open(ep, WindowId{1});
    FAIL("open succeeded");
  } catch (const wire::ProtocolError& e) {
    CHECK(e.fault() == wire::Fault::BadMagic);
  }
  stub.join();
}

TEST_CASE("a vanished server is reported as a lost connection") {
  auto bytes = generate_pattern(1, 64);
  auto server = WindowServer::serve(kLoopback, {{bytes, WindowId{1}}});
  RemoteWindow w = RemoteWindow::open(server->endpoint(), WindowId{1});
  server->shutdown();
  const ErrorCode code = code_of([&] { w.read(0, 8); });
  CHECK((code == ErrorCode::ConnectionLost || code == ErrorCode::ProtocolError));
}

TEST_CASE("remote store maps windows read-only") {
  Fixture f;
  RemoteStore store(f.server->endpoint());
  const AllocationId id = store.attach(WindowId{2});
  CHECK(store.size_of(id) == 3'000'000);
  CHECK(store.read(id, 1'048'570, 20) == Bytes(f.large.begin() + 1'048'570, f.large.begin() + 1'048'590));
  CHECK(code_of([&] { store.allocate(10); }) == ErrorCode::Unsupported);
  CHECK(code_of([&] { store.write(id, 0, Bytes(1)); }) == ErrorCode::Unsupported);
  CHECK(code_of([&] { store.read(id, 2'999'999, 2); }) == ErrorCode::OutOfBounds);
  store.free(id);
  CHECK(code_of([&] { store.size_of(id); }) == ErrorCode::UnknownAllocation);
}
