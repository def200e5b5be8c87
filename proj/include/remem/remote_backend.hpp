#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "remem/net.hpp"
#include "remem/page_store.hpp"
#include "remem/wire.hpp"

namespace remem {

struct WindowId {
  std::uint64_t value = 0;
  constexpr auto operator<=>(const WindowId&) const = default;
};

/// Large reads are split into READ_REQs of at most this many bytes.
inline constexpr std::uint64_t kReadChunkBytes = 8ull << 20;

/// A region to expose. The bytes must outlive the server.
struct Exposure {
  ByteView region;
  std::optional<WindowId> requested_id;
};

/// Passive window server: answers OPEN/READ/LIST/CLOSE by bounds-checking and
/// copying bytes out of exposed regions. Windows are read-only and fixed for
/// the server's lifetime. Each connection is served in order on its own thread.
class WindowServer {
 public:
  /// Throws BindError, DuplicateWindowId, BadValue (requested id 0).
  static std::unique_ptr<WindowServer> serve(const net::Endpoint& bind,
                                             std::vector<Exposure> exposures);

  WindowServer(const WindowServer&) = delete;
  WindowServer& operator=(const WindowServer&) = delete;
  ~WindowServer();

  /// The bound endpoint (port resolved when 0 was requested).
  net::Endpoint endpoint() const { return endpoint_; }
  std::vector<wire::WindowInfo> windows() const;
  std::size_t active_connections() const;
  std::uint64_t requests_served() const noexcept { return requests_.load(); }

  /// Stops accepting, lets in-flight requests finish, joins all threads.
  void shutdown();

 private:
  struct Connection {
    UniqueFd fd;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  WindowServer() = default;
  void accept_loop();
  void serve_connection(Connection& conn);
  void reap_finished(bool all);

  net::Endpoint endpoint_;
  UniqueFd listen_fd_;
  UniqueFd wake_read_, wake_write_;
  std::map<std::uint64_t, ByteView> windows_;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> requests_{0};
  mutable std::mutex conn_mutex_;
  std::list<Connection> connections_;
};

/// Client handle to one remote window. One thread at a time; open several
/// handles for concurrent access.
class RemoteWindow {
 public:
  /// Throws ConnectError, UnknownWindow, ProtocolError.
  static RemoteWindow open(const net::Endpoint& endpoint, WindowId id);

  RemoteWindow(RemoteWindow&&) noexcept = default;
  RemoteWindow& operator=(RemoteWindow&&) noexcept = default;
  ~RemoteWindow();

  WindowId id() const noexcept { return id_; }
  std::uint64_t size() const noexcept { return size_; }
  const net::Endpoint& endpoint() const noexcept { return endpoint_; }
  bool is_open() const noexcept { return static_cast<bool>(fd_); }

  Bytes read(std::uint64_t offset, std::uint64_t len);
  void read_into(std::uint64_t offset, MutableByteView dst);
  /// Idempotent.
  void close();

  void set_chunk_bytes(std::uint64_t bytes) noexcept { chunk_bytes_ = bytes ? bytes : 1; }
  std::uint64_t round_trips() const noexcept { return round_trips_; }

 private:
  RemoteWindow() = default;
  void read_chunk(std::uint64_t offset, std::uint8_t* dst, std::uint64_t len);

  net::Endpoint endpoint_;
  WindowId id_;
  std::uint64_t size_ = 0;
  std::uint64_t chunk_bytes_ = kReadChunkBytes;
  std::uint64_t round_trips_ = 0;
  UniqueFd fd_;
};

/// Throws ConnectError, ProtocolError.
std::vector<wire::WindowInfo> list_windows(const net::Endpoint& endpoint);

/// Reads one response frame of the given type from a stream (payloads of
/// READ_RESP included). Throws ProtocolError / ConnectionLost.
wire::Message read_message(int fd);

/// Remote windows mapped into the PageStore surface. Read-only: allocate()
/// and write() throw Unsupported; attach() maps an exposed window.
class RemoteStore final : public PageStore {
 public:
  explicit RemoteStore(net::Endpoint endpoint, std::uint64_t page_size = kDefaultPageSize);

  AllocationId attach(WindowId window);

  BackendKind kind() const noexcept override { return BackendKind::Remote; }
  AllocationId allocate(std::uint64_t size_bytes) override;
  void write(AllocationId id, std::uint64_t offset, ByteView src) override;
  void read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) override;
  void free(AllocationId id) override;
  std::uint64_t size_of(AllocationId id) const override;

 private:
  struct Slot {
    explicit Slot(RemoteWindow w) : window(std::move(w)) {}
    std::mutex mutex;
    RemoteWindow window;
  };
  std::shared_ptr<Slot> slot(AllocationId id) const;

  net::Endpoint endpoint_;
  std::uint64_t page_size_;
  PageTable table_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::shared_ptr<Slot>> slots_;
};

}  // namespace remem
