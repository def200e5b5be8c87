#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "remem/page_store.hpp"
#include "remem/unique_fd.hpp"

namespace remem::net {

inline constexpr std::uint16_t kDefaultPort = 7930;
inline constexpr const char* kEndpointEnv = "REMEM_ENDPOINT";

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// "host:port", "host" (default port) or ":port". Throws BadValue.
Endpoint parse_endpoint(const std::string& text);

/// Listening TCP socket; port 0 picks an ephemeral port. Throws BindError.
UniqueFd listen_tcp(const Endpoint& endpoint, int backlog = 128);
/// Port actually bound by a listening socket.
std::uint16_t local_port(int fd);
/// Throws ConnectError.
UniqueFd connect_tcp(const Endpoint& endpoint);

/// Reads exactly dst.size() bytes. Returns the number read before EOF
/// (so < dst.size() means the peer closed). Throws ConnectionLost on errors.
std::size_t read_full(int fd, MutableByteView dst);
/// Throws ConnectionLost if the peer is gone.
void write_all(int fd, ByteView src);
void write_all(int fd, ByteView head, ByteView tail);

}  // namespace remem::net
