#include "remem/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/uio.h>

#include <cerrno>
#include <charconv>
#include <memory>
#include <cstring>

#include "remem/error.hpp"

namespace remem::net {

namespace {

struct AddrInfoDeleter {
  void operator()(addrinfo* ai) const noexcept { freeaddrinfo(ai); }
};

std::unique_ptr<addrinfo, AddrInfoDeleter> lookup(const Endpoint& ep, bool passive,
                                                  ErrorCode on_error) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = passive ? AI_PASSIVE : 0;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  if (int rc = getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
    throw Error(on_error, ep.str() + ": " + gai_strerror(rc));
  }
  return std::unique_ptr<addrinfo, AddrInfoDeleter>(res);
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  std::string port_text;
  if (colon == std::string::npos) {
    ep.host = text;
  } else {
    ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  if (ep.host.size() >= 2 && ep.host.front() == '[' && ep.host.back() == ']') {
    ep.host = ep.host.substr(1, ep.host.size() - 2);
  }
  if (ep.host.empty()) ep.host = "127.0.0.1";
  if (!port_text.empty()) {
    unsigned value = 0;
    auto [ptr, err] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (err != std::errc{} || ptr != port_text.data() + port_text.size() || value > 65535) {
      throw Error(ErrorCode::BadValue, "bad port in endpoint '" + text + "'");
    }
    ep.port = static_cast<std::uint16_t>(value);
  }
  return ep;
}

UniqueFd listen_tcp(const Endpoint& endpoint, int backlog) {
  auto res = lookup(endpoint, true, ErrorCode::BindError);
  int last_errno = 0;
  for (addrinfo* ai = res.get(); ai; ai = ai->ai_next) {
    UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!fd) {
      last_errno = errno;
      continue;
    }
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd.get(), backlog) == 0) {
      return fd;
    }
    last_errno = errno;
  }
  throw Error(ErrorCode::BindError, endpoint.str() + ": " + std::strerror(last_errno));
}

std::uint16_t local_port(int fd) {
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return 0;
  if (addr.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  if (addr.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  return 0;
}

UniqueFd connect_tcp(const Endpoint& endpoint) {
  auto res = lookup(endpoint, false, ErrorCode::ConnectError);
  int last_errno = 0;
  for (addrinfo* ai = res.get(); ai; ai = ai->ai_next) {
    UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!fd) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return fd;
    }
    last_errno = errno;
  }
  throw Error(ErrorCode::ConnectError, endpoint.str() + ": " + std::strerror(last_errno));
}

std::size_t read_full(int fd, MutableByteView dst) {
  std::size_t done = 0;
  while (done < dst.size()) {
    const ssize_t n = ::recv(fd, dst.data() + done, dst.size() - done, 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::ConnectionLost, std::string("recv: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  return done;
}

void write_all(int fd, ByteView src) { write_all(fd, src, {}); }

void write_all(int fd, ByteView head, ByteView tail) {
  iovec iov[2] = {{const_cast<std::uint8_t*>(head.data()), head.size()},
                  {const_cast<std::uint8_t*>(tail.data()), tail.size()}};
  int first = 0;
  while (first < 2) {
    if (iov[first].iov_len == 0) {
      ++first;
      continue;
    }
    msghdr msg{};
    msg.msg_iov = iov + first;
    msg.msg_iovlen = static_cast<std::size_t>(2 - first);
    const ssize_t n = ::sendmsg(fd, &msg, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::ConnectionLost, std::string("send: ") + std::strerror(errno));
    }
    auto left = static_cast<std::size_t>(n);
    while (first < 2 && left >= iov[first].iov_len) {
      left -= iov[first].iov_len;
      iov[first].iov_len = 0;
      ++first;
    }
    if (first < 2) {
      iov[first].iov_base = static_cast<std::uint8_t*>(iov[first].iov_base) + left;
      iov[first].iov_len -= left;
    }
  }
}

}  // namespace remem::net
