#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "remem/error.hpp"
#include "remem/page_store.hpp"

namespace remem::wire {

// Frame: "RMEM" | version u8 | msg_type u8 | body. Integers are little-endian.
inline constexpr std::array<std::uint8_t, 4> kMagic{0x52, 0x4D, 0x45, 0x4D};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 6;
inline constexpr std::uint8_t kResponseBit = 0x80;
// A LIST_RESP longer than this is treated as corrupt.
inline constexpr std::uint64_t kMaxListEntries = 1u << 20;

enum class MsgType : std::uint8_t {
  OpenReq = 0x01,
  ReadReq = 0x02,
  ListReq = 0x03,
  CloseReq = 0x04,
  OpenResp = 0x81,
  ReadResp = 0x82,
  ListResp = 0x83,
  CloseResp = 0x84,
};

enum class Status : std::uint8_t {
  Ok = 0,
  UnknownWindow = 1,
  OutOfBounds = 2,
  ProtocolError = 3,
};

enum class Fault {
  Truncated,
  BadMagic,
  BadVersion,
  UnknownType,
  BadStatus,
  LengthMismatch,
  TrailingBytes,
  UnexpectedType,
};

std::string_view to_string(Fault fault) noexcept;

class ProtocolError : public Error {
 public:
  ProtocolError(Fault fault, const std::string& what)
      : Error(ErrorCode::ProtocolError, std::string(to_string(fault)) + ": " + what), fault_(fault) {}
  Fault fault() const noexcept { return fault_; }

 private:
  Fault fault_;
};

struct WindowInfo {
  std::uint64_t window_id = 0;
  std::uint64_t size_bytes = 0;
  bool operator==(const WindowInfo&) const = default;
};

struct OpenReq {
  std::uint64_t window_id = 0;
  bool operator==(const OpenReq&) const = default;
};
struct OpenResp {
  Status status = Status::Ok;
  std::uint64_t size_bytes = 0;
  bool operator==(const OpenResp&) const = default;
};
struct ReadReq {
  std::uint64_t window_id = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  bool operator==(const ReadReq&) const = default;
};
struct ReadResp {
  Status status = Status::Ok;
  Bytes payload;
  bool operator==(const ReadResp&) const = default;
};
struct ListReq {
  bool operator==(const ListReq&) const = default;
};
struct ListResp {
  Status status = Status::Ok;
  std::vector<WindowInfo> windows;
  bool operator==(const ListResp&) const = default;
};
struct CloseReq {
  std::uint64_t window_id = 0;
  bool operator==(const CloseReq&) const = default;
};
struct CloseResp {
  Status status = Status::Ok;
  bool operator==(const CloseResp&) const = default;
};

using Message =
    std::variant<OpenReq, OpenResp, ReadReq, ReadResp, ListReq, ListResp, CloseReq, CloseResp>;

MsgType type_of(const Message& msg) noexcept;
bool is_request(MsgType type) noexcept;

Bytes encode(const Message& msg);
/// Decodes exactly one complete frame; any leftover byte is an error.
Message decode(ByteView frame);

/// Validates magic and version, returns the message type.
MsgType decode_header(ByteView header);
/// Size of the fixed part of the body that follows the header. The
/// variable tail of READ_RESP / LIST_RESP is announced inside it.
std::size_t fixed_body_size(MsgType type) noexcept;

/// Header + status + payload_len of a READ_RESP; the payload follows on the wire.
std::array<std::uint8_t, kHeaderSize + 9> encode_read_resp_prefix(Status status,
                                                                  std::uint64_t payload_len);
/// An error response of the kind that answers `request` (CLOSE_RESP if unknown).
Message error_response(std::optional<MsgType> request, Status status);

void put_u64(std::uint8_t* dst, std::uint64_t value) noexcept;
std::uint64_t get_u64(const std::uint8_t* src) noexcept;

}  // namespace remem::wire
