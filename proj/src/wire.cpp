#include "remem/wire.hpp"

#include <algorithm>
#include <string>

namespace remem::wire {

namespace {

class Writer {
 public:
  explicit Writer(MsgType type, std::size_t reserve = 0) {
    out_.reserve(kHeaderSize + reserve);
    out_.insert(out_.end(), kMagic.begin(), kMagic.end());
    out_.push_back(kVersion);
    out_.push_back(static_cast<std::uint8_t>(type));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u64(std::uint64_t v) {
    std::uint8_t buf[8];
    put_u64(buf, v);
    out_.insert(out_.end(), buf, buf + 8);
  }
  void bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw ProtocolError(Fault::Truncated, "need " + std::to_string(n) + " more bytes, have " +
                                                std::to_string(in_.size() - pos_));
    }
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint64_t u64() {
    need(8);
    const std::uint64_t v = get_u64(in_.data() + pos_);
    pos_ += 8;
    return v;
  }
  Status status() {
    const std::uint8_t s = u8();
    if (s > static_cast<std::uint8_t>(Status::ProtocolError)) {
      throw ProtocolError(Fault::BadStatus, "status " + std::to_string(s));
    }
    return static_cast<Status>(s);
  }
  Bytes bytes(std::uint64_t n) {
    need(n);
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
            in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return b;
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(Fault fault) noexcept {
  switch (fault) {
    case Fault::Truncated: return "truncated frame";
    case Fault::BadMagic: return "bad magic";
    case Fault::BadVersion: return "unsupported version";
    case Fault::UnknownType: return "unknown message type";
    case Fault::BadStatus: return "bad status code";
    case Fault::LengthMismatch: return "length mismatch";
    case Fault::TrailingBytes: return "trailing bytes";
    case Fault::UnexpectedType: return "unexpected message type";
  }
  return "unknown fault";
}

void put_u64(std::uint8_t* dst, std::uint64_t value) noexcept {
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* src) noexcept {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | src[i];
  return v;
}

MsgType type_of(const Message& msg) noexcept {
  constexpr MsgType kTypes[] = {MsgType::OpenReq, MsgType::OpenResp, MsgType::ReadReq,
                                MsgType::ReadResp, MsgType::ListReq, MsgType::ListResp,
                                MsgType::CloseReq, MsgType::CloseResp};
  return kTypes[msg.index()];
}

bool is_request(MsgType type) noexcept {
  return (static_cast<std::uint8_t>(type) & kResponseBit) == 0;
}

std::size_t fixed_body_size(MsgType type) noexcept {
  switch (type) {
    case MsgType::OpenReq: return 8;
    case MsgType::OpenResp: return 9;
    case MsgType::ReadReq: return 24;
    case MsgType::ReadResp: return 9;
    case MsgType::ListReq: return 0;
    case MsgType::ListResp: return 9;
    case MsgType::CloseReq: return 8;
    case MsgType::CloseResp: return 1;
  }
  return 0;
}

MsgType decode_header(ByteView header) {
  if (header.size() < kHeaderSize) {
    throw ProtocolError(Fault::Truncated, "header needs 6 bytes, got " +
                                              std::to_string(header.size()));
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw ProtocolError(Fault::BadMagic, "frame does not start with RMEM");
  }
  if (header[4] != kVersion) {
    throw ProtocolError(Fault::BadVersion, "version " + std::to_string(header[4]));
  }
  const std::uint8_t t = header[5];
  switch (t) {
    case 0x01: case 0x02: case 0x03: case 0x04:
    case 0x81: case 0x82: case 0x83: case 0x84:
      return static_cast<MsgType>(t);
    default:
      throw ProtocolError(Fault::UnknownType, "msg_type 0x" + [&] {
        constexpr char hex[] = "0123456789abcdef";
        return std::string{hex[t >> 4], hex[t & 15]};
      }());
  }
}

Bytes encode(const Message& msg) {
  return std::visit(
      [](const auto& m) -> Bytes {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OpenReq>) {
          Writer w(MsgType::OpenReq, 8);
          w.u64(m.window_id);
          return w.take();
        } else if constexpr (std::is_same_v<T, OpenResp>) {
          Writer w(MsgType::OpenResp, 9);
          w.u8(static_cast<std::uint8_t>(m.status));
          w.u64(m.size_bytes);
          return w.take();
        } else if constexpr (std::is_same_v<T, ReadReq>) {
          Writer w(MsgType::ReadReq, 24);
          w.u64(m.window_id);
          w.u64(m.offset);
          w.u64(m.length);
          return w.take();
        } else if constexpr (std::is_same_v<T, ReadResp>) {
          Writer w(MsgType::ReadResp, 9 + m.payload.size());
          w.u8(static_cast<std::uint8_t>(m.status));
          w.u64(m.payload.size());
          w.bytes(m.payload);
          return w.take();
        } else if constexpr (std::is_same_v<T, ListReq>) {
          return Writer(MsgType::ListReq).take();
        } else if constexpr (std::is_same_v<T, ListResp>) {
          Writer w(MsgType::ListResp, 9 + 16 * m.windows.size());
          w.u8(static_cast<std::uint8_t>(m.status));
          w.u64(m.windows.size());
          for (const auto& info : m.windows) {
            w.u64(info.window_id);
            w.u64(info.size_bytes);
          }
          return w.take();
        } else if constexpr (std::is_same_v<T, CloseReq>) {
          Writer w(MsgType::CloseReq, 8);
          w.u64(m.window_id);
          return w.take();
        } else {
          Writer w(MsgType::CloseResp, 1);
          w.u8(static_cast<std::uint8_t>(m.status));
          return w.take();
        }
      },
      msg);
}

Message decode(ByteView frame) {
  const MsgType type = decode_header(frame);
  Reader r(frame.subspan(kHeaderSize));
  Message out;
  switch (type) {
    case MsgType::OpenReq: out = OpenReq{r.u64()}; break;
    case MsgType::OpenResp: {
      OpenResp m;
      m.status = r.status();
      m.size_bytes = r.u64();
      out = m;
      break;
    }
    case MsgType::ReadReq: {
      ReadReq m;
      m.window_id = r.u64();
      m.offset = r.u64();
      m.length = r.u64();
      out = m;
      break;
    }
    case MsgType::ReadResp: {
      ReadResp m;
      m.status = r.status();
      const std::uint64_t len = r.u64();
      if (m.status != Status::Ok && len != 0) {
        throw ProtocolError(Fault::LengthMismatch, "error READ_RESP carries a payload");
      }
      m.payload = r.bytes(len);
      out = std::move(m);
      break;
    }
    case MsgType::ListReq: out = ListReq{}; break;
    case MsgType::ListResp: {
      ListResp m;
      m.status = r.status();
      const std::uint64_t count = r.u64();
      if (count > kMaxListEntries || count * 16 > r.remaining()) {
        throw ProtocolError(Fault::Truncated, "LIST_RESP announces " + std::to_string(count) +
                                                  " entries");
      }
      m.windows.reserve(count);
      for (std::uint64_t i = 0; i < count; ++i) {
        WindowInfo info;
        info.window_id = r.u64();
        info.size_bytes = r.u64();
        m.windows.push_back(info);
      }
      out = std::move(m);
      break;
    }
    case MsgType::CloseReq: out = CloseReq{r.u64()}; break;
    case MsgType::CloseResp: out = CloseResp{r.status()}; break;
  }
  if (r.remaining() != 0) {
    throw ProtocolError(Fault::TrailingBytes, std::to_string(r.remaining()) + " bytes after frame");
  }
  return out;
}

std::array<std::uint8_t, kHeaderSize + 9> encode_read_resp_prefix(Status status,
                                                                  std::uint64_t payload_len) {
  std::array<std::uint8_t, kHeaderSize + 9> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = kVersion;
  out[5] = static_cast<std::uint8_t>(MsgType::ReadResp);
  out[6] = static_cast<std::uint8_t>(status);
  put_u64(out.data() + 7, payload_len);
  return out;
}

Message error_response(std::optional<MsgType> request, Status status) {
  switch (request.value_or(MsgType::CloseReq)) {
    case MsgType::OpenReq: return OpenResp{status, 0};
    case MsgType::ReadReq: return ReadResp{status, {}};
    case MsgType::ListReq: return ListResp{status, {}};
    default: return CloseResp{status};
  }
}

}  // namespace remem::wire
