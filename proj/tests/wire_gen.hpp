#pragma once

#include <random>

#include "remem/wire.hpp"

namespace remem::testing {

inline wire::Status random_status(std::mt19937_64& rng) { return static_cast<wire::Status>(rng() % 4); }

inline std::uint64_t random_u64(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return 0;
    case 1: return ~0ull;
    case 2: return rng() % 1000;
    default: return rng();
  }
}

// A random message of type index `kind` (0..7 in variant order).
inline wire::Message random_message(std::mt19937_64& rng, std::size_t kind) {
  using namespace wire;
  switch (kind % 8) {
    case 0: return OpenReq{random_u64(rng)};
    case 1: return OpenResp{random_status(rng), random_u64(rng)};
    case 2: return ReadReq{random_u64(rng), random_u64(rng), random_u64(rng)};
    case 3: {
      ReadResp r{random_status(rng), {}};
      if (r.status == Status::Ok) r.payload.resize(rng() % 300);
      for (auto& b : r.payload) b = static_cast<std::uint8_t>(rng());
      return r;
    }
    case 4: return ListReq{};
    case 5: {
      ListResp r{random_status(rng), {}};
      r.windows.resize(rng() % 20);
      for (auto& w : r.windows) w = {random_u64(rng), random_u64(rng)};
      return r;
    }
    case 6: return CloseReq{random_u64(rng)};
    default: return CloseResp{random_status(rng)};
  }
}

inline Bytes read_req_golden() {
  // window_id 1, offset 0, length 16
  return {0x52, 0x4d, 0x45, 0x4d, 0x01, 0x02, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
          0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
}

}  // namespace remem::testing
