#pragma once

#include <cstdint>

#include "remem/page_store.hpp"

namespace remem {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/// Deterministic payload bytes: xorshift64 (13, 7, 17), each state emitted as
/// 8 little-endian bytes. Any prefix of a longer pattern equals the shorter one.
Bytes generate_pattern(std::uint64_t seed, std::uint64_t len);
void fill_pattern(std::uint64_t seed, MutableByteView dst);

/// FNV-1a 64-bit.
class Fnv1a {
 public:
  void update(ByteView bytes) noexcept;
  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = kFnvOffsetBasis;
};

std::uint64_t checksum(ByteView bytes) noexcept;

}  // namespace remem
