#include "remem/pattern.hpp"

#include <algorithm>

namespace remem {

void fill_pattern(std::uint64_t seed, MutableByteView dst) {
  std::uint64_t s = seed;
  std::uint8_t* out = dst.data();
  std::size_t left = dst.size();
  while (left > 0) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    const std::size_t n = std::min<std::size_t>(8, left);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(s >> (8 * i));
    out += n;
    left -= n;
  }
}

Bytes generate_pattern(std::uint64_t seed, std::uint64_t len) {
  Bytes out(len);
  fill_pattern(seed, out);
  return out;
}

void Fnv1a::update(ByteView bytes) noexcept {
  std::uint64_t h = hash_;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  hash_ = h;
}

std::uint64_t checksum(ByteView bytes) noexcept {
  Fnv1a h;
  h.update(bytes);
  return h.value();
}

}  // namespace remem
