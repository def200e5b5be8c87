#include "doctest.h"
#include "remem/pattern.hpp"

using namespace remem;

TEST_CASE("fnv-1a 64 reference values") {
  CHECK(checksum({}) == 14695981039346656037ull);
  const Bytes a{'a'};
  CHECK(checksum(a) == 12638187200555641996ull);
  CHECK(checksum(Bytes{1, 2}) == 589729691727335466ull);
  CHECK(checksum(Bytes{2, 1}) == 592596118541513868ull);
}

TEST_CASE("incremental hashing equals one-shot hashing") {
  const Bytes data = generate_pattern(5, 10'000);
  Fnv1a h;
  h.update(ByteView(data).first(3333));
  h.update(ByteView(data).subspan(3333));
  CHECK(h.value() == checksum(data));
}

TEST_CASE("pattern bytes are little-endian xorshift64 states") {
  CHECK(generate_pattern(1, 8) == Bytes{0x41, 0x20, 0x82, 0x40, 0, 0, 0, 0});
  CHECK(generate_pattern(42, 16) == Bytes{0xaa, 0x4a, 0x51, 0x95, 0x0a, 0x00, 0x00, 0x00,
                                          0xbf, 0x02, 0x02, 0xf8, 0xfd, 0xaa, 0x0a, 0xa0});
  CHECK(checksum(generate_pattern(42, 1000)) == 17984948652331858864ull);
  CHECK(checksum(generate_pattern(7, 100'000)) == 4863019166027855523ull);
}

TEST_CASE("patterns are prefixes of longer patterns") {
  const Bytes long_one = generate_pattern(9, 1001);
  const Bytes short_one = generate_pattern(9, 13);
  CHECK(Bytes(long_one.begin(), long_one.begin() + 13) == short_one);
  Bytes filled(1001);
  fill_pattern(9, filled);
  CHECK(filled == long_one);
  CHECK(generate_pattern(9, 0).empty());
}
