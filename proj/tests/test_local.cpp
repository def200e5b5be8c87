#include "doctest.h"
#include "remem/error.hpp"
#include "remem/local_backend.hpp"
#include "remem/pattern.hpp"

using namespace remem;

TEST_CASE("local region round trip") {
  LocalRegion r = local_alloc(1 << 20);
  const Bytes pattern = generate_pattern(42, 1000);
  local_write(r, 5000, pattern);
  CHECK(local_read(r, 5000, 1000) == pattern);
  CHECK(local_read(r, 5000, 0).empty());
  CHECK_THROWS_AS(local_read(r, (1 << 20) - 10, 11), Error);
  CHECK_THROWS_AS(local_write(r, 1 << 20, Bytes(1)), Error);
  CHECK_THROWS_AS(local_alloc(0), Error);
}

TEST_CASE("local store implements the page store surface") {
  LocalStore store(4096);
  const AllocationId id = store.allocate(10'000);
  CHECK(store.kind() == BackendKind::Local);
  CHECK(store.size_of(id) == 10'000);
  const Bytes data = generate_pattern(7, 10'000);
  store.write(id, 0, data);
  CHECK(store.read(id, 0, 10'000) == data);
  CHECK(store.read(id, 4090, 10) == Bytes(data.begin() + 4090, data.begin() + 4100));
  store.free(id);
  try {
    store.read(id, 0, 1);
    FAIL("read after free");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownAllocation);
  }
  CHECK(store.table().stats().live_allocations == 0);
}

TEST_CASE("absurd allocation reports out of memory") {
  try {
    local_alloc(~0ull >> 1);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfMemory);
  }
}
