#include "doctest.h"
#include "shim_check.hpp"

using remem::testing::check_shim;

TEST_CASE("preloaded runs behave like plain runs") {
  for (const char* mode : {"basic", "calloc", "realloc"}) {
    CAPTURE(mode);
    const auto o = check_shim(REMEM_SHIM_PROBE, REMEM_SHIM_LIB, mode);
    CHECK(o.exit_plain == 0);
    CHECK(o.exit_preloaded == 0);
    CHECK(o.identical);
    CHECK(o.dirs_during == 1);
    CHECK(o.dirs_after == 0);
  }
}

TEST_CASE("concurrent large and small allocations under preload") {
  const auto o = check_shim(REMEM_SHIM_PROBE, REMEM_SHIM_LIB, "stress");
  CHECK(o.exit_preloaded == 0);
  CHECK(o.identical);
  CHECK(o.dirs_after == 0);
}

TEST_CASE("calloc overflow returns null under preload") {
  const auto o = check_shim(REMEM_SHIM_PROBE, REMEM_SHIM_LIB, "calloc");
  CHECK(o.preloaded.find("overflow null") != std::string::npos);
}
