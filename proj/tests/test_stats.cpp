#include <random>

#include "doctest.h"
#include "remem/error.hpp"
#include "remem/stats.hpp"
#include "support.hpp"

using namespace remem;
using namespace remem::bench;

namespace {

MeasurementRecord rec(BackendKind b, std::uint64_t size, std::uint32_t rep, std::uint64_t ns) {
  return {b, size, rep, ns, throughput_mb_s(size, ns), 0, 0, std::nullopt};
}

}  // namespace

TEST_CASE("moments of a small sample") {
  const std::vector<double> v{1, 2, 3, 4};
  const Moments m = moments(v);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.median == doctest::Approx(2.5));
  CHECK(m.stddev == doctest::Approx(1.2909944487358056));
  CHECK(m.min == 1);
  CHECK(m.max == 4);
  const std::vector<double> one{7};
  CHECK(moments(one).stddev == 0);
  CHECK(moments(one).median == 7);
}

TEST_CASE("throughput is decimal megabytes per second") {
  CHECK(throughput_mb_s(100'000'000, 1'000'000'000) == doctest::Approx(100.0));
  CHECK(throughput_mb_s(1'000'000, 500'000) == doctest::Approx(2000.0));
}

TEST_CASE("summaries group by backend then size") {
  std::vector<MeasurementRecord> records{
      rec(BackendKind::Remote, 100, 0, 10), rec(BackendKind::Local, 200, 0, 3),
      rec(BackendKind::Local, 100, 0, 1),   rec(BackendKind::Local, 100, 1, 3),
      rec(BackendKind::Local, 200, 1, 5),   rec(BackendKind::Remote, 100, 1, 30)};
  const auto stats = summarize(records);
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].backend == BackendKind::Local);
  CHECK(stats[0].size_bytes == 100);
  CHECK(stats[0].elapsed_ns.mean == 2);
  CHECK(stats[1].size_bytes == 200);
  CHECK(stats[2].backend == BackendKind::Remote);
  CHECK(stats[2].elapsed_ns.median == 20);
  CHECK_FALSE(stats[0].single_sample());
}

TEST_CASE("summaries reject empty or ragged input") {
  CHECK_THROWS_AS(summarize({}), Error);
  std::vector<MeasurementRecord> ragged{rec(BackendKind::Local, 1, 0, 1), rec(BackendKind::Local, 1, 1, 1),
                                        rec(BackendKind::Local, 2, 0, 1)};
  try {
    summarize(ragged);
    FAIL("ragged groups accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadValue);
  }
}

TEST_CASE("summaries match a two-pass recomputation") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const std::uint32_t reps = 1 + rng() % 12;
    std::vector<MeasurementRecord> records;
    for (std::uint32_t r = 0; r < reps; ++r) {
      records.push_back(rec(BackendKind::Vfs, 1'000'000, r, 1 + rng() % 10'000'000));
    }
    std::vector<double> ns, tp;
    for (const auto& r : records) {
      ns.push_back(static_cast<double>(r.elapsed_ns));
      tp.push_back(r.throughput_mb_s);
    }
    const auto s = summarize(records).at(0);
    const auto ref = testing::two_pass(ns);
    CHECK(testing::close_rel(s.elapsed_ns.mean, ref.mean, 1e-9));
    CHECK(testing::close_rel(s.elapsed_ns.median, ref.median, 1e-9));
    CHECK(std::fabs(s.elapsed_ns.stddev - ref.stddev) <= 1e-9 * std::max(ref.stddev, ref.mean));
    CHECK(testing::close_rel(s.throughput_mb_s.mean, testing::two_pass(tp).mean, 1e-9));
  }
}
