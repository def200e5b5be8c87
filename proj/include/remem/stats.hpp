#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "remem/bench.hpp"

namespace remem::bench {

struct Moments {
  double mean = 0;
  double median = 0;
  double stddev = 0;  // sample (n - 1); 0 when n == 1
  double min = 0;
  double max = 0;
};

struct SummaryStat {
  BackendKind backend = BackendKind::Local;
  std::uint64_t size_bytes = 0;
  std::uint64_t n = 0;
  Moments elapsed_ns;
  Moments throughput_mb_s;

  bool single_sample() const noexcept { return n == 1; }
};

Moments moments(std::span<const double> values);

/// One SummaryStat per (backend, size), ordered by backend then size.
/// Throws EmptyGroup on no records, BadValue if groups have unequal counts.
std::vector<SummaryStat> summarize(std::span<const MeasurementRecord> records);

}  // namespace remem::bench
