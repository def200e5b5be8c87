#include "remem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "remem/error.hpp"

namespace remem::bench {

Moments moments(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyGroup, "no samples");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  Moments m;
  m.min = sorted.front();
  m.max = sorted.back();
  m.median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;

  // Welford: single pass, stable for nanosecond-scale magnitudes.
  double mean = 0, m2 = 0;
  std::size_t k = 0;
  for (double x : values) {
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  m.mean = mean;
  m.stddev = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  return m;
}

std::vector<SummaryStat> summarize(std::span<const MeasurementRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyGroup, "no measurement records");
  std::map<std::pair<int, std::uint64_t>, std::vector<const MeasurementRecord*>> groups;
  for (const auto& r : records) {
    groups[{static_cast<int>(r.backend), r.size_bytes}].push_back(&r);
  }

  std::vector<SummaryStat> out;
  out.reserve(groups.size());
  const std::size_t expected = groups.begin()->second.size();
  for (const auto& [key, group] : groups) {
    if (group.size() != expected) {
      throw Error(ErrorCode::BadValue, "group (" + std::string(to_string(group.front()->backend)) +
                                           ", " + std::to_string(key.second) + ") has " +
                                           std::to_string(group.size()) + " records, expected " +
                                           std::to_string(expected));
    }
    std::vector<double> elapsed, throughput;
    elapsed.reserve(group.size());
    throughput.reserve(group.size());
    for (const auto* r : group) {
      elapsed.push_back(static_cast<double>(r->elapsed_ns));
      throughput.push_back(r->throughput_mb_s);
    }
    SummaryStat s;
    s.backend = group.front()->backend;
    s.size_bytes = key.second;
    s.n = group.size();
    s.elapsed_ns = moments(elapsed);
    s.throughput_mb_s = moments(throughput);
    out.push_back(s);
  }
  return out;
}

}  // namespace remem::bench
