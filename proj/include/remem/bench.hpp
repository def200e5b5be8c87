#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "remem/net.hpp"
#include "remem/page_cache.hpp"
#include "remem/pagetable.hpp"

namespace remem {

class VfsStore;

namespace bench {

inline constexpr std::uint64_t kBytesPerMb = 1'000'000;  // decimal MB

/// Sweep definition. Defaults: 100..1000 MB in steps of 100, 10 repetitions each.
struct BenchmarkConfig {
  std::vector<BackendKind> backends{BackendKind::Local, BackendKind::Vfs, BackendKind::Remote};
  std::vector<std::uint64_t> sizes_mb{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::uint32_t repetitions = 10;
  std::uint64_t pattern_seed = 42;
  std::uint64_t scale = 1;
  std::filesystem::path vfs_root;
  std::optional<net::Endpoint> endpoint;  // unset: loopback server started in-process
  double cache_fraction = 0.2;
  std::uint64_t page_size = kDefaultPageSize;
  bool cold = false;

  /// Throws BadValue on an empty/unsorted size list, zero reps or scale.
  void validate() const;
  std::uint64_t size_bytes(std::size_t index) const;
  std::vector<std::uint64_t> all_size_bytes() const;
};

struct MeasurementRecord {
  BackendKind backend = BackendKind::Local;
  std::uint64_t size_bytes = 0;
  std::uint32_t rep = 0;
  std::uint64_t elapsed_ns = 0;
  double throughput_mb_s = 0;
  std::uint64_t checksum = 0;
  std::uint64_t setup_ns = 0;          // untimed-region cost, reported separately
  std::optional<CacheStats> cache;     // VFS only: counters accrued during this rep
};

/// (size / 10^6) / (elapsed / 10^9).
double throughput_mb_s(std::uint64_t size_bytes, std::uint64_t elapsed_ns) noexcept;

/// malloc'd destination (pre-faulted, untimed) + one timed memcpy per rep.
std::vector<MeasurementRecord> run_local(std::uint64_t size_bytes, std::uint32_t reps,
                                         std::uint64_t seed);
/// Provisions an allocation (untimed), then times a full sequential read per rep.
std::vector<MeasurementRecord> run_vfs(std::uint64_t size_bytes, std::uint32_t reps,
                                       std::uint64_t seed, VfsStore& store, bool cold = false);
/// Times a full read of a pattern-filled window of at least size_bytes.
std::vector<MeasurementRecord> run_remote(std::uint64_t size_bytes, std::uint32_t reps,
                                          std::uint64_t seed, const net::Endpoint& endpoint);

using Progress = std::function<void(BackendKind, std::uint64_t size_bytes)>;

/// Full sweep. Every record's checksum is verified against the pattern;
/// a mismatch throws IntegrityError.
std::vector<MeasurementRecord> run_benchmark(const BenchmarkConfig& config,
                                             const Progress& progress = {});

}  // namespace bench
}  // namespace remem
