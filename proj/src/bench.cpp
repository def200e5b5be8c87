#include "remem/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>

#include "remem/error.hpp"
#include "remem/local_backend.hpp"
#include "remem/pattern.hpp"
#include "remem/remote_backend.hpp"
#include "remem/vfs_backend.hpp"

namespace remem::bench {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t nanos_since(Clock::time_point start) {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  // Elapsed time is clamped to at least 1 ns.
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(ns));
}

MeasurementRecord make_record(BackendKind backend, std::uint64_t size, std::uint32_t rep,
                              std::uint64_t elapsed_ns, std::uint64_t sum) {
  MeasurementRecord r;
  r.backend = backend;
  r.size_bytes = size;
  r.rep = rep;
  r.elapsed_ns = elapsed_ns;
  r.throughput_mb_s = throughput_mb_s(size, elapsed_ns);
  r.checksum = sum;
  return r;
}

void check_integrity(const MeasurementRecord& r, std::uint64_t expected) {
  if (r.checksum != expected) {
    throw Error(ErrorCode::IntegrityError,
                std::string(to_string(r.backend)) + " size " + std::to_string(r.size_bytes) +
                    " rep " + std::to_string(r.rep) + ": checksum " + std::to_string(r.checksum) +
                    " != expected " + std::to_string(expected));
  }
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (backends.empty()) throw Error(ErrorCode::BadValue, "backends: at least one required");
  if (sizes_mb.empty()) throw Error(ErrorCode::BadValue, "sizes: at least one required");
  for (std::size_t i = 1; i < sizes_mb.size(); ++i) {
    if (sizes_mb[i] <= sizes_mb[i - 1]) {
      throw Error(ErrorCode::BadValue, "sizes: must be strictly increasing");
    }
  }
  if (repetitions < 1) throw Error(ErrorCode::BadValue, "reps: must be >= 1");
  if (scale < 1) throw Error(ErrorCode::BadValue, "scale: must be >= 1");
  if (!(cache_fraction >= 0.0 && cache_fraction <= 1.0)) {
    throw Error(ErrorCode::BadValue, "cache-fraction: must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < sizes_mb.size(); ++i) {
    if (size_bytes(i) == 0) throw Error(ErrorCode::BadValue, "scale: reduces a size to 0 bytes");
  }
  validate_page_size(page_size);
}

std::uint64_t BenchmarkConfig::size_bytes(std::size_t index) const {
  return sizes_mb.at(index) * kBytesPerMb / scale;
}

std::vector<std::uint64_t> BenchmarkConfig::all_size_bytes() const {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < sizes_mb.size(); ++i) out.push_back(size_bytes(i));
  return out;
}

double throughput_mb_s(std::uint64_t size_bytes, std::uint64_t elapsed_ns) noexcept {
  return (static_cast<double>(size_bytes) / 1e6) / (static_cast<double>(elapsed_ns) / 1e9);
}

std::vector<MeasurementRecord> run_local(std::uint64_t size_bytes, std::uint32_t reps,
                                         std::uint64_t seed) {
  LocalRegion source = local_alloc(size_bytes);
  fill_pattern(seed, MutableByteView(source.data(), size_bytes));

  std::vector<MeasurementRecord> out;
  out.reserve(reps);
  for (std::uint32_t rep = 0; rep < reps; ++rep) {
    const auto setup_start = Clock::now();
    LocalRegion dest = local_alloc(size_bytes);
    std::memset(dest.data(), 0, size_bytes);
    const std::uint64_t setup_ns = nanos_since(setup_start);

    const auto start = Clock::now();
    std::memcpy(dest.data(), source.data(), size_bytes);
    const std::uint64_t elapsed = nanos_since(start);

    auto r = make_record(BackendKind::Local, size_bytes, rep, elapsed,
                         checksum(ByteView(dest.data(), size_bytes)));
    r.setup_ns = setup_ns;
    out.push_back(r);
  }
  return out;
}

std::vector<MeasurementRecord> run_vfs(std::uint64_t size_bytes, std::uint32_t reps,
                                       std::uint64_t seed, VfsStore& store, bool cold) {
  const auto setup_start = Clock::now();
  const AllocationId id = store.create(size_bytes);
  {
    // Provisioned in chunks of at most 8 MiB.
    constexpr std::uint64_t kChunk = 8ull << 20;
    const Bytes pattern = generate_pattern(seed, size_bytes);
    for (std::uint64_t off = 0; off < size_bytes; off += kChunk) {
      const std::uint64_t n = std::min(kChunk, size_bytes - off);
      store.write(id, off, ByteView(pattern.data() + off, n));
    }
  }
  store.sync(id);
  const std::uint64_t setup_ns = nanos_since(setup_start);

  std::vector<MeasurementRecord> out;
  out.reserve(reps);
  try {
    for (std::uint32_t rep = 0; rep < reps; ++rep) {
      if (cold) store.drop_caches();
      const CacheStats before = store.cache_stats(id);

      const auto start = Clock::now();
      const Bytes data = store.read(id, 0, size_bytes);
      const std::uint64_t elapsed = nanos_since(start);

      const CacheStats after = store.cache_stats(id);
      auto r = make_record(BackendKind::Vfs, size_bytes, rep, elapsed, checksum(data));
      r.setup_ns = rep == 0 ? setup_ns : 0;
      r.cache = CacheStats{after.hits - before.hits, after.misses - before.misses,
                           after.evictions - before.evictions, after.resident_pages};
      out.push_back(r);
    }
  } catch (...) {
    store.free(id);
    throw;
  }
  store.free(id);
  return out;
}

std::vector<MeasurementRecord> run_remote(std::uint64_t size_bytes, std::uint32_t reps,
                                          std::uint64_t seed, const net::Endpoint& endpoint) {
  (void)seed;
  const auto setup_start = Clock::now();
  const auto windows = list_windows(endpoint);
  std::optional<wire::WindowInfo> chosen;
  for (const auto& w : windows) {
    if (w.size_bytes < size_bytes) continue;
    if (!chosen || w.size_bytes < chosen->size_bytes) chosen = w;
  }
  if (!chosen) {
    throw Error(ErrorCode::ConfigError, "no window of at least " + std::to_string(size_bytes) +
                                            " bytes at " + endpoint.str());
  }
  RemoteWindow window = RemoteWindow::open(endpoint, WindowId{chosen->window_id});
  const std::uint64_t setup_ns = nanos_since(setup_start);

  std::vector<MeasurementRecord> out;
  out.reserve(reps);
  for (std::uint32_t rep = 0; rep < reps; ++rep) {
    const auto start = Clock::now();
    const Bytes data = window.read(0, size_bytes);
    const std::uint64_t elapsed = nanos_since(start);
    auto r = make_record(BackendKind::Remote, size_bytes, rep, elapsed, checksum(data));
    r.setup_ns = rep == 0 ? setup_ns : 0;
    out.push_back(r);
  }
  return out;
}

std::vector<MeasurementRecord> run_benchmark(const BenchmarkConfig& config,
                                             const Progress& progress) {
  config.validate();
  const bool wants_vfs = std::find(config.backends.begin(), config.backends.end(),
                                   BackendKind::Vfs) != config.backends.end();
  std::unique_ptr<VfsStore> store;
  if (wants_vfs) {
    if (config.vfs_root.empty()) throw Error(ErrorCode::ConfigError, "vfs backend needs --vfs-root");
    VfsOptions options;
    options.page_size = config.page_size;
    options.cache_fraction = config.cache_fraction;
    store = VfsStore::open(config.vfs_root, options);
  }

  std::vector<MeasurementRecord> all;
  for (BackendKind backend : config.backends) {
    for (std::uint64_t size : config.all_size_bytes()) {
      if (progress) progress(backend, size);
      const std::uint64_t expected = checksum(generate_pattern(config.pattern_seed, size));
      std::vector<MeasurementRecord> records;
      switch (backend) {
        case BackendKind::Local:
          records = run_local(size, config.repetitions, config.pattern_seed);
          break;
        case BackendKind::Vfs:
          records = run_vfs(size, config.repetitions, config.pattern_seed, *store, config.cold);
          break;
        case BackendKind::Remote:
          if (config.endpoint) {
            records = run_remote(size, config.repetitions, config.pattern_seed, *config.endpoint);
          } else {
            const Bytes region = generate_pattern(config.pattern_seed, size);
            auto server = WindowServer::serve(net::Endpoint{"127.0.0.1", 0}, {{region, {}}});
            records = run_remote(size, config.repetitions, config.pattern_seed, server->endpoint());
            server->shutdown();
          }
          break;
      }
      for (const auto& r : records) check_integrity(r, expected);
      all.insert(all.end(), records.begin(), records.end());
    }
  }
  return all;
}

}  // namespace remem::bench
