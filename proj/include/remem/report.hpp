#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "remem/bench.hpp"
#include "remem/stats.hpp"

namespace remem::bench {

inline constexpr std::string_view kRawCsvHeader =
    "backend,size_bytes,rep,elapsed_ns,throughput_mb_s,checksum";
inline constexpr std::string_view kSummaryCsvHeader =
    "backend,size_bytes,n,mean_ns,median_ns,stddev_ns,min_ns,max_ns,mean_mb_s";

std::string format_raw_csv(std::span<const MeasurementRecord> records);
std::string format_summary_csv(std::span<const SummaryStat> stats);
/// Throws BadValue naming the offending line.
std::vector<MeasurementRecord> parse_raw_csv(const std::string& text);
/// Only the columns present in the file are filled (throughput: mean only).
std::vector<SummaryStat> parse_summary_csv(const std::string& text);

/// Writes <dir>/raw.csv and <dir>/summary.csv.
void emit_csv(std::span<const SummaryStat> stats, std::span<const MeasurementRecord> records,
              const std::filesystem::path& dir);

enum class PlotMetric { ElapsedTime, Throughput };

struct PlotOptions {
  PlotMetric metric = PlotMetric::ElapsedTime;
  bool log_y = false;
  bool deterministic = false;  // omit the generation timestamp
  std::string title = "Local memory vs VFS vs remote window";
};

/// Self-contained SVG: one series per backend, x = size (MB), y = mean
/// elapsed time (ms) with min-max whiskers, or mean throughput (MB/s).
std::string render_svg(std::span<const SummaryStat> stats, const PlotOptions& options = {});
void emit_plot(std::span<const SummaryStat> stats, const std::filesystem::path& path,
               const PlotOptions& options = {});

/// Parameters of a `run`, stored next to the CSVs and read back by `verify`.
struct RunManifest {
  std::uint64_t seed = 0;
  std::uint64_t scale = 1;
  std::uint32_t repetitions = 0;
  std::vector<std::uint64_t> sizes_mb;
  std::vector<BackendKind> backends;
  double cache_fraction = 0;

  static RunManifest from_config(const BenchmarkConfig& config);
  std::vector<std::uint64_t> size_bytes() const;
};

std::string encode_manifest(const RunManifest& manifest);
RunManifest decode_manifest(const std::string& text);

struct VerifyReport {
  std::size_t records_checked = 0;
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// Re-checks per-record invariants (positive time, throughput formula to
/// 1 ulp, checksum vs pattern) and the grid shape.
VerifyReport verify_records(std::span<const MeasurementRecord> records, std::uint64_t seed,
                            const std::optional<RunManifest>& manifest = std::nullopt);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace remem::bench
