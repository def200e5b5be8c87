// remem-bench: run / plot / verify / vfs-inspect.

#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <map>

#include "remem/config.hpp"
#include "remem/error.hpp"
#include "remem/inspect.hpp"
#include "remem/report.hpp"
#include "remem/stats.hpp"

namespace fs = std::filesystem;
using namespace remem;

namespace {

void set_log_level(cli::LogLevel level) {
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  switch (level) {
    case cli::LogLevel::Error: spdlog::set_level(spdlog::level::err); break;
    case cli::LogLevel::Warn: spdlog::set_level(spdlog::level::warn); break;
    case cli::LogLevel::Info: spdlog::set_level(spdlog::level::info); break;
    case cli::LogLevel::Debug: spdlog::set_level(spdlog::level::debug); break;
  }
}

// Qualitative comparison against the local baseline; informational only.
void log_ordering(const std::vector<bench::SummaryStat>& stats) {
  std::map<std::uint64_t, double> local;
  for (const auto& s : stats) {
    if (s.backend == BackendKind::Local) local[s.size_bytes] = s.elapsed_ns.mean;
  }
  for (const auto& s : stats) {
    if (s.backend == BackendKind::Local || !local.contains(s.size_bytes)) continue;
    spdlog::info("{:>6} {:>12} B: mean {:>12.0f} ns = {:6.2f}x local", to_string(s.backend),
                 s.size_bytes, s.elapsed_ns.mean, s.elapsed_ns.mean / local[s.size_bytes]);
  }
}

int cmd_run(const cli::ToolConfig& cfg) {
  const auto& b = cfg.bench;
  spdlog::info("sweep: {} size(s) x {} rep(s), scale 1/{}, seed {}", b.sizes_mb.size(),
               b.repetitions, b.scale, b.pattern_seed);
  const auto records = bench::run_benchmark(b, [](BackendKind kind, std::uint64_t size) {
    spdlog::debug("{} {} bytes", to_string(kind), size);
  });
  for (const auto& r : records) {
    if (r.rep == 0 && r.setup_ns > 0) {
      spdlog::debug("{} {} B setup {} ns", to_string(r.backend), r.size_bytes, r.setup_ns);
    }
    if (r.cache) {
      spdlog::debug("vfs {} B rep {}: hits {} misses {} evictions {}", r.size_bytes, r.rep,
                    r.cache->hits, r.cache->misses, r.cache->evictions);
    }
  }

  const auto stats = bench::summarize(records);
  bench::emit_csv(stats, records, cfg.out_dir);
  bench::write_text_file(cfg.out_dir / "manifest.json",
                         bench::encode_manifest(bench::RunManifest::from_config(b)));
  bench::PlotOptions plot;
  plot.deterministic = cfg.deterministic;
  bench::emit_plot(stats, cfg.out_dir / "plot.svg", plot);
  log_ordering(stats);

  const auto report = bench::verify_records(records, b.pattern_seed,
                                            bench::RunManifest::from_config(b));
  for (const auto& p : report.problems) spdlog::error("{}", p);
  spdlog::info("{} records written to {}", records.size(), cfg.out_dir.string());
  return report.ok() ? 0 : 1;
}

int cmd_plot(const cli::ToolConfig& cfg) {
  const auto stats = bench::parse_summary_csv(bench::read_text_file(cfg.in));
  bench::PlotOptions plot;
  plot.metric = cfg.metric;
  plot.log_y = cfg.log_y;
  plot.deterministic = cfg.deterministic;
  bench::emit_plot(stats, cfg.plot_out, plot);
  spdlog::info("wrote {}", cfg.plot_out.string());
  return 0;
}

int cmd_verify(const cli::ToolConfig& cfg) {
  const auto records = bench::parse_raw_csv(bench::read_text_file(cfg.in));
  std::optional<bench::RunManifest> manifest;
  const fs::path manifest_path = cfg.in.parent_path() / "manifest.json";
  std::error_code ec;
  if (fs::exists(manifest_path, ec)) {
    manifest = bench::decode_manifest(bench::read_text_file(manifest_path));
  }
  const std::uint64_t seed = cfg.verify_seed.value_or(manifest ? manifest->seed : 42);
  const auto report = bench::verify_records(records, seed, manifest);
  for (const auto& p : report.problems) std::printf("FAIL %s\n", p.c_str());
  std::printf("%s: %zu records, %zu problem(s)\n", report.ok() ? "OK" : "FAILED",
              report.records_checked, report.problems.size());
  return report.ok() ? 0 : 1;
}

int cmd_inspect(const cli::ToolConfig& cfg) {
  const auto report = cli::vfs_inspect(cfg.vfs_root);
  const std::string text =
      cfg.json ? cli::format_inspect_json(report) : cli::format_inspect_text(report);
  std::fwrite(text.data(), 1, text.size(), stdout);
  return report.has_errors() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const cli::ToolConfig cfg = cli::parse_config(
        cli::Tool::Bench, std::vector<std::string>(argv + 1, argv + argc), cli::current_environment());
    if (cfg.help_text) {
      std::fputs(cfg.help_text->c_str(), stdout);
      return 0;
    }
    set_log_level(cfg.log_level);
    switch (cfg.command) {
      case cli::Subcommand::BenchRun: return cmd_run(cfg);
      case cli::Subcommand::BenchPlot: return cmd_plot(cfg);
      case cli::Subcommand::BenchVerify: return cmd_verify(cfg);
      case cli::Subcommand::VfsInspect: return cmd_inspect(cfg);
      case cli::Subcommand::Server: break;
    }
    return 2;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    switch (e.code()) {
      case ErrorCode::UnknownFlag:
      case ErrorCode::ConflictingFlags:
      case ErrorCode::BadValue:
      case ErrorCode::ConfigError: return 2;
      default: return 1;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
