#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "remem/bench.hpp"
#include "remem/net.hpp"
#include "remem/report.hpp"

namespace remem::cli {

enum class Tool { Bench, Server };
enum class Subcommand { BenchRun, BenchPlot, BenchVerify, Server, VfsInspect };
enum class LogLevel { Error, Warn, Info, Debug };

/// Merged configuration. Precedence: flags > environment > config file > defaults.
struct ToolConfig {
  Subcommand command = Subcommand::BenchRun;
  std::optional<std::string> help_text;  // set when --help was requested

  LogLevel log_level = LogLevel::Info;
  bool deterministic = false;

  // bench run
  bench::BenchmarkConfig bench;
  std::filesystem::path out_dir = "results";
  bool embedded_server = false;

  // bench plot / verify
  std::filesystem::path in;
  std::filesystem::path plot_out = "plot.svg";
  bench::PlotMetric metric = bench::PlotMetric::ElapsedTime;
  bool log_y = false;
  std::optional<std::uint64_t> verify_seed;

  // server
  net::Endpoint bind{"0.0.0.0", net::kDefaultPort};
  std::vector<std::uint64_t> expose_sizes;
  std::uint64_t fill_seed = 42;
  std::vector<std::filesystem::path> expose_vfs;

  // vfs-inspect
  std::filesystem::path vfs_root;
  bool json = false;
};

using Environment = std::map<std::string, std::string>;

/// `argv` excludes the program name. `config_file_text` overrides reading the
/// file named by --config (used by tests). Throws Error with UnknownFlag,
/// ConflictingFlags or BadValue (message names the offending key).
ToolConfig parse_config(Tool tool, const std::vector<std::string>& argv, const Environment& env,
                        const std::optional<std::string>& config_file_text = std::nullopt);

Environment current_environment();

/// "100..1000:100", "100,200,500" or "300".
std::vector<std::uint64_t> parse_sizes(const std::string& text);
std::vector<BackendKind> parse_backends(const std::string& text);
/// Byte count with optional K/M/G (binary) or KB/MB/GB (decimal) suffix.
std::uint64_t parse_byte_size(const std::string& text);

}  // namespace remem::cli
