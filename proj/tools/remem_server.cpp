// remem-server: expose pattern-filled or VFS-backed windows for one-sided reads.

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdio>
#include <memory>
#include <vector>

#include "remem/config.hpp"
#include "remem/error.hpp"
#include "remem/mapped_file.hpp"
#include "remem/pattern.hpp"
#include "remem/remote_backend.hpp"
#include "remem/vfs_backend.hpp"

using namespace remem;

int main(int argc, char** argv) {
  try {
    const cli::ToolConfig cfg = cli::parse_config(
        cli::Tool::Server, std::vector<std::string>(argv + 1, argv + argc), cli::current_environment());
    if (cfg.help_text) {
      std::fputs(cfg.help_text->c_str(), stdout);
      return 0;
    }
    spdlog::set_level(cfg.log_level == cli::LogLevel::Debug  ? spdlog::level::debug
                      : cfg.log_level == cli::LogLevel::Info ? spdlog::level::info
                      : cfg.log_level == cli::LogLevel::Warn ? spdlog::level::warn
                                                              : spdlog::level::err);

    // Termination signals are blocked in every thread and collected by sigwait.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::vector<Bytes> buffers;
    buffers.reserve(cfg.expose_sizes.size());
    std::vector<MappedFile> mappings;
    mappings.reserve(cfg.expose_vfs.size());
    std::vector<Exposure> exposures;
    for (std::uint64_t size : cfg.expose_sizes) {
      buffers.push_back(generate_pattern(cfg.fill_seed, size));
      exposures.push_back({buffers.back(), std::nullopt});
    }
    for (const auto& dir : cfg.expose_vfs) {
      const VfsAllocationMeta meta = read_meta(dir);
      mappings.emplace_back(dir / "data.bin");
      if (mappings.back().bytes().size() != meta.size_bytes) {
        throw Error(ErrorCode::IoError, dir.string() + ": data.bin length differs from meta.json");
      }
      exposures.push_back({mappings.back().bytes(), std::nullopt});
    }

    auto server = WindowServer::serve(cfg.bind, std::move(exposures));
    std::printf("listening %s\n", server->endpoint().str().c_str());
    for (const auto& w : server->windows()) {
      std::printf("window %llu size %llu\n", static_cast<unsigned long long>(w.window_id),
                  static_cast<unsigned long long>(w.size_bytes));
    }
    std::fflush(stdout);

    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}: draining", sig);
    server->shutdown();
    spdlog::info("served {} request(s)", server->requests_served());
    return 0;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::BadValue || e.code() == ErrorCode::UnknownFlag ||
                   e.code() == ErrorCode::ConflictingFlags
               ? 2
               : 1;
  }
}
