#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "remem/vfs_backend.hpp"

namespace remem::cli {

struct InspectReport {
  std::filesystem::path root;
  std::vector<VfsDiskEntry> entries;

  bool has_errors() const noexcept;
};

/// Throws IoError / IncompatibleFormatVersion for an unusable root; bad
/// entries are reported per row instead.
InspectReport vfs_inspect(const std::filesystem::path& root);
std::string format_inspect_text(const InspectReport& report);
/// Stable machine format: {"root":..., "allocations":[{id,size_bytes,...}]}.
std::string format_inspect_json(const InspectReport& report);

}  // namespace remem::cli
