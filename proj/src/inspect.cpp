#include "remem/inspect.hpp"

#include <fmt/format.h>

#include "json.hpp"

namespace remem::cli {

bool InspectReport::has_errors() const noexcept {
  for (const auto& e : entries) {
    if (!e.error.empty()) return true;
  }
  return false;
}

InspectReport vfs_inspect(const std::filesystem::path& root) {
  InspectReport report;
  report.entries = scan_root(root);
  report.root = root;
  return report;
}

std::string format_inspect_text(const InspectReport& report) {
  std::string out = fmt::format("{:<20} {:>14} {:>10} {:>7} {:>14}  {}\n", "allocation", "size_bytes",
                                "page_size", "pages", "on_disk_bytes", "status");
  for (const auto& e : report.entries) {
    const std::string name = e.dir.filename().string();
    if (e.meta) {
      const std::uint64_t pages = (e.meta->size_bytes + e.meta->page_size - 1) / e.meta->page_size;
      out += fmt::format("{:<20} {:>14} {:>10} {:>7} {:>14}  {}\n", name, e.meta->size_bytes,
                         e.meta->page_size, pages, e.on_disk_bytes,
                         e.error.empty() ? "ok" : "error: " + e.error);
    } else {
      out += fmt::format("{:<20} {:>14} {:>10} {:>7} {:>14}  error: {}\n", name, "-", "-", "-", "-",
                         e.error);
    }
  }
  out += fmt::format("{} allocation(s) under {}\n", report.entries.size(), report.root.string());
  return out;
}

std::string format_inspect_json(const InspectReport& report) {
  nlohmann::ordered_json j;
  j["root"] = report.root.string();
  j["allocations"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json row;
    row["dir"] = e.dir.filename().string();
    if (e.meta) {
      row["id"] = e.meta->alloc_id.value;
      row["size_bytes"] = e.meta->size_bytes;
      row["page_size"] = e.meta->page_size;
      row["page_count"] = (e.meta->size_bytes + e.meta->page_size - 1) / e.meta->page_size;
      row["created_at"] = e.meta->created_at;
    } else {
      row["id"] = nullptr;
    }
    row["data_length"] = e.data_length;
    row["on_disk_bytes"] = e.on_disk_bytes;
    row["error"] = e.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(e.error);
    j["allocations"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

}  // namespace remem::cli
