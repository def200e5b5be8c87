#include "json.hpp"

#include "doctest.h"
#include "remem/error.hpp"
#include "remem/inspect.hpp"
#include "remem/report.hpp"
#include "remem/vfs_backend.hpp"
#include "support.hpp"

using namespace remem;

TEST_CASE("empty root lists nothing") {
  testing::TempDir dir("inspect");
  VfsStore::open(dir.path());
  const auto report = cli::vfs_inspect(dir.path());
  CHECK(report.entries.empty());
  CHECK_FALSE(report.has_errors());
  const auto json = nlohmann::json::parse(cli::format_inspect_json(report));
  CHECK(json["allocations"].empty());
}

TEST_CASE("rows match the meta files") {
  testing::TempDir dir("inspect");
  auto store = VfsStore::open(dir.path());
  const AllocationId a = store->create(3'000'000);
  const AllocationId b = store->create(10);
  store->write(a, 0, Bytes(5000, 1));
  const auto report = cli::vfs_inspect(dir.path());
  REQUIRE(report.entries.size() == 2);
  const auto json = nlohmann::json::parse(cli::format_inspect_json(report));
  REQUIRE(json["allocations"].size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& row = json["allocations"][i];
    const auto meta = read_meta(alloc_dir(dir.path(), i == 0 ? a : b));
    CHECK(row["id"] == meta.alloc_id.value);
    CHECK(row["size_bytes"] == meta.size_bytes);
    CHECK(row["page_size"] == meta.page_size);
    CHECK(row["created_at"] == meta.created_at);
    CHECK(row["error"].is_null());
  }
  CHECK(json["allocations"][0]["page_count"] == 3);
  CHECK(json["allocations"][0]["on_disk_bytes"].get<std::uint64_t>() >= 5000);
  const std::string text = cli::format_inspect_text(report);
  CHECK(text.find("alloc-" + std::to_string(a.value)) != std::string::npos);
  CHECK(text.find("2 allocation(s)") != std::string::npos);
}

TEST_CASE("corrupt meta yields an error row") {
  testing::TempDir dir("inspect");
  auto store = VfsStore::open(dir.path());
  store->create(100);
  std::filesystem::create_directories(dir / "alloc-500");
  bench::write_text_file(dir / "alloc-500" / "meta.json", "[]");
  const auto report = cli::vfs_inspect(dir.path());
  CHECK(report.has_errors());
  const auto json = nlohmann::json::parse(cli::format_inspect_json(report));
  CHECK(json["allocations"][1]["error"].is_string());
  CHECK(cli::format_inspect_text(report).find("error:") != std::string::npos);
}

TEST_CASE("unusable roots throw") {
  testing::TempDir dir("inspect");
  CHECK_THROWS_AS(cli::vfs_inspect(dir / "missing"), Error);
  bench::write_text_file(dir / "format_version", "9\n");
  try {
    cli::vfs_inspect(dir.path());
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompatibleFormatVersion);
  }
}
