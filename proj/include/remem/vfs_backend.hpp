#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "remem/page_cache.hpp"
#include "remem/page_store.hpp"
#include "remem/unique_fd.hpp"

namespace remem {

inline constexpr int kVfsFormatVersion = 1;
inline constexpr double kDefaultCacheFraction = 0.2;
inline constexpr const char* kVfsRootEnv = "REMEM_VFS_ROOT";

enum class CachePolicy { None, Lru };

/// Contents of `<root>/alloc-<id>/meta.json`.
struct VfsAllocationMeta {
  int format_version = kVfsFormatVersion;
  AllocationId alloc_id;
  std::uint64_t size_bytes = 0;
  std::uint64_t page_size = kDefaultPageSize;
  std::string checksum_algo = "fnv1a64";
  std::string created_at;  // ISO-8601 UTC

  bool operator==(const VfsAllocationMeta&) const = default;
};

std::string encode_meta(const VfsAllocationMeta& meta);
/// Throws IoError on malformed text, IncompatibleFormatVersion on a version mismatch.
VfsAllocationMeta decode_meta(const std::string& text);
VfsAllocationMeta read_meta(const std::filesystem::path& alloc_dir);

std::filesystem::path alloc_dir(const std::filesystem::path& root, AllocationId id);
/// Parses "alloc-<id>"; nullopt for anything else.
std::optional<AllocationId> parse_alloc_dir_name(const std::string& name);

/// One `alloc-*` entry found on disk; `error` is set when its metadata is unusable.
struct VfsDiskEntry {
  std::filesystem::path dir;
  std::optional<VfsAllocationMeta> meta;
  std::uint64_t data_length = 0;   // apparent size of data.bin
  std::uint64_t on_disk_bytes = 0; // allocated blocks
  std::string error;
};

/// Lists every alloc-* directory under root, sorted by id. Throws
/// IoError / IncompatibleFormatVersion for problems with the root itself.
std::vector<VfsDiskEntry> scan_root(const std::filesystem::path& root);

struct VfsOptions {
  std::uint64_t page_size = kDefaultPageSize;
  double cache_fraction = kDefaultCacheFraction;
  CachePolicy cache_policy = CachePolicy::Lru;
  /// Register allocations already present under the root when opening.
  bool attach_existing = true;
};

/// Allocations stored as `<root>/alloc-<id>/data.bin` on a shared directory,
/// read through an optional per-allocation LRU page cache.
///
/// Sharing discipline: many reader processes, at most one writer; another
/// handle sees writes only after sync(). Thread-safe within a process.
class VfsStore final : public PageStore {
 public:
  /// Creates or re-attaches to `root`; existing allocations become visible.
  static std::unique_ptr<VfsStore> open(const std::filesystem::path& root, VfsOptions options = {});

  VfsStore(const VfsStore&) = delete;
  VfsStore& operator=(const VfsStore&) = delete;
  ~VfsStore() override;

  BackendKind kind() const noexcept override { return BackendKind::Vfs; }
  AllocationId allocate(std::uint64_t size_bytes) override { return create(size_bytes); }
  AllocationId create(std::uint64_t size_bytes);
  void write(AllocationId id, std::uint64_t offset, ByteView src) override;
  void read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) override;
  void free(AllocationId id) override;
  std::uint64_t size_of(AllocationId id) const override;

  void sync(AllocationId id);
  CacheStats cache_stats(AllocationId id) const;
  /// Drops cached pages of every allocation (and asks the OS to drop its
  /// page cache for the data files). Counters are kept.
  void drop_caches();

  const std::filesystem::path& root() const noexcept { return root_; }
  const VfsOptions& options() const noexcept { return options_; }
  std::filesystem::path data_path(AllocationId id) const;
  const PageTable& table() const noexcept { return table_; }
  std::vector<AllocationId> allocations() const;

 private:
  struct Allocation {
    AllocationRecord record;
    UniqueFd fd;
    mutable std::mutex mutex;  // guards cache and serializes file I/O on this allocation
    LruPageCache cache;
  };

  VfsStore(std::filesystem::path root, VfsOptions options);
  void attach_existing();
  std::shared_ptr<Allocation> attach(const VfsAllocationMeta& meta);
  std::shared_ptr<Allocation> find(AllocationId id) const;
  std::shared_ptr<Allocation> get(AllocationId id);
  std::uint64_t capacity_for(const AllocationRecord& record) const;

  std::filesystem::path root_;
  VfsOptions options_;
  PageTable table_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, std::shared_ptr<Allocation>> allocations_;
};

}  // namespace remem
