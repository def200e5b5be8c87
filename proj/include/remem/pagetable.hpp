#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace remem {

/// Process-unique allocation identity. 0 is the invalid sentinel.
struct AllocationId {
  std::uint64_t value = 0;

  constexpr bool valid() const noexcept { return value != 0; }
  constexpr auto operator<=>(const AllocationId&) const = default;
};

enum class BackendKind : std::uint8_t { Local = 0, Vfs = 1, Remote = 2 };

inline constexpr std::size_t kBackendKinds = 3;
inline constexpr std::uint64_t kDefaultPageSize = 1ull << 20;
inline constexpr std::uint64_t kMinPageSize = 4096;

std::string_view to_string(BackendKind kind) noexcept;
/// Parses "local" / "vfs" / "remote"; throws BadValue otherwise.
BackendKind parse_backend(std::string_view name);

struct AllocationRecord {
  AllocationId id;
  std::uint64_t size_bytes = 0;
  std::uint64_t page_size = 0;
  BackendKind backend = BackendKind::Local;
  std::uint64_t created_at_ns = 0;  // steady clock

  std::uint64_t page_count() const noexcept { return (size_bytes + page_size - 1) / page_size; }
  /// Length of page `index`; the last page may be partial.
  std::uint64_t page_length(std::uint64_t index) const noexcept;
};

struct PageExtent {
  std::uint64_t page_index = 0;
  std::uint64_t intra_page_offset = 0;
  std::uint64_t length = 0;

  bool operator==(const PageExtent&) const = default;
};

struct TableStats {
  std::uint64_t live_allocations = 0;
  std::uint64_t live_bytes = 0;
  std::array<std::uint64_t, kBackendKinds> bytes_by_backend{};

  std::uint64_t bytes_for(BackendKind kind) const noexcept {
    return bytes_by_backend[static_cast<std::size_t>(kind)];
  }
  bool operator==(const TableStats&) const = default;
};

/// Throws InvalidPageSize unless page_size is a power of two >= 4096.
void validate_page_size(std::uint64_t page_size);

/// Splits [offset, offset+len) of an allocation into per-page extents in
/// ascending page order. Throws OutOfBounds if the range exceeds the allocation.
std::vector<PageExtent> resolve(const AllocationRecord& record, std::uint64_t offset,
                                std::uint64_t len);

/// Allocation bookkeeping shared by every backend. Holds geometry only, never
/// backing bytes. All members are safe to call concurrently.
class PageTable {
 public:
  AllocationRecord register_allocation(std::uint64_t size_bytes, std::uint64_t page_size,
                                       BackendKind backend);

  /// Re-registers an allocation whose id was assigned earlier (e.g. found on
  /// disk). Future fresh ids are strictly greater than `id`.
  AllocationRecord adopt(AllocationId id, std::uint64_t size_bytes, std::uint64_t page_size,
                         BackendKind backend);

  void unregister_allocation(AllocationId id);

  /// Throws UnknownAllocation if `id` is not live.
  AllocationRecord lookup(AllocationId id) const;
  bool contains(AllocationId id) const;

  std::vector<PageExtent> resolve(AllocationId id, std::uint64_t offset, std::uint64_t len) const {
    return remem::resolve(lookup(id), offset, len);
  }

  TableStats stats() const;
  std::vector<AllocationRecord> snapshot() const;

 private:
  mutable std::shared_mutex mutex_;
  std::uint64_t next_id_ = 1;
  std::unordered_map<std::uint64_t, AllocationRecord> records_;
};

}  // namespace remem
