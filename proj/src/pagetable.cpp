#include "remem/pagetable.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <string>

#include "remem/error.hpp"

namespace remem {

namespace {

std::uint64_t steady_now_ns() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        std::chrono::steady_clock::now().time_since_epoch())
                                        .count());
}

void validate_geometry(std::uint64_t size_bytes, std::uint64_t page_size) {
  if (size_bytes == 0) throw Error(ErrorCode::ZeroSize, "allocation size must be >= 1");
  validate_page_size(page_size);
}

}  // namespace

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::Local: return "local";
    case BackendKind::Vfs: return "vfs";
    case BackendKind::Remote: return "remote";
  }
  return "unknown";
}

BackendKind parse_backend(std::string_view name) {
  if (name == "local") return BackendKind::Local;
  if (name == "vfs") return BackendKind::Vfs;
  if (name == "remote") return BackendKind::Remote;
  throw Error(ErrorCode::BadValue, "unknown backend '" + std::string(name) + "'");
}

std::uint64_t AllocationRecord::page_length(std::uint64_t index) const noexcept {
  const std::uint64_t start = index * page_size;
  if (start >= size_bytes) return 0;
  return std::min(page_size, size_bytes - start);
}

void validate_page_size(std::uint64_t page_size) {
  if (page_size < kMinPageSize || !std::has_single_bit(page_size)) {
    throw Error(ErrorCode::InvalidPageSize,
                "page size " + std::to_string(page_size) + " is not a power of two >= 4096");
  }
}

std::vector<PageExtent> resolve(const AllocationRecord& record, std::uint64_t offset,
                                std::uint64_t len) {
  if (offset > record.size_bytes || len > record.size_bytes - offset) {
    throw Error(ErrorCode::OutOfBounds, "range [" + std::to_string(offset) + ", +" +
                                            std::to_string(len) + ") exceeds allocation of " +
                                            std::to_string(record.size_bytes) + " bytes");
  }
  std::vector<PageExtent> extents;
  if (len == 0) return extents;

  const std::uint64_t shift = static_cast<std::uint64_t>(std::countr_zero(record.page_size));
  const std::uint64_t mask = record.page_size - 1;
  const std::uint64_t end = offset + len;
  extents.reserve(((end - 1) >> shift) - (offset >> shift) + 1);
  for (std::uint64_t pos = offset; pos < end;) {
    const std::uint64_t intra = pos & mask;
    const std::uint64_t take = std::min(record.page_size - intra, end - pos);
    extents.push_back({pos >> shift, intra, take});
    pos += take;
  }
  return extents;
}

AllocationRecord PageTable::register_allocation(std::uint64_t size_bytes, std::uint64_t page_size,
                                                BackendKind backend) {
  validate_geometry(size_bytes, page_size);
  std::unique_lock lock(mutex_);
  AllocationRecord record{AllocationId{next_id_++}, size_bytes, page_size, backend, steady_now_ns()};
  records_.emplace(record.id.value, record);
  return record;
}

AllocationRecord PageTable::adopt(AllocationId id, std::uint64_t size_bytes,
                                  std::uint64_t page_size, BackendKind backend) {
  validate_geometry(size_bytes, page_size);
  if (!id.valid()) throw Error(ErrorCode::UnknownAllocation, "cannot adopt the invalid id 0");
  std::unique_lock lock(mutex_);
  if (records_.contains(id.value)) {
    throw Error(ErrorCode::DuplicateAllocation, "id " + std::to_string(id.value) + " is live");
  }
  AllocationRecord record{id, size_bytes, page_size, backend, steady_now_ns()};
  records_.emplace(id.value, record);
  next_id_ = std::max(next_id_, id.value + 1);
  return record;
}

void PageTable::unregister_allocation(AllocationId id) {
  std::unique_lock lock(mutex_);
  if (records_.erase(id.value) == 0) {
    throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
  }
}

AllocationRecord PageTable::lookup(AllocationId id) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(id.value);
  if (it == records_.end()) {
    throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
  }
  return it->second;
}

bool PageTable::contains(AllocationId id) const {
  std::shared_lock lock(mutex_);
  return records_.contains(id.value);
}

TableStats PageTable::stats() const {
  std::shared_lock lock(mutex_);
  TableStats out;
  for (const auto& [_, record] : records_) {
    ++out.live_allocations;
    out.live_bytes += record.size_bytes;
    out.bytes_by_backend[static_cast<std::size_t>(record.backend)] += record.size_bytes;
  }
  return out;
}

std::vector<AllocationRecord> PageTable::snapshot() const {
  std::shared_lock lock(mutex_);
  std::vector<AllocationRecord> out;
  out.reserve(records_.size());
  for (const auto& [_, record] : records_) out.push_back(record);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace remem
