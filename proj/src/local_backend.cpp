#include "remem/local_backend.hpp"

#include <cstring>
#include <string>

#include "remem/error.hpp"

namespace remem {

void check_bounds(std::uint64_t size, std::uint64_t offset, std::uint64_t len) {
  if (offset > size || len > size - offset) {
    throw Error(ErrorCode::OutOfBounds, "range [" + std::to_string(offset) + ", +" +
                                            std::to_string(len) + ") exceeds " +
                                            std::to_string(size) + " bytes");
  }
}

LocalRegion::LocalRegion(AllocationId id, std::uint64_t size_bytes) : id_(id), size_(size_bytes) {
  if (size_bytes == 0) throw Error(ErrorCode::ZeroSize, "local_alloc of 0 bytes");
  buffer_.reset(static_cast<std::uint8_t*>(std::malloc(size_bytes)));
  if (!buffer_) {
    throw Error(ErrorCode::OutOfMemory, "malloc(" + std::to_string(size_bytes) + ") failed");
  }
}

LocalRegion local_alloc(std::uint64_t size_bytes, AllocationId id) {
  return LocalRegion(id, size_bytes);
}

void local_write(LocalRegion& region, std::uint64_t offset, ByteView src) {
  check_bounds(region.size(), offset, src.size());
  if (!src.empty()) std::memcpy(region.data() + offset, src.data(), src.size());
}

void local_read_into(const LocalRegion& region, std::uint64_t offset, MutableByteView dst) {
  check_bounds(region.size(), offset, dst.size());
  if (!dst.empty()) std::memcpy(dst.data(), region.data() + offset, dst.size());
}

Bytes local_read(const LocalRegion& region, std::uint64_t offset, std::uint64_t len) {
  check_bounds(region.size(), offset, len);
  Bytes out(len);
  local_read_into(region, offset, out);
  return out;
}

LocalStore::LocalStore(std::uint64_t page_size) : page_size_(page_size) {
  validate_page_size(page_size);
}

AllocationId LocalStore::allocate(std::uint64_t size_bytes) {
  const auto record = table_.register_allocation(size_bytes, page_size_, BackendKind::Local);
  try {
    LocalRegion region = local_alloc(size_bytes, record.id);
    std::lock_guard lock(mutex_);
    regions_.emplace(record.id.value, std::move(region));
  } catch (...) {
    table_.unregister_allocation(record.id);
    throw;
  }
  return record.id;
}

LocalRegion& LocalStore::region(AllocationId id) {
  std::lock_guard lock(mutex_);
  auto it = regions_.find(id.value);
  if (it == regions_.end()) {
    throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
  }
  // unordered_map nodes are stable; the region outlives the lock until free().
  return it->second;
}

void LocalStore::write(AllocationId id, std::uint64_t offset, ByteView src) {
  local_write(region(id), offset, src);
}

void LocalStore::read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) {
  local_read_into(region(id), offset, dst);
}

void LocalStore::free(AllocationId id) {
  table_.unregister_allocation(id);
  std::lock_guard lock(mutex_);
  regions_.erase(id.value);
}

std::uint64_t LocalStore::size_of(AllocationId id) const { return table_.lookup(id).size_bytes; }

}  // namespace remem
