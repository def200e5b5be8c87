#pragma once

#include <cstdlib>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "remem/page_store.hpp"

namespace remem {

struct FreeDeleter {
  void operator()(void* p) const noexcept { std::free(p); }
};

/// Baseline: a plain malloc'd buffer. Single owner; disjoint-range reads may
/// run concurrently.
class LocalRegion {
 public:
  LocalRegion() = default;
  LocalRegion(AllocationId id, std::uint64_t size_bytes);

  AllocationId id() const noexcept { return id_; }
  std::uint64_t size() const noexcept { return size_; }
  std::uint8_t* data() noexcept { return buffer_.get(); }
  const std::uint8_t* data() const noexcept { return buffer_.get(); }

 private:
  AllocationId id_;
  std::uint64_t size_ = 0;
  std::unique_ptr<std::uint8_t, FreeDeleter> buffer_;
};

/// Contents are unspecified until written. Throws ZeroSize / OutOfMemory.
LocalRegion local_alloc(std::uint64_t size_bytes, AllocationId id = {});
void local_write(LocalRegion& region, std::uint64_t offset, ByteView src);
Bytes local_read(const LocalRegion& region, std::uint64_t offset, std::uint64_t len);
void local_read_into(const LocalRegion& region, std::uint64_t offset, MutableByteView dst);

class LocalStore final : public PageStore {
 public:
  explicit LocalStore(std::uint64_t page_size = kDefaultPageSize);

  BackendKind kind() const noexcept override { return BackendKind::Local; }
  AllocationId allocate(std::uint64_t size_bytes) override;
  void write(AllocationId id, std::uint64_t offset, ByteView src) override;
  void read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) override;
  void free(AllocationId id) override;
  std::uint64_t size_of(AllocationId id) const override;

  const PageTable& table() const noexcept { return table_; }

 private:
  LocalRegion& region(AllocationId id);

  std::uint64_t page_size_;
  PageTable table_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, LocalRegion> regions_;
};

}  // namespace remem
