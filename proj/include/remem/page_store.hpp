#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "remem/pagetable.hpp"

namespace remem {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using MutableByteView = std::span<std::uint8_t>;

/// The uniform allocate/read/write/free surface shared by the local, VFS and
/// remote backends.
class PageStore {
 public:
  virtual ~PageStore() = default;

  virtual BackendKind kind() const noexcept = 0;

  virtual AllocationId allocate(std::uint64_t size_bytes) = 0;
  virtual void write(AllocationId id, std::uint64_t offset, ByteView src) = 0;
  /// Fills `dst` with the bytes at [offset, offset + dst.size()).
  virtual void read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) = 0;
  virtual void free(AllocationId id) = 0;
  virtual std::uint64_t size_of(AllocationId id) const = 0;

  Bytes read(AllocationId id, std::uint64_t offset, std::uint64_t len) {
    Bytes out(len);
    if (len != 0) read_into(id, offset, out);
    return out;
  }
};

/// Throws OutOfBounds unless [offset, offset+len) lies within `size`.
void check_bounds(std::uint64_t size, std::uint64_t offset, std::uint64_t len);

}  // namespace remem
