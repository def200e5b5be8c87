#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

namespace remem {

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t resident_pages = 0;

  bool operator==(const CacheStats&) const = default;
};

/// Fixed-capacity LRU map from page index to page bytes. Not synchronized.
class LruPageCache {
 public:
  explicit LruPageCache(std::uint64_t capacity_pages = 0) : capacity_(capacity_pages) {}

  std::uint64_t capacity() const noexcept { return capacity_; }

  /// Returns the cached page and marks it most recently used, or nullptr.
  /// Counts a hit or a miss.
  const std::vector<std::uint8_t>* lookup(std::uint64_t page);

  /// Inserts a page (after a miss), evicting the least recently used page when
  /// over capacity. No-op when capacity is 0.
  void insert(std::uint64_t page, std::vector<std::uint8_t> bytes);

  /// Counts a miss for an access that bypasses the cache entirely.
  void record_bypass() noexcept { ++stats_.misses; }

  void invalidate(std::uint64_t page);
  void clear();

  CacheStats stats() const noexcept {
    CacheStats s = stats_;
    s.resident_pages = entries_.size();
    return s;
  }

 private:
  struct Entry {
    std::list<std::uint64_t>::iterator position;
    std::vector<std::uint8_t> bytes;
  };

  std::uint64_t capacity_;
  std::list<std::uint64_t> order_;  // front = most recently used
  std::unordered_map<std::uint64_t, Entry> entries_;
  CacheStats stats_;
};

/// Pages a cache may hold for an allocation: floor(fraction * page_count).
std::uint64_t cache_capacity(double cache_fraction, std::uint64_t page_count);

}  // namespace remem
