#include "remem/page_cache.hpp"

#include <cmath>

namespace remem {

const std::vector<std::uint8_t>* LruPageCache::lookup(std::uint64_t page) {
  auto it = entries_.find(page);
  if (it == entries_.end()) {
    ++stats_.misses;
    return nullptr;
  }
  ++stats_.hits;
  order_.splice(order_.begin(), order_, it->second.position);
  return &it->second.bytes;
}

void LruPageCache::insert(std::uint64_t page, std::vector<std::uint8_t> bytes) {
  if (capacity_ == 0) return;
  if (auto it = entries_.find(page); it != entries_.end()) {
    it->second.bytes = std::move(bytes);
    order_.splice(order_.begin(), order_, it->second.position);
    return;
  }
  order_.push_front(page);
  entries_.emplace(page, Entry{order_.begin(), std::move(bytes)});
  while (entries_.size() > capacity_) {
    entries_.erase(order_.back());
    order_.pop_back();
    ++stats_.evictions;
  }
}

void LruPageCache::invalidate(std::uint64_t page) {
  auto it = entries_.find(page);
  if (it == entries_.end()) return;
  order_.erase(it->second.position);
  entries_.erase(it);
}

void LruPageCache::clear() {
  entries_.clear();
  order_.clear();
}

std::uint64_t cache_capacity(double cache_fraction, std::uint64_t page_count) {
  // 0.2 * 10 is 2.0000000000000004 but 0.29 * 100 is 28.999999999999996;
  // absorb representation error before flooring.
  const double pages = cache_fraction * static_cast<double>(page_count);
  return static_cast<std::uint64_t>(std::floor(pages + 1e-9));
}

}  // namespace remem
