#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "remem/page_cache.hpp"
#include "remem/pagetable.hpp"

namespace remem::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    std::string pattern = (std::filesystem::temp_directory_path() / ("remem-" + tag + "-XXXXXX")).string();
    if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

// Maps every requested byte to its page independently, then coalesces runs.
inline std::vector<PageExtent> brute_force_resolve(std::uint64_t size, std::uint64_t page_size,
                                                   std::uint64_t offset, std::uint64_t len) {
  std::vector<PageExtent> out;
  for (std::uint64_t b = offset; b < offset + len && b < size; ++b) {
    const std::uint64_t page = b / page_size;
    if (out.empty() || out.back().page_index != page) {
      out.push_back({page, b - page * page_size, 0});
    }
    ++out.back().length;
  }
  return out;
}

// Textbook LRU over a trace of page numbers.
inline CacheStats reference_lru(const std::vector<std::uint64_t>& trace, std::uint64_t capacity) {
  CacheStats s;
  std::list<std::uint64_t> order;  // front = most recent
  for (std::uint64_t page : trace) {
    auto it = std::find(order.begin(), order.end(), page);
    if (it != order.end()) {
      ++s.hits;
      order.erase(it);
      order.push_front(page);
      continue;
    }
    ++s.misses;
    if (capacity == 0) continue;
    order.push_front(page);
    if (order.size() > capacity) {
      order.pop_back();
      ++s.evictions;
    }
  }
  s.resident_pages = order.size();
  return s;
}

struct TwoPass {
  double mean = 0, median = 0, stddev = 0, min = 0, max = 0;
};

// Two-pass mean / variance, median from a sorted copy.
inline TwoPass two_pass(std::vector<double> v) {
  TwoPass r;
  const double n = static_cast<double>(v.size());
  double sum = 0;
  for (double x : v) sum += x;
  r.mean = sum / n;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.stddev = v.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  std::sort(v.begin(), v.end());
  r.min = v.front();
  r.max = v.back();
  const std::size_t m = v.size() / 2;
  r.median = v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
  return r;
}

inline bool close_rel(double a, double b, double tol) {
  if (a == b) return true;
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

// FNV-1a 64 over the xorshift64 (13, 7, 17) stream, each state emitted as
// 8 little-endian bytes; written out long-hand, separate from the library.
inline std::uint64_t oracle_pattern_checksum(std::uint64_t seed, std::uint64_t len) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::uint64_t x = seed;
  for (std::uint64_t i = 0; i < len; ++i) {
    if (i % 8 == 0) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
    }
    h ^= (x >> (8 * (i % 8))) & 0xff;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace remem::testing
