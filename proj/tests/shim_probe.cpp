// Ordinary allocating program used to exercise the preload shim. Prints
// checksums of what it wrote and read back; the alloc-* directory count seen
// mid-run goes to the file named by argv[2].
//
//   shim_probe basic|calloc|realloc|stress <count-file>

#include <dirent.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

namespace {

constexpr std::size_t kBytes = 10'000'000;

std::uint64_t fnv(const unsigned char* p, std::size_t n) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

void fill(unsigned char* p, std::size_t n, std::uint64_t seed) {
  std::uint64_t x = seed;
  for (std::size_t i = 0; i < n; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    p[i] = static_cast<unsigned char>(x);
  }
}

int count_alloc_dirs() {
  const char* root = std::getenv("REMEM_VFS_ROOT");
  if (root == nullptr) return 0;
  DIR* d = opendir(root);
  if (d == nullptr) return 0;
  int n = 0;
  while (dirent* e = readdir(d)) {
    if (std::strncmp(e->d_name, "alloc-", 6) == 0) ++n;
  }
  closedir(d);
  return n;
}

void record_count(const char* path) {
  if (path == nullptr) return;
  if (FILE* f = std::fopen(path, "w")) {
    std::fprintf(f, "%d\n", count_alloc_dirs());
    std::fclose(f);
  }
}

int basic(const char* count_path) {
  auto* p = static_cast<unsigned char*>(std::malloc(kBytes));
  if (p == nullptr) return 1;
  fill(p, kBytes, 42);
  const std::uint64_t written = fnv(p, kBytes);
  std::vector<unsigned char> copy(p, p + 4096);
  std::printf("write %llu\n", static_cast<unsigned long long>(written));
  std::printf("read %llu\n", static_cast<unsigned long long>(fnv(p, kBytes)));
  std::printf("head %llu\n", static_cast<unsigned long long>(fnv(copy.data(), copy.size())));
  record_count(count_path);
  std::free(p);
  return 0;
}

int zeroed(const char* count_path) {
  auto* p = static_cast<unsigned char*>(std::calloc(kBytes / 8, 8));
  if (p == nullptr) return 1;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < kBytes; ++i) nonzero += p[i] != 0;
  std::printf("nonzero %zu\n", nonzero);
  record_count(count_path);
  std::free(p);
  volatile std::size_t huge = SIZE_MAX / 2;
  void* overflow = std::calloc(huge, 4);
  std::printf("overflow %s\n", overflow == nullptr ? "null" : "non-null");
  return 0;
}

int resize(const char* count_path) {
  auto* p = static_cast<unsigned char*>(std::malloc(1000));
  fill(p, 1000, 7);
  const std::uint64_t small = fnv(p, 1000);
  p = static_cast<unsigned char*>(std::realloc(p, kBytes));
  if (p == nullptr) return 1;
  std::printf("grown-prefix %d\n", fnv(p, 1000) == small);
  fill(p, kBytes, 9);
  const std::uint64_t big = fnv(p, 2000);
  record_count(count_path);
  p = static_cast<unsigned char*>(std::realloc(p, 2000));
  if (p == nullptr) return 1;
  std::printf("shrunk-prefix %d\n", fnv(p, 2000) == big);
  std::free(p);
  return 0;
}

int stress(const char* count_path) {
  std::vector<std::thread> threads;
  std::vector<std::uint64_t> sums(4);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([t, &sums] {
      std::uint64_t acc = 0;
      for (int i = 0; i < 8; ++i) {
        const std::size_t n = (i % 2 == 0) ? 2'000'000 + 4096 * t : 256;
        auto* p = static_cast<unsigned char*>(std::malloc(n));
        fill(p, n, 100 + t * 10 + i);
        acc ^= fnv(p, n);
        std::free(p);
      }
      sums[t] = acc;
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 4; ++t) std::printf("thread %d %llu\n", t, static_cast<unsigned long long>(sums[t]));
  record_count(count_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const char* mode = argc > 1 ? argv[1] : "basic";
  const char* count_path = argc > 2 ? argv[2] : nullptr;
  if (std::strcmp(mode, "basic") == 0) return basic(count_path);
  if (std::strcmp(mode, "calloc") == 0) return zeroed(count_path);
  if (std::strcmp(mode, "realloc") == 0) return resize(count_path);
  if (std::strcmp(mode, "stress") == 0) return stress(count_path);
  std::fprintf(stderr, "unknown mode %s\n", mode);
  return 2;
}
