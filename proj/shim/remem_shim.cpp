// LD_PRELOAD allocator shim: allocations of at least REMEM_THRESHOLD bytes
// become MAP_SHARED mappings of VFS data files; everything else goes to the
// next allocator in the chain.
//
//   REMEM_ENABLE=1 REMEM_VFS_ROOT=/lustre/scratch/vfs LD_PRELOAD=libremem_shim.so ./app

#ifndef _GNU_SOURCE
#define _GNU_SOURCE
#endif

#include <dlfcn.h>
#include <fcntl.h>
#include <malloc.h>
#include <sys/mman.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <new>

#include "remem/vfs_backend.hpp"

namespace {

using MallocFn = void* (*)(size_t);
using FreeFn = void (*)(void*);
using CallocFn = void* (*)(size_t, size_t);
using ReallocFn = void* (*)(void*, size_t);

MallocFn next_malloc = nullptr;
FreeFn next_free = nullptr;
CallocFn next_calloc = nullptr;
ReallocFn next_realloc = nullptr;

// Serves allocations made while dlsym resolves the next allocator.
alignas(16) unsigned char boot_arena[8192];
std::size_t boot_used = 0;

bool in_boot_arena(const void* p) {
  auto* b = static_cast<const unsigned char*>(p);
  return b >= boot_arena && b < boot_arena + sizeof boot_arena;
}

void* boot_alloc(std::size_t size) {
  const std::size_t rounded = (size + 15) & ~std::size_t{15};
  if (boot_used + rounded > sizeof boot_arena) return nullptr;
  void* p = boot_arena + boot_used;
  boot_used += rounded;
  return p;  // static storage, already zero
}

// Nonzero while this thread is inside the shim; nested allocations then go
// to the next allocator.
__attribute__((tls_model("initial-exec"))) thread_local int t_depth = 0;
__attribute__((tls_model("initial-exec"))) thread_local bool t_initializing = false;

struct DepthGuard {
  DepthGuard() { ++t_depth; }
  ~DepthGuard() { --t_depth; }
};

struct Config {
  bool enabled = false;
  std::size_t threshold = 1u << 20;
  char root[4096] = {};
  int log_fd = -1;
};
Config config;

std::atomic<int> init_state{0};  // 0 = not started, 1 = running, 2 = done

void log_line(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void log_line(const char* fmt, ...) {
  if (config.log_fd < 0) return;
  char buf[512];
  va_list args;
  va_start(args, fmt);
  const int n = std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  if (n > 0) {
    [[maybe_unused]] auto rc = ::write(config.log_fd, buf, std::min<std::size_t>(n, sizeof buf - 1));
  }
}

void initialize() {
  int expected = 0;
  if (!init_state.compare_exchange_strong(expected, 1)) {
    while (init_state.load() != 2) {
    }
    return;
  }
  t_initializing = true;
  next_malloc = reinterpret_cast<MallocFn>(dlsym(RTLD_NEXT, "malloc"));
  next_free = reinterpret_cast<FreeFn>(dlsym(RTLD_NEXT, "free"));
  next_calloc = reinterpret_cast<CallocFn>(dlsym(RTLD_NEXT, "calloc"));
  next_realloc = reinterpret_cast<ReallocFn>(dlsym(RTLD_NEXT, "realloc"));

  const char* enable = std::getenv("REMEM_ENABLE");
  const char* root = std::getenv(remem::kVfsRootEnv);
  config.enabled = enable && std::strcmp(enable, "1") == 0 && root && *root;
  if (root) std::snprintf(config.root, sizeof config.root, "%s", root);
  if (const char* t = std::getenv("REMEM_THRESHOLD")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t, &end, 10);
    if (end != t && *end == '\0') config.threshold = static_cast<std::size_t>(v);
  }
  const long page = ::sysconf(_SC_PAGESIZE);
  if (page > 0) config.threshold = std::max<std::size_t>(config.threshold, static_cast<std::size_t>(page));
  if (const char* log = std::getenv("REMEM_LOG")) {
    config.log_fd = ::open(log, O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  }
  t_initializing = false;
  init_state.store(2);
  log_line("remem shim: enabled=%d threshold=%zu root=%s\n", config.enabled ? 1 : 0,
           config.threshold, config.root);
}

inline bool ready() {
  if (init_state.load(std::memory_order_acquire) == 2) return true;
  if (t_initializing) return false;
  initialize();
  return true;
}

// Fixed-capacity open-addressing map: address -> (id, size). No heap use.
struct Slot {
  void* addr;
  std::uint64_t id;
  std::size_t size;
};
constexpr std::size_t kMapCapacity = 1 << 14;
void* const kTombstone = reinterpret_cast<void*>(1);
Slot slots[kMapCapacity];
std::size_t live_slots = 0;
std::mutex map_mutex;

std::size_t slot_hash(const void* p) {
  auto v = reinterpret_cast<std::uintptr_t>(p) >> 12;
  v ^= v >> 17;
  v *= 0xed5ad4bbU;
  return v & (kMapCapacity - 1);
}

bool map_insert(void* addr, std::uint64_t id, std::size_t size) {
  std::lock_guard lock(map_mutex);
  if (live_slots * 4 >= kMapCapacity * 3) return false;
  for (std::size_t i = slot_hash(addr), n = 0; n < kMapCapacity; i = (i + 1) & (kMapCapacity - 1), ++n) {
    if (slots[i].addr == nullptr || slots[i].addr == kTombstone) {
      slots[i] = {addr, id, size};
      ++live_slots;
      return true;
    }
  }
  return false;
}

bool map_find(void* addr, Slot* out, bool erase) {
  std::lock_guard lock(map_mutex);
  if (live_slots == 0) return false;
  for (std::size_t i = slot_hash(addr), n = 0; n < kMapCapacity; i = (i + 1) & (kMapCapacity - 1), ++n) {
    if (slots[i].addr == nullptr) return false;
    if (slots[i].addr == addr) {
      *out = slots[i];
      if (erase) {
        slots[i].addr = kTombstone;
        --live_slots;
      }
      return true;
    }
  }
  return false;
}

// Created on first use and never destroyed.
std::once_flag store_once;
remem::VfsStore* store = nullptr;

remem::VfsStore* get_store() {
  std::call_once(store_once, [] {
    remem::VfsOptions options;
    options.cache_fraction = 0;
    options.cache_policy = remem::CachePolicy::None;
    options.attach_existing = false;
    store = remem::VfsStore::open(config.root, options).release();
  });
  return store;
}

void* shim_allocate(std::size_t size) {
  DepthGuard guard;
  try {
    remem::VfsStore* vfs = get_store();
    const remem::AllocationId id = vfs->create(size);
    const int fd = ::open(vfs->data_path(id).c_str(), O_RDWR | O_CLOEXEC);
    void* p = fd < 0 ? MAP_FAILED : ::mmap(nullptr, size, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
    if (fd >= 0) ::close(fd);
    if (p == MAP_FAILED || !map_insert(p, id.value, size)) {
      if (p != MAP_FAILED) ::munmap(p, size);
      vfs->free(id);
      errno = ENOMEM;
      return nullptr;
    }
    log_line("alloc %p size=%zu id=%llu\n", p, size, static_cast<unsigned long long>(id.value));
    return p;
  } catch (...) {
    errno = ENOMEM;
    return nullptr;
  }
}

void shim_release(const Slot& slot) {
  DepthGuard guard;
  ::munmap(slot.addr, slot.size);
  try {
    get_store()->free(remem::AllocationId{slot.id});
  } catch (...) {
  }
  log_line("free %p id=%llu\n", slot.addr, static_cast<unsigned long long>(slot.id));
}

inline bool routes_to_shim(std::size_t size) {
  return config.enabled && t_depth == 0 && size >= config.threshold;
}

}  // namespace

extern "C" {

__attribute__((visibility("default"))) void* malloc(size_t size) {
  if (!ready() || !next_malloc) return boot_alloc(size);
  if (routes_to_shim(size)) return shim_allocate(size);
  return next_malloc(size);
}

__attribute__((visibility("default"))) void free(void* ptr) {
  if (ptr == nullptr || in_boot_arena(ptr)) return;
  if (!ready() || !next_free) return;
  Slot slot;
  if (map_find(ptr, &slot, true)) {
    shim_release(slot);
    return;
  }
  next_free(ptr);
}

__attribute__((visibility("default"))) void* calloc(size_t count, size_t elem_size) {
  size_t total = 0;
  if (__builtin_mul_overflow(count, elem_size, &total)) {
    errno = ENOMEM;
    return nullptr;
  }
  if (!ready() || !next_calloc) return boot_alloc(total);
  // Fresh file-backed pages read as zero.
  if (routes_to_shim(total)) return shim_allocate(total);
  return next_calloc(count, elem_size);
}

__attribute__((visibility("default"))) void* realloc(void* ptr, size_t new_size) {
  if (ptr == nullptr) return malloc(new_size);
  if (!ready() || !next_realloc) return nullptr;
  if (in_boot_arena(ptr)) {
    void* q = malloc(new_size);
    if (q) std::memcpy(q, ptr, std::min<std::size_t>(new_size, boot_arena + sizeof boot_arena -
                                                                  static_cast<unsigned char*>(ptr)));
    return q;
  }

  Slot slot;
  if (map_find(ptr, &slot, false)) {
    if (new_size == 0) {
      free(ptr);
      return nullptr;
    }
    void* q = malloc(new_size);
    if (q == nullptr) return nullptr;
    std::memcpy(q, ptr, std::min(slot.size, new_size));
    free(ptr);
    return q;
  }

  if (routes_to_shim(new_size)) {
    const std::size_t old_size = malloc_usable_size(ptr);
    void* q = shim_allocate(new_size);
    if (q == nullptr) return nullptr;
    std::memcpy(q, ptr, std::min(old_size, new_size));
    next_free(ptr);
    return q;
  }
  return next_realloc(ptr, new_size);
}

}  // extern "C"
