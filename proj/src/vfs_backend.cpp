#include "remem/vfs_backend.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "remem/error.hpp"

namespace remem {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatFile = "format_version";
constexpr const char* kMetaFile = "meta.json";
constexpr const char* kDataFile = "data.bin";

[[noreturn]] void throw_errno(const std::string& what, int err = errno) {
  throw Error(ErrorCode::IoError, what + ": " + std::strerror(err));
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes a temporary sibling file, then renames it over `path`.
void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename " + tmp.string() + ": " + ec.message());
}

void check_format_version(const fs::path& root) {
  const fs::path file = root / kFormatFile;
  std::error_code ec;
  if (!fs::exists(file, ec)) return;
  std::string text = read_file(file);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) {
    text.pop_back();
  }
  int version = 0;
  auto [ptr, err] = std::from_chars(text.data(), text.data() + text.size(), version);
  if (err != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::IncompatibleFormatVersion,
                "unreadable format_version '" + text + "' in " + root.string());
  }
  if (version != kVfsFormatVersion) {
    throw Error(ErrorCode::IncompatibleFormatVersion,
                root.string() + " has format " + std::to_string(version) + ", expected " +
                    std::to_string(kVfsFormatVersion));
  }
}

void pread_all(int fd, std::uint8_t* dst, std::uint64_t len, std::uint64_t offset) {
  while (len > 0) {
    const ssize_t n = ::pread(fd, dst, len, static_cast<off_t>(offset));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("pread");
    }
    if (n == 0) throw Error(ErrorCode::IoError, "data.bin shorter than its allocation");
    dst += n;
    len -= static_cast<std::uint64_t>(n);
    offset += static_cast<std::uint64_t>(n);
  }
}

void pwrite_all(int fd, const std::uint8_t* src, std::uint64_t len, std::uint64_t offset) {
  while (len > 0) {
    const ssize_t n = ::pwrite(fd, src, len, static_cast<off_t>(offset));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("pwrite");
    }
    src += n;
    len -= static_cast<std::uint64_t>(n);
    offset += static_cast<std::uint64_t>(n);
  }
}

}  // namespace

std::string encode_meta(const VfsAllocationMeta& meta) {
  nlohmann::ordered_json j;
  j["format_version"] = meta.format_version;
  j["alloc_id"] = meta.alloc_id.value;
  j["size_bytes"] = meta.size_bytes;
  j["page_size"] = meta.page_size;
  j["checksum_algo"] = meta.checksum_algo;
  j["created_at"] = meta.created_at;
  return j.dump(2) + "\n";
}

VfsAllocationMeta decode_meta(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed meta.json: ") + e.what());
  }
  try {
    VfsAllocationMeta meta;
    meta.format_version = j.at("format_version").get<int>();
    if (meta.format_version != kVfsFormatVersion) {
      throw Error(ErrorCode::IncompatibleFormatVersion,
                  "meta.json format " + std::to_string(meta.format_version));
    }
    meta.alloc_id = AllocationId{j.at("alloc_id").get<std::uint64_t>()};
    meta.size_bytes = j.at("size_bytes").get<std::uint64_t>();
    meta.page_size = j.at("page_size").get<std::uint64_t>();
    meta.checksum_algo = j.at("checksum_algo").get<std::string>();
    meta.created_at = j.at("created_at").get<std::string>();
    if (!meta.alloc_id.valid() || meta.size_bytes == 0) {
      throw Error(ErrorCode::IoError, "meta.json has zero id or size");
    }
    validate_page_size(meta.page_size);
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed meta.json: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidPageSize) throw Error(ErrorCode::IoError, e.what());
    throw;
  }
}

VfsAllocationMeta read_meta(const fs::path& dir) { return decode_meta(read_file(dir / kMetaFile)); }

fs::path alloc_dir(const fs::path& root, AllocationId id) {
  return root / ("alloc-" + std::to_string(id.value));
}

std::optional<AllocationId> parse_alloc_dir_name(const std::string& name) {
  constexpr std::string_view prefix = "alloc-";
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) {
    return std::nullopt;
  }
  std::uint64_t value = 0;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  auto [ptr, err] = std::from_chars(first, last, value);
  if (err != std::errc{} || ptr != last || value == 0) return std::nullopt;
  return AllocationId{value};
}

std::vector<VfsDiskEntry> scan_root(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::IoError, root.string() + " is not a directory");
  }
  check_format_version(root);

  std::vector<std::pair<std::uint64_t, VfsDiskEntry>> found;
  fs::directory_iterator it(root, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + root.string() + ": " + ec.message());
  for (const auto& dirent : it) {
    const auto id = parse_alloc_dir_name(dirent.path().filename().string());
    if (!id || !dirent.is_directory(ec)) continue;
    VfsDiskEntry entry;
    entry.dir = dirent.path();
    try {
      entry.meta = read_meta(entry.dir);
      struct stat st{};
      if (::stat((entry.dir / kDataFile).c_str(), &st) != 0) {
        entry.error = "data.bin missing";
      } else {
        entry.data_length = static_cast<std::uint64_t>(st.st_size);
        entry.on_disk_bytes = static_cast<std::uint64_t>(st.st_blocks) * 512;
        if (entry.meta->alloc_id != *id) {
          entry.error = "meta.json alloc_id does not match directory name";
        } else if (entry.data_length != entry.meta->size_bytes) {
          entry.error = "data.bin length " + std::to_string(entry.data_length) +
                        " != size_bytes " + std::to_string(entry.meta->size_bytes);
        }
      }
    } catch (const Error& e) {
      entry.meta.reset();
      entry.error = e.what();
    }
    found.emplace_back(id->value, std::move(entry));
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<VfsDiskEntry> out;
  out.reserve(found.size());
  for (auto& [_, entry] : found) out.push_back(std::move(entry));
  return out;
}

std::unique_ptr<VfsStore> VfsStore::open(const fs::path& root, VfsOptions options) {
  validate_page_size(options.page_size);
  if (!(options.cache_fraction >= 0.0 && options.cache_fraction <= 1.0)) {
    throw Error(ErrorCode::BadValue, "cache_fraction must lie in [0, 1]");
  }
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + root.string() + ": " + ec.message());
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::IoError, root.string() + " is not a directory");
  }
  if (::access(root.c_str(), W_OK) != 0) throw_errno("root " + root.string() + " is not writable");

  if (fs::exists(root / kFormatFile, ec)) {
    check_format_version(root);
  } else {
    write_file_atomic(root / kFormatFile, std::to_string(kVfsFormatVersion) + "\n");
  }

  std::unique_ptr<VfsStore> store(new VfsStore(root, options));
  if (options.attach_existing) store->attach_existing();
  return store;
}

VfsStore::VfsStore(fs::path root, VfsOptions options)
    : root_(std::move(root)), options_(options) {}

VfsStore::~VfsStore() = default;

std::uint64_t VfsStore::capacity_for(const AllocationRecord& record) const {
  if (options_.cache_policy == CachePolicy::None) return 0;
  return cache_capacity(options_.cache_fraction, record.page_count());
}

void VfsStore::attach_existing() {
  for (const auto& entry : scan_root(root_)) {
    if (entry.meta && entry.error.empty()) attach(*entry.meta);
  }
}

std::shared_ptr<VfsStore::Allocation> VfsStore::attach(const VfsAllocationMeta& meta) {
  const fs::path data = alloc_dir(root_, meta.alloc_id) / kDataFile;
  int fd = ::open(data.c_str(), O_RDWR | O_CLOEXEC);
  if (fd < 0 && (errno == EACCES || errno == EROFS)) fd = ::open(data.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw_errno("open " + data.string());

  auto alloc = std::make_shared<Allocation>();
  alloc->fd.reset(fd);
  alloc->record = table_.adopt(meta.alloc_id, meta.size_bytes, meta.page_size, BackendKind::Vfs);
  alloc->cache = LruPageCache(capacity_for(alloc->record));
  allocations_.emplace(meta.alloc_id.value, alloc);
  return alloc;
}

AllocationId VfsStore::create(std::uint64_t size_bytes) {
  if (size_bytes == 0) throw Error(ErrorCode::ZeroSize, "vfs_create of 0 bytes");

  // Ids whose directory already exists under the root are skipped.
  AllocationRecord record;
  fs::path dir;
  for (;;) {
    record = table_.register_allocation(size_bytes, options_.page_size, BackendKind::Vfs);
    dir = alloc_dir(root_, record.id);
    if (::mkdir(dir.c_str(), 0755) == 0) break;
    const int err = errno;
    table_.unregister_allocation(record.id);
    if (err != EEXIST) throw_errno("mkdir " + dir.string(), err);
  }

  auto alloc = std::make_shared<Allocation>();
  try {
    const fs::path data = dir / kDataFile;
    alloc->fd.reset(::open(data.c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
    if (!alloc->fd) throw_errno("create " + data.string());
    if (::ftruncate(alloc->fd.get(), static_cast<off_t>(size_bytes)) != 0) {
      throw_errno("ftruncate " + data.string());
    }
    VfsAllocationMeta meta;
    meta.alloc_id = record.id;
    meta.size_bytes = size_bytes;
    meta.page_size = options_.page_size;
    meta.created_at = now_iso8601();
    write_file_atomic(dir / kMetaFile, encode_meta(meta));
  } catch (...) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    table_.unregister_allocation(record.id);
    throw;
  }
  alloc->record = record;
  alloc->cache = LruPageCache(capacity_for(record));
  std::unique_lock lock(mutex_);
  allocations_.emplace(record.id.value, std::move(alloc));
  return record.id;
}

std::shared_ptr<VfsStore::Allocation> VfsStore::find(AllocationId id) const {
  std::shared_lock lock(mutex_);
  auto it = allocations_.find(id.value);
  return it == allocations_.end() ? nullptr : it->second;
}

std::shared_ptr<VfsStore::Allocation> VfsStore::get(AllocationId id) {
  if (auto alloc = find(id)) return alloc;
  // Possibly created by another handle on the same root after we opened.
  const fs::path dir = alloc_dir(root_, id);
  std::error_code ec;
  if (id.valid() && fs::exists(dir / kMetaFile, ec)) {
    VfsAllocationMeta meta;
    try {
      meta = read_meta(dir);
    } catch (const Error&) {
      throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
    }
    std::unique_lock lock(mutex_);
    if (auto it = allocations_.find(id.value); it != allocations_.end()) return it->second;
    if (meta.alloc_id == id) return attach(meta);
  }
  throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
}

void VfsStore::write(AllocationId id, std::uint64_t offset, ByteView src) {
  auto alloc = get(id);
  const auto extents = resolve(alloc->record, offset, src.size());
  std::lock_guard lock(alloc->mutex);
  for (const auto& extent : extents) alloc->cache.invalidate(extent.page_index);
  pwrite_all(alloc->fd.get(), src.data(), src.size(), offset);
}

void VfsStore::read_into(AllocationId id, std::uint64_t offset, MutableByteView dst) {
  auto alloc = get(id);
  const AllocationRecord& record = alloc->record;
  const auto extents = resolve(record, offset, dst.size());
  std::lock_guard lock(alloc->mutex);
  LruPageCache& cache = alloc->cache;
  std::uint8_t* out = dst.data();
  for (const auto& extent : extents) {
    const std::uint64_t page_start = extent.page_index * record.page_size;
    if (cache.capacity() == 0) {
      cache.record_bypass();
      pread_all(alloc->fd.get(), out, extent.length, page_start + extent.intra_page_offset);
    } else if (const auto* page = cache.lookup(extent.page_index)) {
      std::memcpy(out, page->data() + extent.intra_page_offset, extent.length);
    } else {
      std::vector<std::uint8_t> bytes(record.page_length(extent.page_index));
      pread_all(alloc->fd.get(), bytes.data(), bytes.size(), page_start);
      std::memcpy(out, bytes.data() + extent.intra_page_offset, extent.length);
      cache.insert(extent.page_index, std::move(bytes));
    }
    out += extent.length;
  }
}

void VfsStore::free(AllocationId id) {
  get(id);
  {
    std::unique_lock lock(mutex_);
    if (allocations_.erase(id.value) == 0) {
      throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
    }
    table_.unregister_allocation(id);
  }
  std::error_code ec;
  fs::remove_all(alloc_dir(root_, id), ec);
  if (ec) throw Error(ErrorCode::IoError, "remove " + alloc_dir(root_, id).string() + ": " + ec.message());
}

std::uint64_t VfsStore::size_of(AllocationId id) const {
  auto alloc = find(id);
  if (!alloc) return table_.lookup(id).size_bytes;
  return alloc->record.size_bytes;
}

void VfsStore::sync(AllocationId id) {
  auto alloc = get(id);
  std::lock_guard lock(alloc->mutex);
  if (::fsync(alloc->fd.get()) != 0) throw_errno("fsync");
}

CacheStats VfsStore::cache_stats(AllocationId id) const {
  auto alloc = find(id);
  if (!alloc) throw Error(ErrorCode::UnknownAllocation, "id " + std::to_string(id.value));
  std::lock_guard lock(alloc->mutex);
  return alloc->cache.stats();
}

void VfsStore::drop_caches() {
  std::shared_lock lock(mutex_);
  for (auto& [_, alloc] : allocations_) {
    std::lock_guard alloc_lock(alloc->mutex);
    alloc->cache.clear();
    ::posix_fadvise(alloc->fd.get(), 0, 0, POSIX_FADV_DONTNEED);
  }
}

fs::path VfsStore::data_path(AllocationId id) const { return alloc_dir(root_, id) / kDataFile; }

std::vector<AllocationId> VfsStore::allocations() const {
  std::vector<AllocationId> ids;
  for (const auto& record : table_.snapshot()) ids.push_back(record.id);
  return ids;
}

}  // namespace remem
