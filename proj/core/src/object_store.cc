/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include "edsp/object_store.h"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <system_error>

#include "edsp/util.h"

namespace fs = std::filesystem;

namespace edsp {

namespace {

constexpr std::string_view kReservedDir = ".edsp";

std::string Errno() { return std::strerror(errno); }

/// Closes a file descriptor on scope exit.
class FileDescriptor {
 public:
  explicit FileDescriptor(int fd) : fd_(fd) {}
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  int Release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

/// flock()-based lock on a sidecar file. flock locks belong to the open file
/// description, so they exclude other threads as well as other processes.
class FileLock {
 public:
  static Result<FileLock> Acquire(const fs::path& path, bool exclusive) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      return IoFailure("cannot create lock directory {}: {}",
                       path.parent_path().string(), ec.message());
    }
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) {
      return IoFailure("cannot open lock file {}: {}", path.string(), Errno());
    }
    while (::flock(fd, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      if (errno == EINTR) continue;
      std::string message = Errno();
      ::close(fd);
      return IoFailure("flock {} failed: {}", path.string(), message);
    }
    return FileLock(fd);
  }

  FileLock(FileLock&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  FileLock& operator=(FileLock&&) = delete;
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }

 private:
  explicit FileLock(int fd) : fd_(fd) {}
  int fd_;
};

Result<std::string> ReadWholeFile(const fs::path& path) {
  FileDescriptor fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (!fd.valid()) {
    if (errno == ENOENT || errno == ENOTDIR) {
      return NotFound("no such key: {}", path.string());
    }
    return IoFailure("cannot open {}: {}", path.string(), Errno());
  }
  struct stat st {};
  if (::fstat(fd.get(), &st) != 0) {
    return IoFailure("fstat {} failed: {}", path.string(), Errno());
  }
  if (!S_ISREG(st.st_mode)) {
    return NotFound("no such key: {}", path.string());
  }
  std::string out(static_cast<size_t>(st.st_size), '\0');
  size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::pread(fd.get(), out.data() + done, out.size() - done,
                        static_cast<off_t>(done));
    if (n < 0) {
      if (errno == EINTR) continue;
      return IoFailure("read {} failed: {}", path.string(), Errno());
    }
    if (n == 0) break;
    done += static_cast<size_t>(n);
  }
  out.resize(done);
  return out;
}

Status FsyncDirectory(const fs::path& dir) {
  FileDescriptor fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC));
  if (!fd.valid()) {
    return IoFailure("cannot open directory {}: {}", dir.string(), Errno());
  }
  if (::fsync(fd.get()) != 0) {
    return IoFailure("fsync {} failed: {}", dir.string(), Errno());
  }
  return Ok();
}

std::string FormatToken(uint64_t counter, std::string_view bytes) {
  return fmt::format("{}-{}", counter, Sha256Hex(bytes).substr(0, 16));
}

uint64_t TokenCounter(std::string_view token) {
  uint64_t counter = 0;
  for (char c : token) {
    if (c < '0' || c > '9') break;
    counter = counter * 10 + static_cast<uint64_t>(c - '0');
  }
  return counter;
}

}  // namespace

// --------------------------------------------------------------------------
// BlobKey

Result<BlobKey> BlobKey::Make(std::string_view path) {
  if (path.empty()) {
    return InvalidArgument("blob key must not be empty");
  }
  if (path.size() > kMaxKeyBytes) {
    return InvalidArgument("blob key exceeds {} bytes", kMaxKeyBytes);
  }
  if (!IsValidUtf8(path)) {
    return MakeError(ErrorKind::kInvalidUtf8, "blob key is not valid UTF-8");
  }
  if (path.find('\0') != std::string_view::npos ||
      path.find('\\') != std::string_view::npos) {
    return InvalidArgument("blob key contains a forbidden character");
  }
  size_t start = 0;
  bool first = true;
  while (true) {
    size_t end = path.find('/', start);
    std::string_view segment =
        path.substr(start, end == std::string_view::npos ? end : end - start);
    if (segment.empty()) {
      return InvalidArgument("blob key '{}' has an empty segment", path);
    }
    if (segment == "." || segment == "..") {
      return InvalidArgument("blob key '{}' contains a relative segment", path);
    }
    if (first && segment == kReservedDir) {
      return InvalidArgument("blob key '{}' uses the reserved prefix", path);
    }
    first = false;
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return BlobKey(std::string(path));
}

Result<BlobKey> BlobKey::Join(std::string_view suffix) const {
  return Make(path_ + "/" + std::string(suffix));
}

Result<BlobKey> JoinKey(std::string_view prefix, std::string_view suffix) {
  if (prefix.empty()) return BlobKey::Make(suffix);
  std::string joined(prefix);
  if (joined.back() != '/') joined.push_back('/');
  joined.append(suffix);
  return BlobKey::Make(joined);
}

std::optional<fs::path> ResolveStoreRoot(std::string_view flag_value) {
  if (!flag_value.empty()) return fs::path(flag_value);
  if (const char* env = std::getenv("EDSP_STORE"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return std::nullopt;
}

// --------------------------------------------------------------------------
// LocalObjectStore

Result<std::unique_ptr<LocalObjectStore>> LocalObjectStore::Open(const fs::path& root,
                                                                 LocalStoreOptions options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    return NotFound("store root {} does not exist", root.string());
  }
  fs::path absolute = fs::absolute(root, ec);
  if (ec) {
    return IoFailure("cannot resolve {}: {}", root.string(), ec.message());
  }
  absolute = absolute.lexically_normal();
  if (absolute.has_filename() == false && absolute.has_parent_path()) {
    absolute = absolute.parent_path();
  }
  for (const char* sub : {"tmp", "tokens", "locks"}) {
    fs::create_directories(absolute / kReservedDir / sub, ec);
    if (ec) {
      return IoFailure("cannot initialize store at {}: {}", absolute.string(),
                       ec.message());
    }
  }
  return std::unique_ptr<LocalObjectStore>(new LocalObjectStore(absolute, options));
}

Result<std::unique_ptr<LocalObjectStore>> LocalObjectStore::Create(
    const fs::path& root, LocalStoreOptions options) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) {
    return IoFailure("cannot create store root {}: {}", root.string(), ec.message());
  }
  return Open(root, options);
}

std::string LocalObjectStore::Describe() const { return "file://" + root_.string(); }

fs::path LocalObjectStore::DataPath(const BlobKey& key) const { return root_ / key.str(); }

fs::path LocalObjectStore::TokenPath(const BlobKey& key) const {
  return root_ / kReservedDir / "tokens" / key.str();
}

fs::path LocalObjectStore::LockPath(const BlobKey& key) const {
  return root_ / kReservedDir / "locks" / (key.str() + ".lock");
}

Status LocalObjectStore::WriteAtomically(const fs::path& target,
                                         std::string_view bytes) const {
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) {
    return IoFailure("cannot create directory {}: {}", target.parent_path().string(),
                     ec.message());
  }
  fs::path tmp = root_ / kReservedDir / "tmp" / NewUuidV4();
  {
    FileDescriptor fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
    if (!fd.valid()) {
      return IoFailure("cannot create {}: {}", tmp.string(), Errno());
    }
    size_t done = 0;
    while (done < bytes.size()) {
      ssize_t n = ::write(fd.get(), bytes.data() + done, bytes.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        std::string message = Errno();
        ::unlink(tmp.c_str());
        return IoFailure("write {} failed: {}", tmp.string(), message);
      }
      done += static_cast<size_t>(n);
    }
    if (options_.sync && ::fsync(fd.get()) != 0) {
      std::string message = Errno();
      ::unlink(tmp.c_str());
      return IoFailure("fsync {} failed: {}", tmp.string(), message);
    }
  }
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    std::string message = Errno();
    ::unlink(tmp.c_str());
    return IoFailure("rename to {} failed: {}", target.string(), message);
  }
  if (options_.sync) {
    EDSP_RETURN_IF_ERROR(FsyncDirectory(target.parent_path()));
  }
  return Ok();
}

Result<std::optional<ConditionalToken>> LocalObjectStore::ReadToken(
    const BlobKey& key) const {
  std::error_code ec;
  if (!fs::is_regular_file(DataPath(key), ec)) {
    return std::optional<ConditionalToken>();
  }
  auto token = ReadWholeFile(TokenPath(key));
  if (!token.has_value()) {
    if (token.error().kind == ErrorKind::kNotFound) {
      // Written once and never replaced, or placed by something other than
      // this store: version zero.
      return std::optional<ConditionalToken>(ConditionalToken{"0"});
    }
    return std::move(token).error();
  }
  return std::optional<ConditionalToken>(ConditionalToken{std::move(*token)});
}

Result<ConditionalToken> LocalObjectStore::WriteLocked(const BlobKey& key,
                                                       std::string_view bytes) {
  uint64_t previous = 0;
  auto existing = ReadWholeFile(TokenPath(key));
  if (existing.has_value()) {
    previous = TokenCounter(*existing);
  } else if (existing.error().kind != ErrorKind::kNotFound) {
    return std::move(existing).error();
  } else {
    std::error_code ec;
    if (!fs::exists(DataPath(key), ec)) {
      // First write of a key never deleted: version zero needs no token file.
      EDSP_RETURN_IF_ERROR(WriteAtomically(DataPath(key), bytes));
      return ConditionalToken{"0"};
    }
  }
  ConditionalToken token{FormatToken(previous + 1, bytes)};
  // Token first: a crash between the two renames leaves a token that no
  // longer matches the bytes, which only makes the next CAS fail and retry.
  EDSP_RETURN_IF_ERROR(WriteAtomically(TokenPath(key), token.value));
  EDSP_RETURN_IF_ERROR(WriteAtomically(DataPath(key), bytes));
  return token;
}

Status LocalObjectStore::Put(const BlobKey& key, std::string_view bytes) {
  if (bytes.size() > kMaxBlobBytes) {
    return InvalidArgument("blob exceeds {} bytes", kMaxBlobBytes);
  }
  EDSP_ASSIGN_OR_RETURN(auto lock, FileLock::Acquire(LockPath(key), /*exclusive=*/true));
  EDSP_ASSIGN_OR_RETURN([[maybe_unused]] auto token, WriteLocked(key, bytes));
  return Ok();
}

Result<ConditionalToken> LocalObjectStore::PutIfMatches(
    const BlobKey& key, std::string_view bytes,
    const std::optional<ConditionalToken>& expected) {
  if (bytes.size() > kMaxBlobBytes) {
    return InvalidArgument("blob exceeds {} bytes", kMaxBlobBytes);
  }
  EDSP_ASSIGN_OR_RETURN(auto lock, FileLock::Acquire(LockPath(key), /*exclusive=*/true));
  EDSP_ASSIGN_OR_RETURN(auto current, ReadToken(key));
  if (current != expected) {
    if (!expected.has_value()) {
      return PreconditionFailed("key {} already exists", key.str());
    }
    return PreconditionFailed("key {} changed (expected token {}, found {})", key.str(),
                              expected->value,
                              current.has_value() ? current->value : "<absent>");
  }
  return WriteLocked(key, bytes);
}

Result<std::string> LocalObjectStore::Get(const BlobKey& key) const {
  return ReadWholeFile(DataPath(key));
}

Result<std::string> LocalObjectStore::GetRange(const BlobKey& key, uint64_t offset,
                                               uint64_t length) const {
  fs::path path = DataPath(key);
  FileDescriptor fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (!fd.valid()) {
    if (errno == ENOENT || errno == ENOTDIR) return NotFound("no such key: {}", key.str());
    return IoFailure("cannot open {}: {}", path.string(), Errno());
  }
  std::string out(static_cast<size_t>(length), '\0');
  size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::pread(fd.get(), out.data() + done, out.size() - done,
                        static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      return IoFailure("read {} failed: {}", path.string(), Errno());
    }
    if (n == 0) {
      return MakeError(ErrorKind::kTruncatedFile,
                       "range [{}, {}) extends past the end of {}", offset,
                       offset + length, key.str());
    }
    done += static_cast<size_t>(n);
  }
  return out;
}

Result<VersionedBlob> LocalObjectStore::GetVersioned(const BlobKey& key) const {
  EDSP_ASSIGN_OR_RETURN(auto lock, FileLock::Acquire(LockPath(key), /*exclusive=*/false));
  EDSP_ASSIGN_OR_RETURN(auto bytes, ReadWholeFile(DataPath(key)));
  EDSP_ASSIGN_OR_RETURN(auto token, ReadToken(key));
  if (!token.has_value()) {
    return NotFound("no such key: {}", key.str());
  }
  return VersionedBlob{std::move(bytes), std::move(*token)};
}

Result<std::vector<BlobKey>> LocalObjectStore::List(std::string_view prefix) const {
  // Walk from the deepest directory named by the prefix, then filter by the
  // full string prefix.
  std::string_view dir_part;
  if (auto slash = prefix.rfind('/'); slash != std::string_view::npos) {
    dir_part = prefix.substr(0, slash);
  }
  fs::path start = dir_part.empty() ? root_ : root_ / std::string(dir_part);
  std::vector<BlobKey> keys;
  std::error_code ec;
  if (!fs::is_directory(start, ec)) {
    return keys;
  }
  fs::recursive_directory_iterator it(start, ec), end;
  if (ec) {
    return IoFailure("cannot list {}: {}", start.string(), ec.message());
  }
  const std::string root_string = root_.string() + "/";
  for (; it != end; it.increment(ec)) {
    if (ec) {
      return IoFailure("listing {} failed: {}", start.string(), ec.message());
    }
    const fs::path& path = it->path();
    if (it.depth() == 0 && dir_part.empty() && path.filename() == kReservedDir) {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file(ec)) continue;
    std::string full = path.string();
    std::string relative = full.substr(root_string.size());
    if (relative.compare(0, prefix.size(), prefix) != 0) continue;
    auto key = BlobKey::Make(relative);
    if (key.has_value()) keys.push_back(std::move(*key));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

Status LocalObjectStore::Delete(const BlobKey& key) {
  EDSP_ASSIGN_OR_RETURN(auto lock, FileLock::Acquire(LockPath(key), /*exclusive=*/true));
  fs::path path = DataPath(key);
  if (::unlink(path.c_str()) != 0) {
    if (errno == ENOENT || errno == ENOTDIR) return NotFound("no such key: {}", key.str());
    return IoFailure("unlink {} failed: {}", path.string(), Errno());
  }
  // The token file stays so a recreated key continues the counter. A key
  // still at version zero gets one now for the same reason.
  std::error_code ec;
  if (!fs::exists(TokenPath(key), ec)) {
    EDSP_RETURN_IF_ERROR(WriteAtomically(TokenPath(key), FormatToken(1, {})));
  }
  if (options_.sync) {
    EDSP_RETURN_IF_ERROR(FsyncDirectory(path.parent_path()));
  }
  return Ok();
}

Result<uint64_t> LocalObjectStore::Size(const BlobKey& key) const {
  struct stat st {};
  fs::path path = DataPath(key);
  if (::stat(path.c_str(), &st) != 0) {
    if (errno == ENOENT || errno == ENOTDIR) return NotFound("no such key: {}", key.str());
    return IoFailure("stat {} failed: {}", path.string(), Errno());
  }
  if (!S_ISREG(st.st_mode)) return NotFound("no such key: {}", key.str());
  return static_cast<uint64_t>(st.st_size);
}

// --------------------------------------------------------------------------
// InMemoryObjectStore

ConditionalToken InMemoryObjectStore::NextToken(const std::string& key,
                                                std::string_view bytes) {
  uint64_t counter = ++counters_[key];
  return ConditionalToken{FormatToken(counter, bytes)};
}

Status InMemoryObjectStore::Put(const BlobKey& key, std::string_view bytes) {
  if (bytes.size() > kMaxBlobBytes) {
    return InvalidArgument("blob exceeds {} bytes", kMaxBlobBytes);
  }
  std::lock_guard lock(mu_);
  auto token = NextToken(key.str(), bytes);
  entries_[key.str()] = Entry{std::string(bytes), std::move(token)};
  return Ok();
}

Result<ConditionalToken> InMemoryObjectStore::PutIfMatches(
    const BlobKey& key, std::string_view bytes,
    const std::optional<ConditionalToken>& expected) {
  if (bytes.size() > kMaxBlobBytes) {
    return InvalidArgument("blob exceeds {} bytes", kMaxBlobBytes);
  }
  std::lock_guard lock(mu_);
  auto it = entries_.find(key.str());
  std::optional<ConditionalToken> current;
  if (it != entries_.end()) current = it->second.token;
  if (current != expected) {
    if (!expected.has_value()) {
      return PreconditionFailed("key {} already exists", key.str());
    }
    return PreconditionFailed("key {} changed", key.str());
  }
  auto token = NextToken(key.str(), bytes);
  entries_[key.str()] = Entry{std::string(bytes), token};
  return token;
}

Result<std::string> InMemoryObjectStore::Get(const BlobKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key.str());
  if (it == entries_.end()) return NotFound("no such key: {}", key.str());
  return it->second.bytes;
}

Result<std::string> InMemoryObjectStore::GetRange(const BlobKey& key, uint64_t offset,
                                                  uint64_t length) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key.str());
  if (it == entries_.end()) return NotFound("no such key: {}", key.str());
  const std::string& bytes = it->second.bytes;
  if (offset > bytes.size() || length > bytes.size() - offset) {
    return MakeError(ErrorKind::kTruncatedFile,
                     "range [{}, {}) extends past the end of {}", offset,
                     offset + length, key.str());
  }
  return bytes.substr(offset, length);
}

Result<VersionedBlob> InMemoryObjectStore::GetVersioned(const BlobKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key.str());
  if (it == entries_.end()) return NotFound("no such key: {}", key.str());
  return VersionedBlob{it->second.bytes, it->second.token};
}

Result<std::vector<BlobKey>> InMemoryObjectStore::List(std::string_view prefix) const {
  std::lock_guard lock(mu_);
  std::vector<BlobKey> keys;
  for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    keys.push_back(BlobKey::Make(it->first).value());
  }
  return keys;
}

Status InMemoryObjectStore::Delete(const BlobKey& key) {
  std::lock_guard lock(mu_);
  if (entries_.erase(key.str()) == 0) return NotFound("no such key: {}", key.str());
  return Ok();
}

Result<uint64_t> InMemoryObjectStore::Size(const BlobKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key.str());
  if (it == entries_.end()) return NotFound("no such key: {}", key.str());
  return static_cast<uint64_t>(it->second.bytes.size());
}

}  // namespace edsp
