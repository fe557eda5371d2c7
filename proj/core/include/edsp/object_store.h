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

#pragma once

/// \file edsp/object_store.h
/// Blob storage with a conditional-write (compare-and-swap) primitive.
///
/// Two backends share one contract: LocalObjectStore keeps blobs as files under
/// a root directory and is safe across threads and processes;
/// InMemoryObjectStore is for tests. Every write to a key advances that key's
/// ConditionalToken, so two successful writes never observe the same token.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edsp/result.h"

namespace edsp {

inline constexpr size_t kMaxKeyBytes = 1024;
inline constexpr uint64_t kMaxBlobBytes = uint64_t{1} << 30;

/// A slash-separated relative key. Never absolute, never contains empty,
/// "." or ".." segments, and never starts with the reserved ".edsp" segment.
class BlobKey {
 public:
  static Result<BlobKey> Make(std::string_view path);

  const std::string& str() const { return path_; }

  /// Key formed by appending `suffix` (itself a relative path) to this key.
  Result<BlobKey> Join(std::string_view suffix) const;

  friend auto operator<=>(const BlobKey&, const BlobKey&) = default;

 private:
  explicit BlobKey(std::string path) : path_(std::move(path)) {}
  std::string path_;
};

/// Opaque version tag of a stored key.
struct ConditionalToken {
  std::string value;

  friend bool operator==(const ConditionalToken&, const ConditionalToken&) = default;
};

struct VersionedBlob {
  std::string bytes;
  ConditionalToken token;
};

class ObjectStore {
 public:
  virtual ~ObjectStore() = default;

  /// Unconditional last-write-wins put; durable before return.
  virtual Status Put(const BlobKey& key, std::string_view bytes) = 0;

  /// kNotFound when the key is absent.
  virtual Result<std::string> Get(const BlobKey& key) const = 0;

  /// Reads `length` bytes starting at `offset`; kTruncatedFile when the range
  /// extends past the end of the blob.
  virtual Result<std::string> GetRange(const BlobKey& key, uint64_t offset,
                                       uint64_t length) const = 0;

  /// Bytes plus the token a later PutIfMatches must present.
  virtual Result<VersionedBlob> GetVersioned(const BlobKey& key) const = 0;

  /// All keys starting with `prefix` (plain string prefix), sorted by bytes.
  virtual Result<std::vector<BlobKey>> List(std::string_view prefix) const = 0;

  virtual Status Delete(const BlobKey& key) = 0;

  virtual Result<uint64_t> Size(const BlobKey& key) const = 0;

  /// Atomic compare-and-swap. `expected == nullopt` means create-only.
  /// kPreconditionFailed when the current token differs from `expected`.
  virtual Result<ConditionalToken> PutIfMatches(
      const BlobKey& key, std::string_view bytes,
      const std::optional<ConditionalToken>& expected) = 0;

  /// Filesystem directory backing the store, when there is one.
  virtual std::optional<std::filesystem::path> LocalRoot() const { return std::nullopt; }

  virtual std::string Describe() const = 0;
};

struct LocalStoreOptions {
  /// fsync files and directories before a write returns.
  bool sync = true;
};

class LocalObjectStore final : public ObjectStore {
 public:
  /// Opens an existing root directory.
  static Result<std::unique_ptr<LocalObjectStore>> Open(
      const std::filesystem::path& root, LocalStoreOptions options = {});

  /// Creates the root directory (and parents) if missing, then opens it.
  static Result<std::unique_ptr<LocalObjectStore>> Create(
      const std::filesystem::path& root, LocalStoreOptions options = {});

  Status Put(const BlobKey& key, std::string_view bytes) override;
  Result<std::string> Get(const BlobKey& key) const override;
  Result<std::string> GetRange(const BlobKey& key, uint64_t offset,
                               uint64_t length) const override;
  Result<VersionedBlob> GetVersioned(const BlobKey& key) const override;
  Result<std::vector<BlobKey>> List(std::string_view prefix) const override;
  Status Delete(const BlobKey& key) override;
  Result<uint64_t> Size(const BlobKey& key) const override;
  Result<ConditionalToken> PutIfMatches(
      const BlobKey& key, std::string_view bytes,
      const std::optional<ConditionalToken>& expected) override;
  std::optional<std::filesystem::path> LocalRoot() const override { return root_; }
  std::string Describe() const override;

  const std::filesystem::path& root() const { return root_; }

 private:
  LocalObjectStore(std::filesystem::path root, LocalStoreOptions options)
      : root_(std::move(root)), options_(options) {}

  std::filesystem::path DataPath(const BlobKey& key) const;
  std::filesystem::path TokenPath(const BlobKey& key) const;
  std::filesystem::path LockPath(const BlobKey& key) const;

  Status WriteAtomically(const std::filesystem::path& target, std::string_view bytes) const;
  Result<std::optional<ConditionalToken>> ReadToken(const BlobKey& key) const;
  Result<ConditionalToken> WriteLocked(const BlobKey& key, std::string_view bytes);

  std::filesystem::path root_;
  LocalStoreOptions options_;
};

class InMemoryObjectStore final : public ObjectStore {
 public:
  Status Put(const BlobKey& key, std::string_view bytes) override;
  Result<std::string> Get(const BlobKey& key) const override;
  Result<std::string> GetRange(const BlobKey& key, uint64_t offset,
                               uint64_t length) const override;
  Result<VersionedBlob> GetVersioned(const BlobKey& key) const override;
  Result<std::vector<BlobKey>> List(std::string_view prefix) const override;
  Status Delete(const BlobKey& key) override;
  Result<uint64_t> Size(const BlobKey& key) const override;
  Result<ConditionalToken> PutIfMatches(
      const BlobKey& key, std::string_view bytes,
      const std::optional<ConditionalToken>& expected) override;
  std::string Describe() const override { return "memory://"; }

 private:
  struct Entry {
    std::string bytes;
    ConditionalToken token;
  };

  ConditionalToken NextToken(const std::string& key, std::string_view bytes);

  mutable std::mutex mu_;
  std::map<std::string, Entry, std::less<>> entries_;
  std::map<std::string, uint64_t, std::less<>> counters_;
};

/// Helpers for keys built from trusted components.
Result<BlobKey> JoinKey(std::string_view prefix, std::string_view suffix);

/// Store root from the `--store` flag value, falling back to `EDSP_STORE`.
std::optional<std::filesystem::path> ResolveStoreRoot(std::string_view flag_value);

}  // namespace edsp
