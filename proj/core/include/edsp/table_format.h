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

/// \file edsp/table_format.h
/// Snapshots, manifests and the commit protocol of a table.
///
/// A table rooted at `<location>/` is laid out as
///
///     metadata/latest.metadata.json         pointer to the newest metadata file
///     metadata/v<seq>-<uuid>.metadata.json  one per metadata version
///     metadata/snap-<id>.manifest.json      one per snapshot
///     data/<uuid>.ecf                        data files
///
/// Metadata file names change with every commit; readers always start from the
/// fixed-name pointer, and writers publish a new version by compare-and-swap on
/// that pointer. A commit that loses the race re-reads the pointer and rebuilds
/// its metadata on top of the winner.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/columnar_file.h"
#include "edsp/object_store.h"
#include "edsp/predicate.h"
#include "edsp/result.h"
#include "edsp/schema.h"

namespace edsp {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kPointerFileName = "latest.metadata.json";

struct ManifestEntry {
  std::string data_path;
  int64_t row_count = 0;
  int64_t file_size = 0;
  ecf::StatsMap stats;
  int32_t schema_id = 0;

  nlohmann::json ToJson() const;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

enum class SnapshotOperation : uint8_t { kAppend, kOverwrite };

std::string_view ToString(SnapshotOperation op);

struct Snapshot {
  int64_t snapshot_id = 0;
  std::optional<int64_t> parent_id;
  /// 1..K along the parent chain.
  int64_t sequence = 0;
  int64_t timestamp_ms = 0;
  SnapshotOperation operation = SnapshotOperation::kAppend;
  std::string manifest_path;
  int32_t schema_id = 0;
  int64_t total_rows = 0;
  int64_t total_files = 0;

  nlohmann::json ToJson() const;
  static Result<Snapshot> FromJson(const nlohmann::json& json);

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct TableMetadata {
  int format_version = kFormatVersion;
  std::string table_uuid;
  std::string location;
  /// Metadata version; the pointer carries the same number. Creation is 1.
  int64_t sequence = 0;
  int64_t last_sequence_number = 0;
  int64_t last_updated_ms = 0;
  std::vector<Schema> schemas;
  int32_t current_schema_id = 0;
  std::vector<Snapshot> snapshots;
  std::optional<int64_t> current_snapshot_id;

  const Schema& CurrentSchema() const;
  const Schema* SchemaById(int32_t schema_id) const;
  const Snapshot* CurrentSnapshot() const;
  const Snapshot* SnapshotById(int64_t snapshot_id) const;
  const Snapshot* SnapshotBySequence(int64_t sequence) const;

  nlohmann::json ToJson() const;
  static Result<TableMetadata> FromJson(const nlohmann::json& json);
};

struct PointerFile {
  std::string metadata_file;
  int64_t sequence = 0;
  std::string table_uuid;

  nlohmann::json ToJson() const;
  static Result<PointerFile> FromJson(const nlohmann::json& json);

  friend bool operator==(const PointerFile&, const PointerFile&) = default;
};

struct SnapshotId {
  int64_t value = 0;
};
struct TimestampMs {
  int64_t value = 0;
};

/// Which version of a table to read: current, a snapshot id, or the newest
/// snapshot committed at or before a wall-clock time.
using AsOf = std::variant<std::monostate, SnapshotId, TimestampMs>;

/// An immutable view of a table resolved from the pointer once.
struct LoadedTable {
  PointerFile pointer;
  TableMetadata metadata;
  std::optional<Snapshot> snapshot;
  /// Current schema for current reads; the snapshot's schema for time travel.
  Schema schema;
};

/// Keys of the objects that make up a table.
struct TablePaths {
  static std::string Pointer(std::string_view location);
  static std::string Metadata(std::string_view location, int64_t sequence,
                              std::string_view uuid);
  static std::string Manifest(std::string_view location, int64_t snapshot_id);
  static std::string DataFile(std::string_view location, std::string_view uuid);
};

/// Writes metadata version 1 (no snapshots) and creates the pointer.
/// kAlreadyExists when a pointer is already present.
Result<TableMetadata> CreateTable(ObjectStore& store, std::string_view location,
                                  const Schema& schema);

Result<PointerFile> ReadPointer(const ObjectStore& store, std::string_view location);

Result<LoadedTable> LoadTable(const ObjectStore& store, std::string_view location,
                              const AsOf& at = {});

Result<std::vector<ManifestEntry>> ReadManifest(const ObjectStore& store,
                                                const TableMetadata& metadata,
                                                const Snapshot& snapshot);

/// Encodes rows to `data/<uuid>.ecf` under the table and describes the file.
Result<ManifestEntry> WriteDataFile(ObjectStore& store, std::string_view location,
                                    const Schema& schema, std::span<const Row> rows);

struct CommitOptions {
  /// Retries after the first attempt when the pointer moved underneath us.
  int max_retries = 10;
  std::chrono::microseconds base_backoff{1000};
  std::chrono::microseconds max_backoff{500000};
  /// Commits from one process to the same table take turns; the pointer
  /// compare-and-swap still arbitrates between processes.
  bool serialize_in_process = true;
};

struct CommitStats {
  int attempts = 0;
  int64_t metadata_version = 0;
};

/// Publishes a new snapshot. APPEND keeps the parent's entries and adds
/// `new_entries`; OVERWRITE replaces them. Data files must already be stored;
/// they are never rewritten on retry.
Result<Snapshot> Commit(ObjectStore& store, std::string_view location,
                        SnapshotOperation operation, std::vector<ManifestEntry> new_entries,
                        int32_t expected_schema_id, const CommitOptions& options = {},
                        CommitStats* stats = nullptr);

/// Adds a nullable column and publishes it as a new metadata version.
Result<Schema> EvolveSchema(ObjectStore& store, std::string_view location,
                            std::string column, DataType type,
                            const CommitOptions& options = {});

/// Work counters reported by every query path.
struct ScanCounters {
  int64_t files_considered = 0;
  int64_t files_pruned = 0;
  int64_t data_bytes_read = 0;
  int64_t rows_scanned = 0;
  double wall_time_ms = 0;

  nlohmann::json ToJson() const;
};

struct ScanPlan {
  /// Surviving files, sorted by data path.
  std::vector<ManifestEntry> files;
  Schema schema;
  int64_t files_considered = 0;
  int64_t files_pruned = 0;
};

/// Whether a single conjunct is provably false for every row of the file.
/// Columns missing from the file's statistics are all-null there.
bool ConjunctExcludesFile(const ManifestEntry& entry, const Predicate& conjunct);

/// Selects the files of the table's snapshot that may hold matching rows.
Result<ScanPlan> PlanScan(const ObjectStore& store, const LoadedTable& table,
                          const PredicatePtr& predicate, bool prune = true);

}  // namespace edsp
