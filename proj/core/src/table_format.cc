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

#include "edsp/table_format.h"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "edsp/util.h"

namespace edsp {

namespace {

using nlohmann::json;

Error Malformed(std::string_view what, std::string_view detail) {
  return MakeError(ErrorKind::kInvalidTable, "malformed {}: {}", what, detail);
}

Result<json> ParseJson(std::string_view bytes, std::string_view what) {
  json j = json::parse(bytes, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return Malformed(what, "not valid JSON");
  return j;
}

template <typename T>
Result<T> Required(const json& j, std::string_view key, std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) return Malformed(what, fmt::format("missing '{}'", key));
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) return Malformed(what, fmt::format("'{}' is not a string", key));
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) {
      return Malformed(what, fmt::format("'{}' is not an integer", key));
    }
  }
  return it->get<T>();
}

Result<ManifestEntry> ManifestEntryFromJson(const json& j, const TableMetadata& metadata) {
  constexpr std::string_view kWhat = "manifest entry";
  if (!j.is_object()) return Malformed(kWhat, "not an object");
  ManifestEntry entry;
  EDSP_ASSIGN_OR_RETURN(entry.data_path, Required<std::string>(j, "data-path", kWhat));
  EDSP_ASSIGN_OR_RETURN(entry.row_count, Required<int64_t>(j, "row-count", kWhat));
  EDSP_ASSIGN_OR_RETURN(entry.file_size, Required<int64_t>(j, "file-size", kWhat));
  EDSP_ASSIGN_OR_RETURN(entry.schema_id, Required<int32_t>(j, "schema-id", kWhat));
  const Schema* schema = metadata.SchemaById(entry.schema_id);
  if (schema == nullptr) {
    return Malformed(kWhat, fmt::format("unknown schema-id {}", entry.schema_id));
  }
  if (!j.contains("stats")) return Malformed(kWhat, "missing 'stats'");
  auto stats = ecf::StatsFromJson(j["stats"], *schema);
  if (!stats.has_value()) return Malformed(kWhat, stats.error().message);
  entry.stats = std::move(*stats);
  return entry;
}

Result<TableMetadata> ReadMetadataFile(const ObjectStore& store, const PointerFile& pointer) {
  EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(pointer.metadata_file));
  auto bytes = store.Get(key);
  if (!bytes.has_value()) {
    if (bytes.error().kind == ErrorKind::kNotFound) {
      return MakeError(ErrorKind::kInvalidTable, "pointer names missing metadata file {}",
                       pointer.metadata_file);
    }
    return std::move(bytes).error();
  }
  EDSP_ASSIGN_OR_RETURN(auto j, ParseJson(*bytes, "table metadata"));
  EDSP_ASSIGN_OR_RETURN(auto metadata, TableMetadata::FromJson(j));
  if (metadata.sequence != pointer.sequence || metadata.table_uuid != pointer.table_uuid) {
    return MakeError(ErrorKind::kInvalidTable,
                     "metadata file {} (sequence {}, uuid {}) does not match its pointer "
                     "(sequence {}, uuid {})",
                     pointer.metadata_file, metadata.sequence, metadata.table_uuid,
                     pointer.sequence, pointer.table_uuid);
  }
  return metadata;
}

Result<BlobKey> PointerKey(std::string_view location) {
  if (location.empty()) return InvalidArgument("table location must not be empty");
  return BlobKey::Make(TablePaths::Pointer(location));
}

/// Writes the metadata file for `metadata` and swings the pointer to it.
/// Returns false when the pointer moved since `expected` was read.
/// Writes an immutable object; false when the key is already taken.
Result<bool> PutNew(ObjectStore& store, const BlobKey& key, std::string_view bytes) {
  auto created = store.PutIfMatches(key, bytes, std::nullopt);
  if (created.has_value()) return true;
  if (created.error().kind == ErrorKind::kPreconditionFailed) return false;
  return std::move(created).error();
}

Result<bool> PublishMetadata(ObjectStore& store, const TableMetadata& metadata,
                             const std::optional<ConditionalToken>& expected) {
  EDSP_ASSIGN_OR_RETURN(auto pointer_key, PointerKey(metadata.location));
  std::string metadata_path =
      TablePaths::Metadata(metadata.location, metadata.sequence, NewUuidV4());
  EDSP_ASSIGN_OR_RETURN(auto metadata_key, BlobKey::Make(metadata_path));
  EDSP_RETURN_IF_ERROR(store.Put(metadata_key, metadata.ToJson().dump(2)));
  PointerFile pointer{metadata_path, metadata.sequence, metadata.table_uuid};
  auto swapped = store.PutIfMatches(pointer_key, pointer.ToJson().dump(), expected);
  if (!swapped.has_value()) {
    if (swapped.error().kind == ErrorKind::kPreconditionFailed) return false;
    return std::move(swapped).error();
  }
  return true;
}

struct VersionedTable {
  ConditionalToken token;
  TableMetadata metadata;
};

Result<VersionedTable> ReadVersioned(const ObjectStore& store, std::string_view location) {
  EDSP_ASSIGN_OR_RETURN(auto pointer_key, PointerKey(location));
  auto blob = store.GetVersioned(pointer_key);
  if (!blob.has_value()) {
    if (blob.error().kind == ErrorKind::kNotFound) {
      return NotFound("no table at '{}'", location);
    }
    return std::move(blob).error();
  }
  EDSP_ASSIGN_OR_RETURN(auto j, ParseJson(blob->bytes, "pointer file"));
  EDSP_ASSIGN_OR_RETURN(auto pointer, PointerFile::FromJson(j));
  EDSP_ASSIGN_OR_RETURN(auto metadata, ReadMetadataFile(store, pointer));
  return VersionedTable{std::move(blob->token), std::move(metadata)};
}

// Exponential backoff with equal jitter: half the cap is always waited so
// the retry budget keeps growing while writers stay spread out.
void Backoff(const CommitOptions& options, int attempt) {
  auto cap = options.base_backoff * (int64_t{1} << std::min(attempt, 16));
  cap = std::min(cap, options.max_backoff);
  if (cap.count() <= 0) return;
  int64_t half = cap.count() / 2;
  auto sleep = std::chrono::microseconds(
      half + static_cast<int64_t>(RandomU64() % static_cast<uint64_t>(cap.count() - half + 1)));
  std::this_thread::sleep_for(sleep);
}

/// Process-wide commit lock of one table, held for a whole commit when
/// CommitOptions::serialize_in_process is set.
std::unique_lock<std::mutex> LockTableCommits(const ObjectStore& store,
                                              std::string_view location,
                                              const CommitOptions& options) {
  if (!options.serialize_in_process) return {};
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> registry;
  std::string key = fmt::format("{}@{}|{}", store.Describe(),
                                static_cast<const void*>(&store), location);
  if (auto root = store.LocalRoot()) key = fmt::format("{}|{}", root->string(), location);
  std::mutex* table_mu = nullptr;
  {
    std::lock_guard guard(registry_mu);
    auto& slot = registry[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    table_mu = slot.get();
  }
  return std::unique_lock<std::mutex>(*table_mu);
}

int64_t NewSnapshotId(const TableMetadata& metadata) {
  while (true) {
    auto id = static_cast<int64_t>(RandomU64() >> 1);
    if (id != 0 && metadata.SnapshotById(id) == nullptr) return id;
  }
}

}  // namespace

// --------------------------------------------------------------------------
// JSON

std::string_view ToString(SnapshotOperation op) {
  return op == SnapshotOperation::kAppend ? "append" : "overwrite";
}

json ManifestEntry::ToJson() const {
  return {{"data-path", data_path},
          {"row-count", row_count},
          {"file-size", file_size},
          {"schema-id", schema_id},
          {"stats", ecf::StatsToJson(stats)}};
}

json Snapshot::ToJson() const {
  json j = {{"snapshot-id", snapshot_id},
            {"sequence-number", sequence},
            {"timestamp-ms", timestamp_ms},
            {"operation", std::string(ToString(operation))},
            {"manifest-path", manifest_path},
            {"schema-id", schema_id},
            {"summary", {{"total-rows", total_rows}, {"total-files", total_files}}}};
  if (parent_id.has_value()) j["parent-snapshot-id"] = *parent_id;
  return j;
}

Result<Snapshot> Snapshot::FromJson(const json& j) {
  constexpr std::string_view kWhat = "snapshot";
  if (!j.is_object()) return Malformed(kWhat, "not an object");
  Snapshot s;
  EDSP_ASSIGN_OR_RETURN(s.snapshot_id, Required<int64_t>(j, "snapshot-id", kWhat));
  if (j.contains("parent-snapshot-id")) {
    EDSP_ASSIGN_OR_RETURN(s.parent_id, Required<int64_t>(j, "parent-snapshot-id", kWhat));
  }
  EDSP_ASSIGN_OR_RETURN(s.sequence, Required<int64_t>(j, "sequence-number", kWhat));
  EDSP_ASSIGN_OR_RETURN(s.timestamp_ms, Required<int64_t>(j, "timestamp-ms", kWhat));
  EDSP_ASSIGN_OR_RETURN(auto op, Required<std::string>(j, "operation", kWhat));
  if (op == "append") {
    s.operation = SnapshotOperation::kAppend;
  } else if (op == "overwrite") {
    s.operation = SnapshotOperation::kOverwrite;
  } else {
    return Malformed(kWhat, fmt::format("unknown operation '{}'", op));
  }
  EDSP_ASSIGN_OR_RETURN(s.manifest_path, Required<std::string>(j, "manifest-path", kWhat));
  EDSP_ASSIGN_OR_RETURN(s.schema_id, Required<int32_t>(j, "schema-id", kWhat));
  if (j.contains("summary") && j["summary"].is_object()) {
    const json& summary = j["summary"];
    s.total_rows = summary.value("total-rows", int64_t{0});
    s.total_files = summary.value("total-files", int64_t{0});
  }
  return s;
}

const Schema& TableMetadata::CurrentSchema() const { return *SchemaById(current_schema_id); }

const Schema* TableMetadata::SchemaById(int32_t schema_id) const {
  for (const auto& schema : schemas) {
    if (schema.schema_id() == schema_id) return &schema;
  }
  return nullptr;
}

const Snapshot* TableMetadata::CurrentSnapshot() const {
  return current_snapshot_id.has_value() ? SnapshotById(*current_snapshot_id) : nullptr;
}

const Snapshot* TableMetadata::SnapshotById(int64_t snapshot_id) const {
  for (const auto& snapshot : snapshots) {
    if (snapshot.snapshot_id == snapshot_id) return &snapshot;
  }
  return nullptr;
}

const Snapshot* TableMetadata::SnapshotBySequence(int64_t seq) const {
  for (const auto& snapshot : snapshots) {
    if (snapshot.sequence == seq) return &snapshot;
  }
  return nullptr;
}

json TableMetadata::ToJson() const {
  json schema_list = json::array();
  for (const auto& schema : schemas) schema_list.push_back(schema.ToJson());
  json snapshot_list = json::array();
  for (const auto& snapshot : snapshots) snapshot_list.push_back(snapshot.ToJson());
  json j = {{"format-version", format_version},
            {"table-uuid", table_uuid},
            {"location", location},
            {"sequence", sequence},
            {"last-sequence-number", last_sequence_number},
            {"last-updated-ms", last_updated_ms},
            {"current-schema-id", current_schema_id},
            {"schemas", std::move(schema_list)},
            {"snapshots", std::move(snapshot_list)},
            {"current-snapshot-id", nullptr}};
  if (current_snapshot_id.has_value()) j["current-snapshot-id"] = *current_snapshot_id;
  return j;
}

Result<TableMetadata> TableMetadata::FromJson(const json& j) {
  constexpr std::string_view kWhat = "table metadata";
  if (!j.is_object()) return Malformed(kWhat, "not an object");
  TableMetadata m;
  EDSP_ASSIGN_OR_RETURN(m.format_version, Required<int>(j, "format-version", kWhat));
  if (m.format_version != kFormatVersion) {
    return Malformed(kWhat, fmt::format("unsupported format-version {}", m.format_version));
  }
  EDSP_ASSIGN_OR_RETURN(m.table_uuid, Required<std::string>(j, "table-uuid", kWhat));
  EDSP_ASSIGN_OR_RETURN(m.location, Required<std::string>(j, "location", kWhat));
  EDSP_ASSIGN_OR_RETURN(m.sequence, Required<int64_t>(j, "sequence", kWhat));
  EDSP_ASSIGN_OR_RETURN(m.last_sequence_number,
                        Required<int64_t>(j, "last-sequence-number", kWhat));
  EDSP_ASSIGN_OR_RETURN(m.last_updated_ms, Required<int64_t>(j, "last-updated-ms", kWhat));
  EDSP_ASSIGN_OR_RETURN(m.current_schema_id,
                        Required<int32_t>(j, "current-schema-id", kWhat));
  if (!j.contains("schemas") || !j["schemas"].is_array() || j["schemas"].empty()) {
    return Malformed(kWhat, "'schemas' must be a non-empty array");
  }
  for (const auto& item : j["schemas"]) {
    auto schema = Schema::FromJson(item);
    if (!schema.has_value()) return Malformed(kWhat, schema.error().message);
    m.schemas.push_back(std::move(*schema));
  }
  if (m.SchemaById(m.current_schema_id) == nullptr) {
    return Malformed(kWhat, "current-schema-id names no schema");
  }
  if (!j.contains("snapshots") || !j["snapshots"].is_array()) {
    return Malformed(kWhat, "'snapshots' must be an array");
  }
  for (const auto& item : j["snapshots"]) {
    EDSP_ASSIGN_OR_RETURN(auto snapshot, Snapshot::FromJson(item));
    if (m.SchemaById(snapshot.schema_id) == nullptr) {
      return Malformed(kWhat, "snapshot references an unknown schema");
    }
    m.snapshots.push_back(std::move(snapshot));
  }
  if (j.contains("current-snapshot-id") && !j["current-snapshot-id"].is_null()) {
    EDSP_ASSIGN_OR_RETURN(m.current_snapshot_id,
                          Required<int64_t>(j, "current-snapshot-id", kWhat));
  }
  if (m.current_snapshot_id.has_value() != !m.snapshots.empty()) {
    return Malformed(kWhat, "current-snapshot-id must be present iff snapshots exist");
  }
  if (m.current_snapshot_id.has_value()) {
    const Snapshot* current = m.CurrentSnapshot();
    if (current == nullptr || current->sequence != m.last_sequence_number) {
      return Malformed(kWhat, "current snapshot is not the newest snapshot");
    }
  }
  return m;
}

json PointerFile::ToJson() const {
  return {{"metadata-file", metadata_file}, {"sequence", sequence}, {"table-uuid", table_uuid}};
}

Result<PointerFile> PointerFile::FromJson(const json& j) {
  constexpr std::string_view kWhat = "pointer file";
  if (!j.is_object()) return Malformed(kWhat, "not an object");
  PointerFile p;
  EDSP_ASSIGN_OR_RETURN(p.metadata_file, Required<std::string>(j, "metadata-file", kWhat));
  EDSP_ASSIGN_OR_RETURN(p.sequence, Required<int64_t>(j, "sequence", kWhat));
  EDSP_ASSIGN_OR_RETURN(p.table_uuid, Required<std::string>(j, "table-uuid", kWhat));
  return p;
}

json ScanCounters::ToJson() const {
  return {{"files_considered", files_considered},
          {"files_pruned", files_pruned},
          {"data_bytes_read", data_bytes_read},
          {"rows_scanned", rows_scanned},
          {"wall_time_ms", wall_time_ms}};
}

// --------------------------------------------------------------------------
// Paths

std::string TablePaths::Pointer(std::string_view location) {
  return fmt::format("{}/metadata/{}", location, kPointerFileName);
}

std::string TablePaths::Metadata(std::string_view location, int64_t sequence,
                                 std::string_view uuid) {
  return fmt::format("{}/metadata/v{}-{}.metadata.json", location, sequence, uuid);
}

std::string TablePaths::Manifest(std::string_view location, int64_t snapshot_id) {
  return fmt::format("{}/metadata/snap-{}.manifest.json", location, snapshot_id);
}

std::string TablePaths::DataFile(std::string_view location, std::string_view uuid) {
  return fmt::format("{}/data/{}{}", location, uuid, ecf::kFileExtension);
}

// --------------------------------------------------------------------------
// Operations

Result<TableMetadata> CreateTable(ObjectStore& store, std::string_view location,
                                  const Schema& schema) {
  EDSP_ASSIGN_OR_RETURN(auto pointer_key, PointerKey(location));
  if (location.back() == '/') {
    return InvalidArgument("table location must not end with '/'");
  }
  auto existing = store.Size(pointer_key);
  if (existing.has_value()) {
    return AlreadyExists("a table already exists at '{}'", location);
  }
  TableMetadata metadata;
  metadata.table_uuid = NewUuidV4();
  metadata.location = std::string(location);
  metadata.sequence = 1;
  metadata.last_updated_ms = NowMs();
  EDSP_ASSIGN_OR_RETURN(auto initial, Schema::Make(schema.fields(), 0));
  metadata.schemas.push_back(std::move(initial));
  metadata.current_schema_id = 0;
  EDSP_ASSIGN_OR_RETURN(bool published, PublishMetadata(store, metadata, std::nullopt));
  if (!published) {
    return AlreadyExists("a table already exists at '{}'", location);
  }
  return metadata;
}

Result<PointerFile> ReadPointer(const ObjectStore& store, std::string_view location) {
  EDSP_ASSIGN_OR_RETURN(auto pointer_key, PointerKey(location));
  auto bytes = store.Get(pointer_key);
  if (!bytes.has_value()) {
    if (bytes.error().kind == ErrorKind::kNotFound) {
      return NotFound("no table at '{}'", location);
    }
    return std::move(bytes).error();
  }
  EDSP_ASSIGN_OR_RETURN(auto j, ParseJson(*bytes, "pointer file"));
  return PointerFile::FromJson(j);
}

Result<LoadedTable> LoadTable(const ObjectStore& store, std::string_view location,
                              const AsOf& at) {
  LoadedTable table;
  EDSP_ASSIGN_OR_RETURN(table.pointer, ReadPointer(store, location));
  EDSP_ASSIGN_OR_RETURN(table.metadata, ReadMetadataFile(store, table.pointer));
  const TableMetadata& m = table.metadata;
  if (std::holds_alternative<std::monostate>(at)) {
    if (const Snapshot* current = m.CurrentSnapshot()) table.snapshot = *current;
    table.schema = m.CurrentSchema();
    return table;
  }
  if (const auto* id = std::get_if<SnapshotId>(&at)) {
    const Snapshot* snapshot = m.SnapshotById(id->value);
    if (snapshot == nullptr) {
      return MakeError(ErrorKind::kUnknownSnapshot, "table '{}' has no snapshot {}",
                       location, id->value);
    }
    table.snapshot = *snapshot;
  } else {
    const int64_t t = std::get<TimestampMs>(at).value;
    const Snapshot* best = nullptr;
    for (const auto& snapshot : m.snapshots) {
      if (snapshot.timestamp_ms <= t && (best == nullptr || snapshot.sequence > best->sequence)) {
        best = &snapshot;
      }
    }
    if (best == nullptr) {
      return MakeError(ErrorKind::kNoSnapshotBeforeTimestamp,
                       "table '{}' has no snapshot at or before {}", location, t);
    }
    table.snapshot = *best;
  }
  table.schema = *m.SchemaById(table.snapshot->schema_id);
  return table;
}

Result<std::vector<ManifestEntry>> ReadManifest(const ObjectStore& store,
                                                const TableMetadata& metadata,
                                                const Snapshot& snapshot) {
  EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(snapshot.manifest_path));
  auto bytes = store.Get(key);
  if (!bytes.has_value()) {
    if (bytes.error().kind == ErrorKind::kNotFound) {
      return MakeError(ErrorKind::kInvalidTable, "manifest {} is missing",
                       snapshot.manifest_path);
    }
    return std::move(bytes).error();
  }
  EDSP_ASSIGN_OR_RETURN(auto j, ParseJson(*bytes, "manifest"));
  if (!j.is_array()) return Malformed("manifest", "not an array");
  std::vector<ManifestEntry> entries;
  entries.reserve(j.size());
  for (const auto& item : j) {
    EDSP_ASSIGN_OR_RETURN(auto entry, ManifestEntryFromJson(item, metadata));
    entries.push_back(std::move(entry));
  }
  return entries;
}

Result<ManifestEntry> WriteDataFile(ObjectStore& store, std::string_view location,
                                    const Schema& schema, std::span<const Row> rows) {
  EDSP_ASSIGN_OR_RETURN(auto file, ecf::WriteFile(schema, rows));
  ManifestEntry entry;
  entry.data_path = TablePaths::DataFile(location, NewUuidV7());
  EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(entry.data_path));
  EDSP_ASSIGN_OR_RETURN(bool written, PutNew(store, key, file.bytes));
  if (!written) return AlreadyExists("data file '{}' already exists", key.str());
  entry.row_count = file.row_count;
  entry.file_size = static_cast<int64_t>(file.bytes.size());
  entry.stats = std::move(file.stats);
  entry.schema_id = schema.schema_id();
  return entry;
}

namespace {

/// Checks that every new entry names a stored ECF file whose footer agrees.
Status ValidateNewEntries(const ObjectStore& store, const std::vector<ManifestEntry>& entries,
                          int32_t expected_schema_id) {
  for (const auto& entry : entries) {
    if (entry.schema_id != expected_schema_id) {
      return MakeError(ErrorKind::kSchemaMismatch,
                       "entry {} was written with schema {} but the commit expects {}",
                       entry.data_path, entry.schema_id, expected_schema_id);
    }
    EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(entry.data_path));
    auto size = store.Size(key);
    if (!size.has_value()) {
      if (size.error().kind == ErrorKind::kNotFound) {
        return InvalidArgument("data file {} is not in the store", entry.data_path);
      }
      return std::move(size).error();
    }
    if (static_cast<int64_t>(*size) != entry.file_size) {
      return InvalidArgument("data file {} has {} bytes, entry says {}", entry.data_path,
                             *size, entry.file_size);
    }
    ecf::BlobSource source(store, key, *size);
    EDSP_ASSIGN_OR_RETURN(auto reader, ecf::FileReader::Open(source));
    if (reader.row_count() != entry.row_count) {
      return InvalidArgument("data file {} holds {} rows, entry says {}", entry.data_path,
                             reader.row_count(), entry.row_count);
    }
  }
  return Ok();
}

}  // namespace

Result<Snapshot> Commit(ObjectStore& store, std::string_view location,
                        SnapshotOperation operation, std::vector<ManifestEntry> new_entries,
                        int32_t expected_schema_id, const CommitOptions& options,
                        CommitStats* stats) {
  EDSP_RETURN_IF_ERROR(ValidateNewEntries(store, new_entries, expected_schema_id));
  auto commit_lock = LockTableCommits(store, location, options);
  int64_t new_rows = 0;
  for (const auto& entry : new_entries) new_rows += entry.row_count;

  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (stats != nullptr) stats->attempts = attempt + 1;
    if (attempt > 0) Backoff(options, attempt);

    EDSP_ASSIGN_OR_RETURN(auto base, ReadVersioned(store, location));
    TableMetadata metadata = std::move(base.metadata);
    if (metadata.current_schema_id != expected_schema_id) {
      return MakeError(ErrorKind::kSchemaMismatch,
                       "table schema is {} but the commit expects {}",
                       metadata.current_schema_id, expected_schema_id);
    }
    const Snapshot* parent = metadata.CurrentSnapshot();

    std::vector<ManifestEntry> entries;
    if (operation == SnapshotOperation::kAppend && parent != nullptr) {
      EDSP_ASSIGN_OR_RETURN(entries, ReadManifest(store, metadata, *parent));
    }
    entries.insert(entries.end(), new_entries.begin(), new_entries.end());

    Snapshot snapshot;
    snapshot.snapshot_id = NewSnapshotId(metadata);
    if (parent != nullptr) snapshot.parent_id = parent->snapshot_id;
    snapshot.sequence = metadata.last_sequence_number + 1;
    snapshot.timestamp_ms = std::max(NowMs(), parent != nullptr ? parent->timestamp_ms : 0);
    snapshot.operation = operation;
    snapshot.manifest_path = TablePaths::Manifest(location, snapshot.snapshot_id);
    snapshot.schema_id = expected_schema_id;
    snapshot.total_files = static_cast<int64_t>(entries.size());
    snapshot.total_rows = new_rows;
    if (operation == SnapshotOperation::kAppend && parent != nullptr) {
      snapshot.total_rows += parent->total_rows;
    }

    json manifest = json::array();
    for (const auto& entry : entries) manifest.push_back(entry.ToJson());
    EDSP_ASSIGN_OR_RETURN(auto manifest_key, BlobKey::Make(snapshot.manifest_path));
    EDSP_RETURN_IF_ERROR(store.Put(manifest_key, manifest.dump()));

    metadata.sequence += 1;
    metadata.last_sequence_number = snapshot.sequence;
    metadata.last_updated_ms = snapshot.timestamp_ms;
    metadata.current_snapshot_id = snapshot.snapshot_id;
    metadata.snapshots.push_back(snapshot);

    EDSP_ASSIGN_OR_RETURN(bool published, PublishMetadata(store, metadata, base.token));
    if (published) {
      if (stats != nullptr) stats->metadata_version = metadata.sequence;
      return snapshot;
    }
  }
  return MakeError(ErrorKind::kConflictExhausted,
                   "commit to '{}' lost the pointer race {} times", location,
                   options.max_retries + 1);
}

Result<Schema> EvolveSchema(ObjectStore& store, std::string_view location,
                            std::string column, DataType type,
                            const CommitOptions& options) {
  auto commit_lock = LockTableCommits(store, location, options);
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (attempt > 0) Backoff(options, attempt);
    EDSP_ASSIGN_OR_RETURN(auto base, ReadVersioned(store, location));
    TableMetadata metadata = std::move(base.metadata);
    EDSP_ASSIGN_OR_RETURN(auto schema, metadata.CurrentSchema().AddColumn(column, type));
    metadata.schemas.push_back(schema);
    metadata.current_schema_id = schema.schema_id();
    metadata.sequence += 1;
    metadata.last_updated_ms = NowMs();
    EDSP_ASSIGN_OR_RETURN(bool published, PublishMetadata(store, metadata, base.token));
    if (published) return schema;
  }
  return MakeError(ErrorKind::kConflictExhausted,
                   "schema change on '{}' lost the pointer race {} times", location,
                   options.max_retries + 1);
}

// --------------------------------------------------------------------------
// Scan planning

bool ConjunctExcludesFile(const ManifestEntry& entry, const Predicate& conjunct) {
  using Kind = Predicate::Kind;
  if (conjunct.kind() == Kind::kConstant) return !conjunct.constant();
  if (conjunct.kind() != Kind::kCompare && conjunct.kind() != Kind::kIsNull &&
      conjunct.kind() != Kind::kIsNotNull) {
    return false;
  }
  auto it = entry.stats.find(conjunct.column());
  const bool column_in_file = it != entry.stats.end();
  const int64_t nulls = column_in_file ? it->second.null_count : entry.row_count;
  const bool all_null = nulls == entry.row_count;

  switch (conjunct.kind()) {
    case Kind::kIsNull:
      return nulls == 0;
    case Kind::kIsNotNull:
      return all_null;
    default:
      break;
  }
  if (all_null) return true;
  const auto& stats = it->second;
  if (!stats.min.has_value() || !stats.max.has_value()) return false;
  auto lo = CompareValues(conjunct.literal(), *stats.min);
  auto hi = CompareValues(conjunct.literal(), *stats.max);
  if (!lo.has_value() || !hi.has_value()) return false;
  switch (conjunct.op()) {
    case CompareOp::kEq:
      return *lo < 0 || *hi > 0;
    case CompareOp::kNe:
      return *lo == 0 && *hi == 0;
    case CompareOp::kLt:
      return *lo <= 0;
    case CompareOp::kLe:
      return *lo < 0;
    case CompareOp::kGt:
      return *hi >= 0;
    case CompareOp::kGe:
      return *hi > 0;
  }
  return false;
}

Result<ScanPlan> PlanScan(const ObjectStore& store, const LoadedTable& table,
                          const PredicatePtr& predicate, bool prune) {
  EDSP_RETURN_IF_ERROR(BindPredicate(predicate, table.schema));
  ScanPlan plan;
  plan.schema = table.schema;
  if (!table.snapshot.has_value()) return plan;
  EDSP_ASSIGN_OR_RETURN(auto entries, ReadManifest(store, table.metadata, *table.snapshot));
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.data_path < b.data_path;
            });
  const auto conjuncts = Conjuncts(predicate);
  for (auto& entry : entries) {
    ++plan.files_considered;
    bool excluded = false;
    if (prune) {
      for (const auto& conjunct : conjuncts) {
        if (ConjunctExcludesFile(entry, *conjunct)) {
          excluded = true;
          break;
        }
      }
    }
    if (excluded) {
      ++plan.files_pruned;
    } else {
      plan.files.push_back(std::move(entry));
    }
  }
  return plan;
}

}  // namespace edsp
