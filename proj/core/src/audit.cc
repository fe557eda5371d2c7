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

#include "edsp/audit.h"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "edsp/table_format.h"
#include "edsp/util.h"

namespace edsp {

namespace {

using nlohmann::json;

constexpr std::string_view kMetadataSegment = "/metadata/";

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool UnderRoot(std::string_view key, std::string_view root) {
  return key.size() > root.size() && StartsWith(key, root) && key[root.size()] == '/';
}

/// Table root implied by a metadata object key, or empty.
std::string RootOfMetadataKey(std::string_view key) {
  if (!EndsWith(key, ".metadata.json")) return {};
  auto pos = key.rfind(kMetadataSegment);
  if (pos == std::string_view::npos || pos == 0) return {};
  if (key.find('/', pos + kMetadataSegment.size()) != std::string_view::npos) return {};
  return std::string(key.substr(0, pos));
}

std::string UuidOfRoot(const ObjectStore& store, const std::string& root,
                       const std::vector<std::string>& metadata_keys) {
  if (auto pointer = ReadPointer(store, root); pointer.has_value()) {
    return pointer->table_uuid;
  }
  // No readable pointer: a copied metadata file still identifies the table.
  for (const auto& key : metadata_keys) {
    auto blob_key = BlobKey::Make(key);
    if (!blob_key.has_value()) continue;
    auto bytes = store.Get(*blob_key);
    if (!bytes.has_value()) continue;
    json j = json::parse(*bytes, nullptr, /*allow_exceptions=*/false);
    if (j.is_object() && j.contains("table-uuid") && j["table-uuid"].is_string()) {
      return j["table-uuid"].get<std::string>();
    }
  }
  return {};
}

}  // namespace

ScratchArea ScratchAreaFor(std::string_view engine) {
  return ScratchArea{std::string(engine), fmt::format("_scratch/{}/", engine)};
}

std::vector<ScratchArea> DefaultScratchAreas() {
  return {ScratchAreaFor("sql"), ScratchAreaFor("scan"), ScratchAreaFor("reader")};
}

int64_t ReplicaReport::RootsOf(std::string_view dataset) const {
  for (const auto& d : datasets) {
    if (d.name == dataset) return static_cast<int64_t>(d.roots.size());
  }
  return 0;
}

json ReplicaReport::ToJson() const {
  json ds = json::array();
  for (const auto& d : datasets) {
    ds.push_back({{"name", d.name},
                  {"location", d.location},
                  {"table_uuid", d.table_uuid},
                  {"roots", d.roots},
                  {"copies", d.copies},
                  {"data_files", d.data_files},
                  {"data_bytes", d.data_bytes}});
  }
  return {{"datasets", std::move(ds)},
          {"scratch_bytes", scratch_bytes},
          {"total_objects", total_objects},
          {"total_bytes", total_bytes},
          {"violations", violations},
          {"ok", ok()}};
}

Result<ReplicaReport> AuditReplicas(const ObjectStore& store,
                                    const std::vector<DatasetRef>& datasets,
                                    const std::vector<ScratchArea>& scratch) {
  ReplicaReport report;
  EDSP_ASSIGN_OR_RETURN(auto keys, store.List(""));

  std::map<std::string, std::vector<std::string>> metadata_by_root;
  std::unordered_map<std::string, uint64_t> sizes;
  for (const auto& key : keys) {
    EDSP_ASSIGN_OR_RETURN(auto size, store.Size(key));
    sizes[key.str()] = size;
    report.total_bytes += static_cast<int64_t>(size);
    if (auto root = RootOfMetadataKey(key.str()); !root.empty()) {
      metadata_by_root[root].push_back(key.str());
    }
  }
  report.total_objects = static_cast<int64_t>(keys.size());

  std::map<std::string, std::string> uuid_by_root;
  for (const auto& [root, metadata_keys] : metadata_by_root) {
    uuid_by_root[root] = UuidOfRoot(store, root, metadata_keys);
  }

  for (const auto& area : scratch) {
    int64_t bytes = 0;
    for (const auto& key : keys) {
      if (StartsWith(key.str(), area.prefix)) bytes += static_cast<int64_t>(sizes[key.str()]);
    }
    report.scratch_bytes[area.engine] = bytes;
    if (bytes != 0) {
      report.violations.push_back(
          fmt::format("engine '{}' holds {} bytes in scratch area {}", area.engine, bytes,
                      area.prefix));
    }
  }

  for (const auto& dataset : datasets) {
    DatasetCensus census;
    census.name = dataset.name;
    census.location = dataset.location;
    auto pointer = ReadPointer(store, dataset.location);
    if (!pointer.has_value()) {
      report.violations.push_back(fmt::format("dataset '{}' has no readable pointer at {}",
                                              dataset.name, dataset.location));
      report.datasets.push_back(std::move(census));
      continue;
    }
    census.table_uuid = pointer->table_uuid;
    for (const auto& [root, uuid] : uuid_by_root) {
      if (uuid == census.table_uuid) census.roots.push_back(root);
    }

    // Hash the dataset's data files, then any same-sized object elsewhere.
    std::map<uint64_t, std::set<std::string>> digests_by_size;
    for (const auto& key : keys) {
      if (!UnderRoot(key.str(), dataset.location) ||
          !EndsWith(key.str(), ecf::kFileExtension)) {
        continue;
      }
      EDSP_ASSIGN_OR_RETURN(auto bytes, store.Get(key));
      digests_by_size[bytes.size()].insert(Sha256Hex(bytes));
      ++census.data_files;
      census.data_bytes += static_cast<int64_t>(bytes.size());
    }
    for (const auto& key : keys) {
      if (UnderRoot(key.str(), dataset.location)) continue;
      auto it = digests_by_size.find(sizes[key.str()]);
      if (it == digests_by_size.end()) continue;
      EDSP_ASSIGN_OR_RETURN(auto bytes, store.Get(key));
      if (it->second.contains(Sha256Hex(bytes))) census.copies.push_back(key.str());
    }

    if (census.roots.size() != 1) {
      report.violations.push_back(fmt::format("dataset '{}' has {} table roots",
                                              dataset.name, census.roots.size()));
    }
    for (const auto& copy : census.copies) {
      report.violations.push_back(
          fmt::format("dataset '{}' data file copied to {}", dataset.name, copy));
    }
    report.datasets.push_back(std::move(census));
  }
  return report;
}

std::vector<std::string> CompareReports(const ReplicaReport& before,
                                        const ReplicaReport& after) {
  std::vector<std::string> out;
  for (const auto& [engine, bytes] : after.scratch_bytes) {
    int64_t previous = 0;
    if (auto it = before.scratch_bytes.find(engine); it != before.scratch_bytes.end()) {
      previous = it->second;
    }
    if (bytes != previous) {
      out.push_back(fmt::format("scratch area of '{}' changed by {} bytes", engine,
                                bytes - previous));
    }
  }
  for (const auto& d : after.datasets) {
    size_t roots_before = 0;
    size_t copies_before = 0;
    for (const auto& b : before.datasets) {
      if (b.name == d.name) {
        roots_before = b.roots.size();
        copies_before = b.copies.size();
      }
    }
    if (d.roots.size() > std::max<size_t>(roots_before, 1)) {
      out.push_back(fmt::format("dataset '{}' gained table roots ({} -> {})", d.name,
                                roots_before, d.roots.size()));
    }
    if (d.copies.size() > copies_before) {
      out.push_back(fmt::format("dataset '{}' gained {} copied data files", d.name,
                                d.copies.size() - copies_before));
    }
  }
  return out;
}

}  // namespace edsp
