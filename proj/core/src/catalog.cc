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

#include "edsp/catalog.h"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "edsp/table_format.h"
#include "edsp/util.h"

namespace edsp {

nlohmann::json CatalogEntry::ToJson() const {
  return {
      {"name", name},
      {"location", location},
      {"description", description},
      {"update_cadence", update_cadence},
      {"owner", owner},
      {"registered_engines", registered_engines},
      {"created_ms", created_ms},
  };
}

Result<CatalogEntry> CatalogEntry::FromJson(const nlohmann::json& json) {
  try {
    CatalogEntry entry;
    entry.name = json.at("name").get<std::string>();
    entry.location = json.at("location").get<std::string>();
    entry.description = json.value("description", "");
    entry.update_cadence = json.value("update_cadence", "");
    entry.owner = json.value("owner", "");
    entry.registered_engines =
        json.value("registered_engines", std::vector<std::string>{});
    entry.created_ms = json.value("created_ms", int64_t{0});
    return entry;
  } catch (const nlohmann::json::exception& e) {
    return InvalidArgument("malformed catalog entry: {}", e.what());
  }
}

std::map<std::string, std::string> DefaultSnippetTemplates() {
  return {
      {"sql", "CREATE EXTERNAL TABLE {name} LOCATION '{location}' FORMAT EDSP_ICE_V1;"},
      {"scan", "edsp scan --store '{store}' --table-root '{location}'"},
      {"reader", "edsp-reader --table-root '{table_root}' --pattern q1 --format json"},
  };
}

std::string ExpandTemplate(std::string_view text,
                           const std::map<std::string, std::string>& values) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      size_t close = text.find('}', i);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

namespace {

std::string Lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

constexpr int kMaxCatalogRetries = 50;

}  // namespace

Result<Catalog::State> Catalog::Read(std::optional<ConditionalToken>* token) const {
  EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(kCatalogKey));
  State state;
  auto blob = store_->GetVersioned(key);
  if (!blob.has_value()) {
    if (blob.error().kind != ErrorKind::kNotFound) return blob.error();
    state.templates = DefaultSnippetTemplates();
    if (token != nullptr) token->reset();
    return state;
  }
  if (token != nullptr) *token = blob->token;
  try {
    auto json = nlohmann::json::parse(blob->bytes);
    for (const auto& item : json.at("tables")) {
      EDSP_ASSIGN_OR_RETURN(auto entry, CatalogEntry::FromJson(item));
      state.entries.push_back(std::move(entry));
    }
    state.templates = json.at("engines").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    return InvalidArgument("malformed {}: {}", kCatalogKey, e.what());
  }
  return state;
}

Status Catalog::Mutate(const std::function<Status(State&)>& change) {
  EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(kCatalogKey));
  for (int attempt = 0; attempt < kMaxCatalogRetries; ++attempt) {
    std::optional<ConditionalToken> token;
    EDSP_ASSIGN_OR_RETURN(auto state, Read(&token));
    EDSP_RETURN_IF_ERROR(change(state));
    nlohmann::json json;
    json["tables"] = nlohmann::json::array();
    for (const auto& entry : state.entries) json["tables"].push_back(entry.ToJson());
    json["engines"] = state.templates;
    auto put = store_->PutIfMatches(key, json.dump(2), token);
    if (put.has_value()) return Ok();
    if (put.error().kind != ErrorKind::kPreconditionFailed) return put.error();
  }
  return MakeError(ErrorKind::kConflictExhausted, "catalog update kept conflicting");
}

Result<CatalogEntry> Catalog::Register(std::string name, std::string location,
                                      std::string description, std::string update_cadence,
                                      std::string owner) {
  if (!IsValidIdentifier(name)) {
    return InvalidArgument("'{}' is not a valid table name", name);
  }
  if (location.find_first_of("'{}") != std::string::npos) {
    return InvalidArgument("location '{}' contains reserved characters", location);
  }
  auto loaded = LoadTable(*store_, location);
  if (!loaded.has_value()) {
    return MakeError(ErrorKind::kInvalidTable, "no table at '{}': {}", location,
                     loaded.error().message);
  }
  CatalogEntry entry;
  entry.name = std::move(name);
  entry.location = std::move(location);
  entry.description = std::move(description);
  entry.update_cadence = std::move(update_cadence);
  entry.owner = std::move(owner);
  entry.created_ms = NowMs();
  EDSP_RETURN_IF_ERROR(Mutate([&](State& state) -> Status {
    for (const auto& existing : state.entries) {
      if (existing.name == entry.name) {
        return MakeError(ErrorKind::kDuplicateName, "'{}' is already registered",
                         entry.name);
      }
    }
    entry.registered_engines.clear();
    for (const auto& [engine, text] : state.templates) {
      entry.registered_engines.push_back(engine);
    }
    state.entries.push_back(entry);
    return Ok();
  }));
  return entry;
}

Result<std::vector<CatalogEntry>> Catalog::List() const {
  EDSP_ASSIGN_OR_RETURN(auto state, Read(nullptr));
  std::sort(state.entries.begin(), state.entries.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return std::move(state.entries);
}

Result<CatalogEntry> Catalog::Get(std::string_view name) const {
  EDSP_ASSIGN_OR_RETURN(auto state, Read(nullptr));
  for (auto& entry : state.entries) {
    if (entry.name == name) return std::move(entry);
  }
  return MakeError(ErrorKind::kUnknownEntry, "no catalog entry named '{}'", name);
}

Result<std::map<std::string, std::string>> Catalog::SnippetTemplates() const {
  EDSP_ASSIGN_OR_RETURN(auto state, Read(nullptr));
  return std::move(state.templates);
}

Status Catalog::SetSnippetTemplate(std::string engine, std::string text) {
  engine = Lower(engine);
  if (engine.empty()) return InvalidArgument("engine id must not be empty");
  return Mutate([&](State& state) -> Status {
    state.templates[engine] = text;
    return Ok();
  });
}

Result<std::string> Catalog::Snippet(std::string_view name, std::string_view engine) const {
  EDSP_ASSIGN_OR_RETURN(auto state, Read(nullptr));
  const CatalogEntry* entry = nullptr;
  for (const auto& candidate : state.entries) {
    if (candidate.name == name) entry = &candidate;
  }
  if (entry == nullptr) {
    return MakeError(ErrorKind::kUnknownEntry, "no catalog entry named '{}'", name);
  }
  auto it = state.templates.find(Lower(engine));
  if (it == state.templates.end()) {
    return MakeError(ErrorKind::kUnknownEngine, "no snippet template for engine '{}'",
                     engine);
  }
  std::map<std::string, std::string> values{
      {"name", entry->name},
      {"location", entry->location},
      {"store", "."},
      {"table_root", entry->location},
  };
  if (auto root = store_->LocalRoot()) {
    std::filesystem::path absolute = std::filesystem::absolute(*root).lexically_normal();
    values["store"] = absolute.string();
    values["table_root"] = (absolute / entry->location).lexically_normal().string();
  }
  return ExpandTemplate(it->second, values);
}

Result<nlohmann::json> Catalog::Describe(std::string_view name) const {
  EDSP_ASSIGN_OR_RETURN(auto entry, Get(name));
  EDSP_ASSIGN_OR_RETURN(auto table, LoadTable(*store_, entry.location));
  EDSP_ASSIGN_OR_RETURN(auto templates, SnippetTemplates());
  nlohmann::json json;
  json["entry"] = entry.ToJson();
  json["schema"] = table.schema.ToJson();
  if (table.snapshot.has_value()) {
    const Snapshot& s = *table.snapshot;
    json["snapshot"] = {
        {"snapshot-id", s.snapshot_id},
        {"sequence-number", s.sequence},
        {"timestamp-ms", s.timestamp_ms},
        {"operation", std::string(ToString(s.operation))},
        {"total-rows", s.total_rows},
        {"total-files", s.total_files},
    };
  } else {
    json["snapshot"] = nullptr;
  }
  auto& snippets = json["snippets"] = nlohmann::json::object();
  for (const auto& [engine, text] : templates) {
    EDSP_ASSIGN_OR_RETURN(auto snippet, Snippet(name, engine));
    snippets[engine] = snippet;
  }
  return json;
}

Result<std::string> CatalogResolver::Resolve(std::string_view name) const {
  auto entry = catalog_.Get(name);
  if (!entry.has_value()) {
    if (entry.error().kind == ErrorKind::kUnknownEntry) {
      return MakeError(ErrorKind::kUnknownTable, "unknown table '{}'", name);
    }
    return entry.error();
  }
  return entry->location;
}

}  // namespace edsp
