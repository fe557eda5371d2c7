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

/// \file edsp/catalog.h
/// Dataset registry with per-engine access snippets, persisted as
/// `catalog.json` at the store root and updated by compare-and-swap.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/object_store.h"
#include "edsp/result.h"
#include "edsp/sql_engine.h"

namespace edsp {

inline constexpr std::string_view kCatalogKey = "catalog.json";

struct CatalogEntry {
  std::string name;
  std::string location;
  std::string description;
  std::string update_cadence;
  std::string owner;
  std::vector<std::string> registered_engines;
  int64_t created_ms = 0;

  nlohmann::json ToJson() const;
  static Result<CatalogEntry> FromJson(const nlohmann::json& json);

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

/// Snippet templates keyed by engine id. Placeholders: {name}, {location},
/// {store} (store root directory) and {table_root} (absolute table directory).
std::map<std::string, std::string> DefaultSnippetTemplates();

std::string ExpandTemplate(std::string_view text,
                           const std::map<std::string, std::string>& values);

class Catalog {
 public:
  explicit Catalog(ObjectStore& store) : store_(&store) {}

  /// kDuplicateName when the name is taken, kInvalidTable when the location
  /// does not hold a table. Writes only `catalog.json`.
  Result<CatalogEntry> Register(std::string name, std::string location,
                                std::string description, std::string update_cadence,
                                std::string owner = {});

  Result<std::vector<CatalogEntry>> List() const;

  /// kUnknownEntry when absent.
  Result<CatalogEntry> Get(std::string_view name) const;

  /// kUnknownEntry or kUnknownEngine.
  Result<std::string> Snippet(std::string_view name, std::string_view engine) const;

  /// Entry, current schema, current snapshot summary and every snippet.
  Result<nlohmann::json> Describe(std::string_view name) const;

  Result<std::map<std::string, std::string>> SnippetTemplates() const;

  /// Adds or replaces the template of an engine id.
  Status SetSnippetTemplate(std::string engine, std::string text);

  const ObjectStore& store() const { return *store_; }

 private:
  struct State {
    std::vector<CatalogEntry> entries;
    std::map<std::string, std::string> templates;
  };

  Result<State> Read(std::optional<ConditionalToken>* token) const;
  Status Mutate(const std::function<Status(State&)>& change);

  ObjectStore* store_;
};

/// Resolves FROM names to catalog locations.
class CatalogResolver final : public TableResolver {
 public:
  explicit CatalogResolver(const Catalog& catalog) : catalog_(catalog) {}
  Result<std::string> Resolve(std::string_view name) const override;

 private:
  const Catalog& catalog_;
};

/// Read-only HTTP facade: `GET /tables` and `GET /tables/{name}`. Other
/// methods answer 405, unknown tables 404.
class CatalogServer {
 public:
  explicit CatalogServer(const Catalog& catalog);
  ~CatalogServer();

  CatalogServer(const CatalogServer&) = delete;
  CatalogServer& operator=(const CatalogServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  Status Start(const std::string& host, int port);
  int port() const;
  void Stop();

  /// Binds and serves on the calling thread until Stop().
  Status Run(const std::string& host, int port);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edsp
