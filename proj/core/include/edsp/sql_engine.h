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

/// \file edsp/sql_engine.h
/// A small SQL dialect over tables, executed column-at-a-time.
///
///     SELECT * | item, ... FROM table [WHERE predicate]
///         [GROUP BY column, ...] [LIMIT n]
///     CREATE EXTERNAL TABLE name LOCATION 'location' FORMAT EDSP_ICE_V1
///
/// Items are columns or COUNT(*), COUNT(c), SUM(c), AVG(c), MIN(c), MAX(c).
/// Keywords are case-insensitive, identifiers are not.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/object_store.h"
#include "edsp/predicate.h"
#include "edsp/result.h"
#include "edsp/table_format.h"
#include "edsp/value.h"

namespace edsp {

enum class AggregateFn : uint8_t { kCount, kSum, kAvg, kMin, kMax };

std::string_view ToString(AggregateFn fn);

struct SelectItem {
  enum class Kind : uint8_t { kStar, kColumn, kAggregate };

  Kind kind = Kind::kColumn;
  /// Empty for COUNT(*).
  std::string column;
  AggregateFn fn = AggregateFn::kCount;

  /// "id", "COUNT(*)", "AVG(rating)".
  std::string OutputName() const;
};

struct SelectStatement {
  std::vector<SelectItem> items;
  std::string table;
  PredicatePtr where;
  std::vector<std::string> group_by;
  std::optional<int64_t> limit;
};

struct CreateExternalTableStatement {
  std::string name;
  std::string location;
  std::string format;
};

using Statement = std::variant<SelectStatement, CreateExternalTableStatement>;

inline constexpr std::string_view kExternalTableFormat = "EDSP_ICE_V1";

/// kSyntaxError with the byte position, or kUnsupportedFeature for SQL outside
/// the dialect (joins, ORDER BY, HAVING, ...).
Result<Statement> ParseStatement(std::string_view sql);

/// Parses a bare predicate such as `prefecture = 'P31' AND rating >= 4`.
Result<PredicatePtr> ParsePredicate(std::string_view text);

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<DataType> types;
  std::vector<Row> rows;
  ScanCounters counters;

  /// {"columns": [...], "types": [...], "rows": [[...], ...]}; with counters,
  /// an extra "counters" object.
  nlohmann::json ToJson(bool with_counters = false) const;
  static Result<QueryResult> FromJson(const nlohmann::json& json);

  /// Header line then one line per row in the ingest CSV dialect.
  std::string ToCsv() const;
};

nlohmann::json ValueToJson(const Value& value);
Result<Value> ValueFromJson(const nlohmann::json& json, DataType type);

struct ExecOptions {
  /// Skip files whose statistics rule out the WHERE clause.
  bool prune = true;
  AsOf as_of;
};

/// Runs a SELECT against the table at `location`. LIMIT trims the output only;
/// every planned file is read.
Result<QueryResult> ExecuteSelect(const ObjectStore& store, std::string_view location,
                                  const SelectStatement& statement,
                                  const ExecOptions& options = {});

/// Maps table names used in FROM to table locations.
class TableResolver {
 public:
  virtual ~TableResolver() = default;
  /// kUnknownTable when the name is not registered.
  virtual Result<std::string> Resolve(std::string_view name) const = 0;
};

class MapResolver final : public TableResolver {
 public:
  MapResolver() = default;
  explicit MapResolver(const std::map<std::string, std::string>& tables)
      : tables_(tables.begin(), tables.end()) {}

  /// False when the name is already present.
  bool Add(std::string name, std::string location);
  bool Contains(std::string_view name) const;
  Result<std::string> Resolve(std::string_view name) const override;

 private:
  std::map<std::string, std::string, std::less<>> tables_;
};

/// Statement execution with session-local CREATE EXTERNAL TABLE registrations,
/// falling back to an optional resolver.
class SqlSession {
 public:
  explicit SqlSession(const ObjectStore& store, const TableResolver* fallback = nullptr)
      : store_(store), fallback_(fallback) {}

  /// CREATE returns an empty result.
  Result<QueryResult> Execute(std::string_view sql, const ExecOptions& options = {});

  /// Checks the location holds a table. kDuplicateName if the name is taken.
  Status RegisterExternalTable(std::string name, std::string location);

  Result<std::string> Resolve(std::string_view name) const;

 private:
  const ObjectStore& store_;
  const TableResolver* fallback_;
  MapResolver tables_;
};

}  // namespace edsp
