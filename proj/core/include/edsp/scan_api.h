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

/// \file edsp/scan_api.h
/// Programmatic access to tables: lazy row streams with projection, predicate
/// pushdown and limits, plus grouped aggregation on top of them.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edsp/object_store.h"
#include "edsp/predicate.h"
#include "edsp/result.h"
#include "edsp/sql_engine.h"
#include "edsp/table_format.h"

namespace edsp {

struct ScanOptions {
  AsOf at;
  /// Empty selects every column of the schema.
  std::vector<std::string> columns;
  PredicatePtr predicate;
  std::optional<int64_t> limit;
  bool prune = true;
};

/// Rows in scan order: files sorted by data path, rows in file order. Holds at
/// most one file's matching rows at a time and stops opening files once the
/// limit is reached. Single consumer.
class RowStream {
 public:
  static Result<RowStream> Open(const ObjectStore& store, std::string_view location,
                                ScanOptions options);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<DataType>& types() const { return types_; }
  const Schema& schema() const { return plan_.schema; }
  const ScanCounters& counters() const { return counters_; }

  /// Returns false once the stream is exhausted.
  Result<bool> Next(Row& row);

  /// Drains the stream.
  Result<std::vector<Row>> Collect();

 private:
  RowStream(const ObjectStore& store, ScanOptions options)
      : store_(&store), options_(std::move(options)) {}

  Status LoadNextFile();

  const ObjectStore* store_;
  ScanOptions options_;
  ScanPlan plan_;
  std::vector<std::string> columns_;
  std::vector<DataType> types_;
  ScanCounters counters_;
  std::chrono::steady_clock::time_point started_;
  size_t next_file_ = 0;
  std::vector<Row> buffer_;
  size_t buffer_pos_ = 0;
  int64_t emitted_ = 0;
};

inline Result<RowStream> Scan(const ObjectStore& store, std::string_view location,
                              ScanOptions options = {}) {
  return RowStream::Open(store, location, std::move(options));
}

struct AggregateRequest {
  AggregateFn fn = AggregateFn::kCount;
  /// Empty for COUNT(*).
  std::string column;
};

struct AggregateOptions {
  AsOf at;
  std::vector<std::string> group_by;
  std::vector<AggregateRequest> aggregates;
  PredicatePtr predicate;
  bool prune = true;
};

/// Output columns are the group keys followed by the aggregates, one row per
/// group in ascending key order (nulls last); without grouping, exactly one row.
Result<QueryResult> Aggregate(const ObjectStore& store, std::string_view location,
                              const AggregateOptions& options);

}  // namespace edsp
