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

/// \file edsp/bench_audit.h
/// Cross-engine result comparison, cold-start latency benchmarks and the
/// write-once audit.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/audit.h"
#include "edsp/object_store.h"
#include "edsp/result.h"
#include "edsp/sql_engine.h"

namespace edsp {

/// Default relative tolerance for FLOAT64 values.
inline constexpr double kFloatTolerance = 1e-9;

/// Rows sorted by every column under TotalOrder.
QueryResult Canonicalize(QueryResult result);

struct Comparison {
  bool equal = true;
  /// First difference found, empty when equal.
  std::string detail;
};

/// Compares canonicalized results: names, types and row count exactly, values
/// exactly except FLOAT64, which may differ by `relative_tolerance`.
Comparison CompareResults(const QueryResult& expected, const QueryResult& actual,
                          double relative_tolerance = kFloatTolerance);

/// One query of the workload, usable by SQL and pattern-based engines alike.
struct BenchQuery {
  std::string name;
  std::string sql;
  /// Pattern id and parameters for engines without SQL ("q1", "q2", "q3").
  std::string pattern;
  std::map<std::string, std::string> params;
};

inline constexpr int64_t kDefaultRowCap = 10000;

/// Q1 full extraction, Q2 `prefecture = <value>` filter, Q3 per-category
/// COUNT(*) and AVG(rating). `limit` nullopt drops the LIMIT clause.
std::vector<BenchQuery> PoiWorkload(std::string_view table = "poi",
                                    std::optional<int64_t> limit = kDefaultRowCap,
                                    std::string_view prefecture = "P31");

class QueryEngine {
 public:
  virtual ~QueryEngine() = default;
  virtual std::string id() const = 0;
  /// Whether Run executes inside the calling process.
  virtual bool in_process() const { return true; }
  virtual Result<QueryResult> Run(const ObjectStore& store, std::string_view location,
                                  const BenchQuery& query) = 0;
};

struct EngineConfig {
  /// Command template of the external reader engine. Placeholders:
  /// {table_root}, {pattern}, {params} (rendered as `--param k=v` pairs).
  std::string reader_command =
      "edsp-reader --table-root {table_root} --pattern {pattern} {params} --format json";
};

/// "sql", "scan" or "reader"; kUnknownEngine otherwise.
Result<std::unique_ptr<QueryEngine>> MakeEngine(std::string_view id,
                                                const EngineConfig& config = {});

/// Runs a statement through the scan API rather than the SQL executor.
Result<QueryResult> RunWithScanApi(const ObjectStore& store, std::string_view location,
                                   const SelectStatement& statement);

struct MatrixCell {
  std::string engine;
  std::string query;
  bool pass = false;
  std::string detail;
  int64_t rows = 0;
};

struct ConsistencyMatrix {
  std::string reference;
  std::vector<MatrixCell> cells;

  bool all_pass() const;
  const MatrixCell* Find(std::string_view engine, std::string_view query) const;
  nlohmann::json ToJson() const;
  std::string ToText() const;
};

/// The first engine is the reference; a cell passes iff its canonical result
/// equals the reference's. Engine errors become failing cells.
ConsistencyMatrix RunConsistencyMatrix(const ObjectStore& store, std::string_view location,
                                       const std::vector<BenchQuery>& queries,
                                       const std::vector<QueryEngine*>& engines);

/// Nearest-rank percentile of unsorted samples; 0 for no samples.
double Percentile(std::vector<double> samples, double percent);

struct BenchOptions {
  int runs = 30;
  /// Run every measurement in a fresh process.
  bool cold = true;
  /// `edsp` binary used to spawn cold runs of in-process engines.
  std::filesystem::path cli_path;
  /// Store root passed to child processes.
  std::filesystem::path store_root;
};

struct BenchCell {
  std::string engine;
  std::string query;
  std::vector<double> timings_ms;
  double p50_ms = 0;
  double p95_ms = 0;
  ScanCounters counters;
  /// Every run's rows matched the reference result.
  bool verified = false;
  std::optional<std::string> error;
};

struct BenchReport {
  std::string location;
  std::string fingerprint;
  std::string environment;
  int runs = 0;
  bool cold = true;
  std::vector<std::string> engines;
  std::vector<std::string> queries;
  std::vector<BenchCell> cells;
  double total_wall_ms = 0;

  const BenchCell* Find(std::string_view engine, std::string_view query) const;
  nlohmann::json ToJson() const;
  /// Queries as rows, p50/p95 per engine as columns.
  std::string ToText() const;
};

/// Times every (engine, query) pair. Each run's result is checked against an
/// in-process SQL reference first; a wrong answer marks the cell failed and
/// its timings are not reported. Engine failures are recorded per cell.
Result<BenchReport> RunBench(const ObjectStore& store, std::string_view location,
                             const std::vector<std::string>& engine_ids,
                             const std::vector<BenchQuery>& queries,
                             const BenchOptions& options,
                             const EngineConfig& config = {});

/// One measured execution as reported by a cold child process:
/// {"engine": id, "result": QueryResult JSON with counters}.
Result<nlohmann::json> RunOnce(const ObjectStore& store, std::string_view location,
                               std::string_view engine_id, std::string_view sql);

/// Runs a shell command and returns its standard output; fails on non-zero exit.
Result<std::string> RunCommand(const std::string& command);
std::string ShellQuote(std::string_view text);

struct WriteOnceScript {
  std::string dataset;
  std::string location;
  std::filesystem::path ingest_csv;
  std::vector<std::filesystem::path> append_csvs;
  int64_t rows_per_file = 100000;
  /// Executed round-robin over engines and the workload queries.
  int queries = 90;
  std::string table_name = "poi";
};

struct WriteOnceReport {
  /// Pointer metadata version after creation and after each commit.
  std::vector<int64_t> pointer_versions;
  /// Snapshot sequence number produced by each commit.
  std::vector<int64_t> snapshot_sequences;
  int queries_run = 0;
  int query_failures = 0;
  ReplicaReport census;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  nlohmann::json ToJson() const;
};

Result<WriteOnceReport> VerifyWriteOnce(ObjectStore& store, const WriteOnceScript& script,
                                        const std::vector<QueryEngine*>& engines);

}  // namespace edsp
