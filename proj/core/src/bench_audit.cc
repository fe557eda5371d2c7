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

#include "edsp/bench_audit.h"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edsp/catalog.h"
#include "edsp/prep.h"
#include "edsp/scan_api.h"
#include "edsp/util.h"

namespace edsp {

namespace {

bool RowLess(const Row& lhs, const Row& rhs) {
  for (size_t i = 0; i < lhs.size() && i < rhs.size(); ++i) {
    auto c = TotalOrder(lhs[i], rhs[i]);
    if (c != 0) return c < 0;
  }
  return lhs.size() < rhs.size();
}

bool ValuesMatch(const Value& expected, const Value& actual, double tolerance) {
  if (expected.is_null() || actual.is_null()) return expected.is_null() && actual.is_null();
  if (expected.type() != actual.type()) return false;
  if (expected.type() != DataType::kFloat64) return expected == actual;
  double a = expected.as_float64();
  double b = actual.as_float64();
  if (a == b) return true;
  return std::fabs(a - b) <= tolerance * std::max(std::fabs(a), std::fabs(b));
}

double ElapsedMs(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

Result<SelectStatement> ParseSelect(std::string_view sql) {
  EDSP_ASSIGN_OR_RETURN(auto statement, ParseStatement(sql));
  if (!std::holds_alternative<SelectStatement>(statement)) {
    return InvalidArgument("expected a SELECT statement");
  }
  return std::get<SelectStatement>(std::move(statement));
}

Result<std::string> LocalTableRoot(const ObjectStore& store, std::string_view location) {
  auto root = store.LocalRoot();
  if (!root.has_value()) {
    return PreconditionFailed("engine needs a store backed by a local directory");
  }
  return (std::filesystem::absolute(*root) / location).lexically_normal().string();
}

class SqlQueryEngine final : public QueryEngine {
 public:
  std::string id() const override { return "sql"; }
  Result<QueryResult> Run(const ObjectStore& store, std::string_view location,
                          const BenchQuery& query) override {
    EDSP_ASSIGN_OR_RETURN(auto select, ParseSelect(query.sql));
    return ExecuteSelect(store, location, select);
  }
};

class ScanQueryEngine final : public QueryEngine {
 public:
  std::string id() const override { return "scan"; }
  Result<QueryResult> Run(const ObjectStore& store, std::string_view location,
                          const BenchQuery& query) override {
    EDSP_ASSIGN_OR_RETURN(auto select, ParseSelect(query.sql));
    return RunWithScanApi(store, location, select);
  }
};

class CommandQueryEngine final : public QueryEngine {
 public:
  explicit CommandQueryEngine(std::string command) : command_(std::move(command)) {}

  std::string id() const override { return "reader"; }
  bool in_process() const override { return false; }

  Result<QueryResult> Run(const ObjectStore& store, std::string_view location,
                          const BenchQuery& query) override {
    if (query.pattern.empty()) {
      return InvalidArgument("query {} has no pattern for the reader engine", query.name);
    }
    EDSP_ASSIGN_OR_RETURN(auto table_root, LocalTableRoot(store, location));
    std::string params;
    for (const auto& [key, value] : query.params) {
      if (!params.empty()) params.push_back(' ');
      params += "--param " + ShellQuote(key + "=" + value);
    }
    std::string command = ExpandTemplate(command_, {{"table_root", ShellQuote(table_root)},
                                                    {"pattern", query.pattern},
                                                    {"params", params}});
    EDSP_ASSIGN_OR_RETURN(auto output, RunCommand(command));
    try {
      return QueryResult::FromJson(nlohmann::json::parse(output));
    } catch (const nlohmann::json::exception& e) {
      return InvalidArgument("reader output is not JSON: {}", e.what());
    }
  }

 private:
  std::string command_;
};

}  // namespace

QueryResult Canonicalize(QueryResult result) {
  std::stable_sort(result.rows.begin(), result.rows.end(), RowLess);
  return result;
}

Comparison CompareResults(const QueryResult& expected, const QueryResult& actual,
                          double relative_tolerance) {
  Comparison out;
  auto fail = [&](std::string detail) {
    out.equal = false;
    out.detail = std::move(detail);
    return out;
  };
  if (expected.columns != actual.columns) {
    return fail(fmt::format("columns differ: [{}] vs [{}]",
                            fmt::join(expected.columns, ", "),
                            fmt::join(actual.columns, ", ")));
  }
  if (expected.types != actual.types) return fail("column types differ");
  if (expected.rows.size() != actual.rows.size()) {
    return fail(fmt::format("row count {} vs {}", expected.rows.size(), actual.rows.size()));
  }
  QueryResult lhs = Canonicalize(expected);
  QueryResult rhs = Canonicalize(actual);
  for (size_t r = 0; r < lhs.rows.size(); ++r) {
    if (lhs.rows[r].size() != rhs.rows[r].size()) {
      return fail(fmt::format("row {} has the wrong arity", r));
    }
    for (size_t c = 0; c < lhs.rows[r].size(); ++c) {
      if (!ValuesMatch(lhs.rows[r][c], rhs.rows[r][c], relative_tolerance)) {
        return fail(fmt::format("row {} column '{}': {} vs {}", r, lhs.columns[c],
                                lhs.rows[r][c].ToString(), rhs.rows[r][c].ToString()));
      }
    }
  }
  return out;
}

std::vector<BenchQuery> PoiWorkload(std::string_view table, std::optional<int64_t> limit,
                                    std::string_view prefecture) {
  std::string suffix = limit.has_value() ? fmt::format(" LIMIT {}", *limit) : "";
  std::map<std::string, std::string> limit_param;
  if (limit.has_value()) limit_param["limit"] = std::to_string(*limit);
  std::string quoted = Predicate::Compare("prefecture", CompareOp::kEq,
                                          Value::String(std::string(prefecture)))
                           ->ToString();

  std::vector<BenchQuery> queries;
  queries.push_back({"Q1", fmt::format("SELECT * FROM {}{}", table, suffix), "q1",
                     limit_param});
  auto q2_params = limit_param;
  q2_params["prefecture"] = std::string(prefecture);
  queries.push_back({"Q2", fmt::format("SELECT * FROM {} WHERE {}{}", table, quoted, suffix),
                     "q2", q2_params});
  queries.push_back(
      {"Q3",
       fmt::format("SELECT category, COUNT(*), AVG(rating) FROM {} GROUP BY category{}",
                   table, suffix),
       "q3", limit_param});
  return queries;
}

Result<std::unique_ptr<QueryEngine>> MakeEngine(std::string_view id,
                                                const EngineConfig& config) {
  if (id == "sql") return std::unique_ptr<QueryEngine>(new SqlQueryEngine());
  if (id == "scan") return std::unique_ptr<QueryEngine>(new ScanQueryEngine());
  if (id == "reader") {
    return std::unique_ptr<QueryEngine>(new CommandQueryEngine(config.reader_command));
  }
  return MakeError(ErrorKind::kUnknownEngine, "unknown engine '{}'", id);
}

Result<QueryResult> RunWithScanApi(const ObjectStore& store, std::string_view location,
                                   const SelectStatement& statement) {
  bool aggregate = !statement.group_by.empty();
  for (const auto& item : statement.items) {
    if (item.kind == SelectItem::Kind::kAggregate) aggregate = true;
  }

  if (!aggregate) {
    ScanOptions options;
    options.predicate = statement.where;
    options.limit = statement.limit;
    for (const auto& item : statement.items) {
      if (item.kind == SelectItem::Kind::kColumn) options.columns.push_back(item.column);
    }
    EDSP_ASSIGN_OR_RETURN(auto stream, Scan(store, location, std::move(options)));
    QueryResult result;
    result.columns = stream.columns();
    result.types = stream.types();
    EDSP_ASSIGN_OR_RETURN(result.rows, stream.Collect());
    result.counters = stream.counters();
    return result;
  }

  AggregateOptions options;
  options.group_by = statement.group_by;
  options.predicate = statement.where;
  // Output position of each select item within the aggregate result.
  std::vector<size_t> positions;
  for (const auto& item : statement.items) {
    if (item.kind == SelectItem::Kind::kStar) {
      return InvalidArgument("SELECT * cannot be combined with aggregation");
    }
    if (item.kind == SelectItem::Kind::kColumn) {
      auto it = std::find(options.group_by.begin(), options.group_by.end(), item.column);
      if (it == options.group_by.end()) {
        return InvalidArgument("column '{}' must appear in GROUP BY", item.column);
      }
      positions.push_back(static_cast<size_t>(it - options.group_by.begin()));
    } else {
      positions.push_back(options.group_by.size() + options.aggregates.size());
      options.aggregates.push_back({item.fn, item.column});
    }
  }
  EDSP_ASSIGN_OR_RETURN(auto grouped, Aggregate(store, location, options));
  QueryResult result;
  result.counters = grouped.counters;
  for (size_t p : positions) {
    result.columns.push_back(grouped.columns[p]);
    result.types.push_back(grouped.types[p]);
  }
  for (auto& row : grouped.rows) {
    if (statement.limit.has_value() &&
        static_cast<int64_t>(result.rows.size()) >= *statement.limit) {
      break;
    }
    Row out;
    for (size_t p : positions) out.push_back(row[p]);
    result.rows.push_back(std::move(out));
  }
  return result;
}

bool ConsistencyMatrix::all_pass() const {
  return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.pass; });
}

const MatrixCell* ConsistencyMatrix::Find(std::string_view engine,
                                          std::string_view query) const {
  for (const auto& cell : cells) {
    if (cell.engine == engine && cell.query == query) return &cell;
  }
  return nullptr;
}

nlohmann::json ConsistencyMatrix::ToJson() const {
  nlohmann::json json;
  json["reference"] = reference;
  json["all_pass"] = all_pass();
  auto& out = json["cells"] = nlohmann::json::array();
  for (const auto& cell : cells) {
    out.push_back({{"engine", cell.engine},
                   {"query", cell.query},
                   {"pass", cell.pass},
                   {"rows", cell.rows},
                   {"detail", cell.detail}});
  }
  return json;
}

std::string ConsistencyMatrix::ToText() const {
  std::vector<std::string> engines;
  std::vector<std::string> queries;
  for (const auto& cell : cells) {
    if (std::find(engines.begin(), engines.end(), cell.engine) == engines.end()) {
      engines.push_back(cell.engine);
    }
    if (std::find(queries.begin(), queries.end(), cell.query) == queries.end()) {
      queries.push_back(cell.query);
    }
  }
  std::string out = fmt::format("{:<8}", "query");
  for (const auto& engine : engines) out += fmt::format("{:>10}", engine);
  out += "\n";
  for (const auto& query : queries) {
    out += fmt::format("{:<8}", query);
    for (const auto& engine : engines) {
      const MatrixCell* cell = Find(engine, query);
      out += fmt::format("{:>10}", cell == nullptr ? "-" : cell->pass ? "pass" : "FAIL");
    }
    out += "\n";
  }
  for (const auto& cell : cells) {
    if (!cell.pass) out += fmt::format("{} {}: {}\n", cell.engine, cell.query, cell.detail);
  }
  return out;
}

ConsistencyMatrix RunConsistencyMatrix(const ObjectStore& store, std::string_view location,
                                       const std::vector<BenchQuery>& queries,
                                       const std::vector<QueryEngine*>& engines) {
  ConsistencyMatrix matrix;
  if (engines.empty()) return matrix;
  matrix.reference = engines.front()->id();
  for (const auto& query : queries) {
    std::optional<QueryResult> reference;
    for (QueryEngine* engine : engines) {
      MatrixCell cell;
      cell.engine = engine->id();
      cell.query = query.name;
      auto result = engine->Run(store, location, query);
      if (!result.has_value()) {
        cell.detail = result.error().ToString();
      } else {
        cell.rows = static_cast<int64_t>(result->rows.size());
        if (!reference.has_value()) {
          if (engine == engines.front()) {
            reference = std::move(result).value();
            cell.pass = true;
          } else {
            cell.detail = "reference engine failed";
          }
        } else {
          Comparison cmp = CompareResults(*reference, *result);
          cell.pass = cmp.equal;
          cell.detail = cmp.detail;
        }
      }
      matrix.cells.push_back(std::move(cell));
    }
  }
  return matrix;
}

double Percentile(std::vector<double> samples, double percent) {
  if (samples.empty()) return 0;
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<size_t>(
      std::ceil(percent / 100.0 * static_cast<double>(samples.size())));
  rank = std::clamp<size_t>(rank, 1, samples.size());
  return samples[rank - 1];
}

const BenchCell* BenchReport::Find(std::string_view engine, std::string_view query) const {
  for (const auto& cell : cells) {
    if (cell.engine == engine && cell.query == query) return &cell;
  }
  return nullptr;
}

nlohmann::json BenchReport::ToJson() const {
  nlohmann::json json;
  json["location"] = location;
  json["fingerprint"] = fingerprint;
  json["environment"] = environment;
  json["runs"] = runs;
  json["cold"] = cold;
  json["engines"] = engines;
  json["queries"] = queries;
  json["total_wall_ms"] = total_wall_ms;
  auto& out = json["cells"] = nlohmann::json::array();
  for (const auto& cell : cells) {
    nlohmann::json c = {
        {"engine", cell.engine},
        {"query", cell.query},
        {"runs", cell.timings_ms.size()},
        {"p50_ms", cell.p50_ms},
        {"p95_ms", cell.p95_ms},
        {"timings_ms", cell.timings_ms},
        {"counters", cell.counters.ToJson()},
        {"verified", cell.verified},
    };
    c["error"] = cell.error.has_value() ? nlohmann::json(*cell.error) : nlohmann::json();
    out.push_back(std::move(c));
  }
  return json;
}

std::string BenchReport::ToText() const {
  std::string out = fmt::format("table {} ({})\n{}\n\n", location, fingerprint, environment);
  out += fmt::format("{:<8}", "Query");
  for (const auto& engine : engines) {
    out += fmt::format("{:>16}{:>16}", engine + " p50 (ms)", engine + " p95 (ms)");
  }
  out += "\n";
  for (const auto& query : queries) {
    out += fmt::format("{:<8}", query);
    for (const auto& engine : engines) {
      const BenchCell* cell = Find(engine, query);
      if (cell == nullptr || cell->error.has_value()) {
        out += fmt::format("{:>16}{:>16}", "error", "error");
      } else {
        out += fmt::format("{:>16.2f}{:>16.2f}", cell->p50_ms, cell->p95_ms);
      }
    }
    out += "\n";
  }
  out += "\n";
  for (const auto& cell : cells) {
    if (cell.error.has_value()) {
      out += fmt::format("{} {}: {}\n", cell.engine, cell.query, *cell.error);
    } else {
      out += fmt::format(
          "{} {}: files {}/{} pruned, {} bytes read, {} rows scanned\n", cell.engine,
          cell.query, cell.counters.files_pruned, cell.counters.files_considered,
          cell.counters.data_bytes_read, cell.counters.rows_scanned);
    }
  }
  return out;
}

std::string ShellQuote(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

Result<std::string> RunCommand(const std::string& command) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return IoFailure("cannot run '{}'", command);
  std::string output;
  char buffer[65536];
  size_t n = 0;
  while ((n = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) output.append(buffer, n);
  int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    int code = status != -1 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return IoFailure("command exited with status {}: {}", code, command);
  }
  return output;
}

Result<nlohmann::json> RunOnce(const ObjectStore& store, std::string_view location,
                               std::string_view engine_id, std::string_view sql) {
  EDSP_ASSIGN_OR_RETURN(auto select, ParseSelect(sql));
  QueryResult result;
  if (engine_id == "sql") {
    EDSP_ASSIGN_OR_RETURN(result, ExecuteSelect(store, location, select));
  } else if (engine_id == "scan") {
    EDSP_ASSIGN_OR_RETURN(result, RunWithScanApi(store, location, select));
  } else {
    return MakeError(ErrorKind::kUnknownEngine, "engine '{}' cannot run in-process",
                     engine_id);
  }
  return nlohmann::json{{"engine", std::string(engine_id)}, {"result", result.ToJson(true)}};
}

Result<BenchReport> RunBench(const ObjectStore& store, std::string_view location,
                             const std::vector<std::string>& engine_ids,
                             const std::vector<BenchQuery>& queries,
                             const BenchOptions& options, const EngineConfig& config) {
  auto started = std::chrono::steady_clock::now();
  if (options.runs < 1) return InvalidArgument("runs must be at least 1");
  EDSP_ASSIGN_OR_RETURN(auto table, LoadTable(store, location));

  BenchReport report;
  report.location = std::string(location);
  report.fingerprint = fmt::format(
      "{}@{}", table.metadata.table_uuid,
      table.snapshot.has_value() ? std::to_string(table.snapshot->snapshot_id) : "empty");
  report.runs = options.runs;
  report.cold = options.cold;
  report.engines = engine_ids;
  report.environment =
      options.cold
          ? "local object store; every run in a fresh process with no shared caches; "
            "times are end-to-end engine wall time"
          : "local object store; runs share one process; times are end-to-end engine "
            "wall time";
  for (const auto& query : queries) report.queries.push_back(query.name);

  std::map<std::string, QueryResult> references;
  for (const auto& query : queries) {
    EDSP_ASSIGN_OR_RETURN(auto select, ParseSelect(query.sql));
    EDSP_ASSIGN_OR_RETURN(auto reference, ExecuteSelect(store, location, select));
    references[query.name] = std::move(reference);
  }

  std::filesystem::path root_path = options.store_root;
  if (root_path.empty() && store.LocalRoot()) root_path = *store.LocalRoot();
  std::string store_root =
      root_path.empty() ? std::string() : std::filesystem::absolute(root_path).string();
  for (const auto& id : engine_ids) {
    auto engine = MakeEngine(id, config);
    for (const auto& query : queries) {
      BenchCell cell;
      cell.engine = id;
      cell.query = query.name;
      if (!engine.has_value()) {
        cell.error = engine.error().ToString();
        report.cells.push_back(std::move(cell));
        continue;
      }
      QueryEngine& runner = **engine;
      bool spawn = options.cold && runner.in_process();
      if (spawn && (options.cli_path.empty() || store_root.empty())) {
        cell.error = "cold runs need the edsp binary and a local store root";
        report.cells.push_back(std::move(cell));
        continue;
      }
      for (int run = 0; run < options.runs; ++run) {
        Result<QueryResult> result = Internal("not run");
        if (spawn) {
          std::string command = fmt::format(
              "{} bench once --store {} --table-root {} --engine {} --sql {}",
              ShellQuote(options.cli_path.string()), ShellQuote(store_root),
              ShellQuote(location), ShellQuote(id), ShellQuote(query.sql));
          auto output = RunCommand(command);
          if (!output.has_value()) {
            result = output.error();
          } else {
            try {
              result = QueryResult::FromJson(nlohmann::json::parse(*output).at("result"));
            } catch (const nlohmann::json::exception& e) {
              result = InvalidArgument("malformed child output: {}", e.what());
            }
          }
        } else {
          result = runner.Run(store, location, query);
        }
        if (!result.has_value()) {
          cell.error = fmt::format("run {}: {}", run + 1, result.error().ToString());
          break;
        }
        Comparison cmp = CompareResults(references[query.name], *result);
        if (!cmp.equal) {
          cell.error = fmt::format("run {} returned a wrong answer: {}", run + 1, cmp.detail);
          break;
        }
        cell.timings_ms.push_back(result->counters.wall_time_ms);
        cell.counters = result->counters;
      }
      if (cell.error.has_value()) {
        cell.timings_ms.clear();
      } else {
        cell.verified = true;
        cell.p50_ms = Percentile(cell.timings_ms, 50);
        cell.p95_ms = Percentile(cell.timings_ms, 95);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.total_wall_ms = ElapsedMs(started);
  return report;
}

nlohmann::json WriteOnceReport::ToJson() const {
  return {
      {"pointer_versions", pointer_versions},
      {"snapshot_sequences", snapshot_sequences},
      {"queries_run", queries_run},
      {"query_failures", query_failures},
      {"census", census.ToJson()},
      {"violations", violations},
      {"ok", ok()},
  };
}

Result<WriteOnceReport> VerifyWriteOnce(ObjectStore& store, const WriteOnceScript& script,
                                        const std::vector<QueryEngine*>& engines) {
  if (engines.empty()) return InvalidArgument("the audit needs at least one engine");
  WriteOnceReport report;
  const std::vector<DatasetRef> datasets{{script.dataset, script.location}};
  const std::vector<ScratchArea> scratch = DefaultScratchAreas();
  const std::vector<BenchQuery> workload = PoiWorkload(script.table_name);

  EDSP_ASSIGN_OR_RETURN(auto schema, InferSchema(script.ingest_csv));
  EDSP_RETURN_IF_ERROR(CreateTable(store, script.location, schema));
  EDSP_ASSIGN_OR_RETURN(auto pointer, ReadPointer(store, script.location));
  report.pointer_versions.push_back(pointer.sequence);

  std::vector<std::filesystem::path> batches{script.ingest_csv};
  batches.insert(batches.end(), script.append_csvs.begin(), script.append_csvs.end());
  const size_t phases = batches.size();
  int issued = 0;
  for (size_t phase = 0; phase < phases; ++phase) {
    IngestSpec spec;
    spec.source_csv = batches[phase];
    spec.target_location = script.location;
    spec.mode = IngestMode::kAppend;
    spec.rows_per_file = script.rows_per_file;
    EDSP_ASSIGN_OR_RETURN(auto ingested, Ingest(store, spec));
    if (ingested.snapshot.has_value()) {
      report.snapshot_sequences.push_back(ingested.snapshot->sequence);
    }
    EDSP_ASSIGN_OR_RETURN(pointer, ReadPointer(store, script.location));
    report.pointer_versions.push_back(pointer.sequence);

    EDSP_ASSIGN_OR_RETURN(auto before, AuditReplicas(store, datasets, scratch));
    // Spread the query budget evenly over the phases.
    int budget = static_cast<int>((static_cast<size_t>(script.queries) * (phase + 1)) / phases) -
                 issued;
    std::map<std::string, QueryResult> reference;
    for (int q = 0; q < budget; ++q, ++issued) {
      QueryEngine* engine = engines[static_cast<size_t>(issued) % engines.size()];
      const BenchQuery& query =
          workload[(static_cast<size_t>(issued) / engines.size()) % workload.size()];
      ++report.queries_run;
      auto result = engine->Run(store, script.location, query);
      if (!result.has_value()) {
        ++report.query_failures;
        report.violations.push_back(fmt::format("{} {} failed: {}", engine->id(),
                                                query.name, result.error().ToString()));
        continue;
      }
      auto [it, inserted] = reference.try_emplace(query.name, *result);
      if (!inserted) {
        Comparison cmp = CompareResults(it->second, *result);
        if (!cmp.equal) {
          ++report.query_failures;
          report.violations.push_back(fmt::format("{} {} disagrees: {}", engine->id(),
                                                  query.name, cmp.detail));
        }
      }
    }
    EDSP_ASSIGN_OR_RETURN(auto after, AuditReplicas(store, datasets, scratch));
    for (auto& violation : CompareReports(before, after)) {
      report.violations.push_back(fmt::format("queries after commit {}: {}", phase + 1,
                                              violation));
    }
  }

  for (size_t i = 0; i < report.snapshot_sequences.size(); ++i) {
    if (report.snapshot_sequences[i] != static_cast<int64_t>(i + 1)) {
      report.violations.push_back(fmt::format("commit {} produced snapshot sequence {}",
                                              i + 1, report.snapshot_sequences[i]));
    }
  }
  for (size_t i = 1; i < report.pointer_versions.size(); ++i) {
    if (report.pointer_versions[i] <= report.pointer_versions[i - 1]) {
      report.violations.push_back(fmt::format("pointer went from version {} to {}",
                                              report.pointer_versions[i - 1],
                                              report.pointer_versions[i]));
    }
  }
  EDSP_ASSIGN_OR_RETURN(report.census, AuditReplicas(store, datasets, scratch));
  for (const auto& violation : report.census.violations) {
    report.violations.push_back(violation);
  }
  return report;
}

}  // namespace edsp
