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

// edsp: command line entry point for stores, tables, queries, the catalog and
// the benchmark harness.

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edsp/audit.h"
#include "edsp/bench_audit.h"
#include "edsp/catalog.h"
#include "edsp/object_store.h"
#include "edsp/prep.h"
#include "edsp/scan_api.h"
#include "edsp/sql_engine.h"
#include "edsp/table_format.h"

namespace {

using namespace edsp;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

struct GlobalOptions {
  std::string store;
  std::string format = "csv";
  int verbosity = 0;
};

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInternal:
    case ErrorKind::kIoFailure:
      return kExitInternal;
    default:
      return kExitUser;
  }
}

int Fail(const Error& error) {
  fmt::print(stderr, "edsp: {}\n", error.ToString());
  return ExitCodeFor(error.kind);
}

void PrintCounters(const ScanCounters& counters) {
  fmt::print(stderr, "counters: {}\n", counters.ToJson().dump());
}

Result<std::filesystem::path> StoreRoot(const GlobalOptions& global) {
  auto root = ResolveStoreRoot(global.store);
  if (!root.has_value()) {
    return InvalidArgument("no store given; pass --store or set EDSP_STORE");
  }
  return *root;
}

Result<std::unique_ptr<LocalObjectStore>> OpenStore(const GlobalOptions& global) {
  EDSP_ASSIGN_OR_RETURN(auto root, StoreRoot(global));
  return LocalObjectStore::Open(root);
}

AsOf MakeAsOf(const std::optional<int64_t>& snapshot, const std::optional<int64_t>& ts) {
  AsOf at;
  if (snapshot.has_value()) {
    at.emplace<SnapshotId>(SnapshotId{*snapshot});
  } else if (ts.has_value()) {
    at.emplace<TimestampMs>(TimestampMs{*ts});
  }
  return at;
}

std::vector<std::string> SplitStatements(std::string_view text) {
  std::vector<std::string> statements;
  std::string current;
  bool quoted = false;
  for (char c : text) {
    if (c == '\'') quoted = !quoted;
    if (c == ';' && !quoted) {
      statements.push_back(current);
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  statements.push_back(current);
  std::vector<std::string> out;
  for (auto& s : statements) {
    if (s.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(std::move(s));
  }
  return out;
}

void PrintResult(const QueryResult& result, std::string_view format) {
  if (format == "json") {
    std::cout << result.ToJson().dump() << "\n";
  } else {
    std::cout << result.ToCsv();
  }
}

// Resolves every FROM name to one table location.
class SingleTableResolver final : public TableResolver {
 public:
  explicit SingleTableResolver(std::string location) : location_(std::move(location)) {}
  Result<std::string> Resolve(std::string_view) const override { return location_; }

 private:
  std::string location_;
};

Result<std::string> ResolveTarget(const ObjectStore& store, const std::string& table_root,
                                  const std::string& table_name) {
  if (!table_root.empty()) return table_root;
  if (table_name.empty()) return InvalidArgument("pass --table-root or --table");
  Catalog catalog(const_cast<ObjectStore&>(store));
  EDSP_ASSIGN_OR_RETURN(auto entry, catalog.Get(table_name));
  return entry.location;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::filesystem::path SelfPath(const char* argv0) {
  std::error_code ec;
  auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) return self;
  return std::filesystem::absolute(argv0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edsp: write-once tables on a shared object store"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--store", global.store, "Store root directory (default: $EDSP_STORE)");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("-v,--verbose", global.verbosity, "More diagnostics");

  std::function<int()> action;
  auto bind = [&](CLI::App* sub, std::function<int()> fn) {
    sub->callback([&action, fn] { action = fn; });
  };

  // init
  auto* init = app.add_subcommand("init", "Create a store root directory");
  bind(init, [&] {
    auto root = StoreRoot(global);
    if (!root.has_value()) return Fail(root.error());
    auto store = LocalObjectStore::Create(*root);
    if (!store.has_value()) return Fail(store.error());
    fmt::print(stderr, "initialized store at {}\n", root->string());
    return kExitOk;
  });

  // gen-poi
  auto* gen = app.add_subcommand("gen-poi", "Write the synthetic POI dataset as CSV");
  PoiGenSpec poi;
  std::string gen_out;
  bool no_cluster = false;
  gen->add_option("--out", gen_out, "Output CSV path")->required();
  gen->add_option("--rows", poi.rows, "Row count");
  gen->add_option("--seed", poi.seed, "Random seed");
  gen->add_option("--share", poi.target_share, "Share of rows in the target prefecture");
  gen->add_option("--prefecture", poi.target_prefecture, "Target prefecture code");
  gen->add_flag("--no-cluster", no_cluster, "Do not order rows by prefecture");
  bind(gen, [&] {
    poi.cluster_by_prefecture = !no_cluster;
    auto status = WritePoiCsv(poi, gen_out);
    if (!status.has_value()) return Fail(status.error());
    return kExitOk;
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a CSV file into a table");
  IngestSpec ingest_spec;
  std::string ingest_csv;
  std::string ingest_mode = "create";
  std::string ingest_schema;
  ingest->add_option("--table-root", ingest_spec.target_location, "Table location")
      ->required();
  ingest->add_option("--csv", ingest_csv, "Source CSV file")->required();
  ingest->add_option("--mode", ingest_mode, "create, append or overwrite")
      ->check(CLI::IsMember({"create", "append", "overwrite"}));
  ingest->add_option("--rows-per-file", ingest_spec.rows_per_file, "Rows per data file");
  ingest->add_option("--schema", ingest_schema, "Schema JSON file (default: inferred)");
  bind(ingest, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    ingest_spec.source_csv = ingest_csv;
    ingest_spec.mode = IngestModeFromString(ingest_mode).value();
    if (!ingest_schema.empty()) {
      std::ifstream in(ingest_schema);
      if (!in) return Fail(NotFound("cannot open {}", ingest_schema));
      nlohmann::json json;
      try {
        in >> json;
      } catch (const nlohmann::json::exception& e) {
        return Fail(InvalidArgument("malformed schema file: {}", e.what()));
      }
      auto schema = Schema::FromJson(json);
      if (!schema.has_value()) return Fail(schema.error());
      ingest_spec.schema = *schema;
    }
    auto result = Ingest(**store, ingest_spec);
    if (!result.has_value()) return Fail(result.error());
    if (global.verbosity > 0 && result->snapshot.has_value()) {
      fmt::print(stderr, "commit took {} attempt(s), metadata version {}\n",
                 result->commit.attempts, result->commit.metadata_version);
    }
    nlohmann::json out = {{"rows", result->rows}, {"files", result->files}};
    if (result->snapshot.has_value()) {
      out["snapshot"] = result->snapshot->ToJson();
      out["commit_attempts"] = result->commit.attempts;
      out["metadata_version"] = result->commit.metadata_version;
    }
    if (global.format == "json") {
      std::cout << out.dump() << "\n";
    } else {
      fmt::print("ingested {} rows into {} files", result->rows, result->files);
      if (result->snapshot.has_value()) {
        fmt::print(" (snapshot {}, sequence {})", result->snapshot->snapshot_id,
                   result->snapshot->sequence);
      }
      fmt::print("\n");
    }
    return kExitOk;
  });

  // alter
  auto* alter = app.add_subcommand("alter", "Add a nullable column to a table");
  std::string alter_root;
  std::string alter_column;
  std::string alter_type;
  alter->add_option("--table-root", alter_root, "Table location")->required();
  alter->add_option("--add-column", alter_column, "New column name")->required();
  alter->add_option("--type", alter_type, "INT64, FLOAT64, BOOL or STRING")->required();
  bind(alter, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto type = DataTypeFromString(alter_type);
    if (!type.has_value()) return Fail(type.error());
    auto schema = EvolveSchema(**store, alter_root, alter_column, *type);
    if (!schema.has_value()) return Fail(schema.error());
    std::cout << schema->ToJson().dump() << "\n";
    return kExitOk;
  });

  // query
  auto* query = app.add_subcommand("query", "Run SQL against a table");
  std::string query_root;
  std::string query_sql;
  std::optional<int64_t> as_of;
  std::optional<int64_t> as_of_ts;
  bool no_prune = false;
  query->add_option("--table-root", query_root, "Table location for every FROM name");
  query->add_option("--sql", query_sql, "Statements separated by ';'")->required();
  query->add_option("--as-of", as_of, "Snapshot id to read");
  query->add_option("--as-of-ts", as_of_ts, "Read the snapshot current at this epoch ms");
  query->add_flag("--no-prune", no_prune, "Disable file pruning");
  bind(query, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    Catalog catalog(**store);
    CatalogResolver catalog_resolver(catalog);
    SingleTableResolver single(query_root);
    const TableResolver* resolver =
        query_root.empty() ? static_cast<const TableResolver*>(&catalog_resolver) : &single;
    SqlSession session(**store, resolver);
    ExecOptions options;
    options.prune = !no_prune;
    options.as_of = MakeAsOf(as_of, as_of_ts);
    std::optional<QueryResult> last;
    for (const auto& statement : SplitStatements(query_sql)) {
      auto result = session.Execute(statement, options);
      if (!result.has_value()) return Fail(result.error());
      if (!result->columns.empty()) last = std::move(result).value();
    }
    if (last.has_value()) {
      PrintResult(*last, global.format);
      PrintCounters(last->counters);
    }
    return kExitOk;
  });

  // scan
  auto* scan = app.add_subcommand("scan", "Read rows through the scan API");
  std::string scan_root;
  std::string scan_table;
  std::string scan_columns;
  std::string scan_where;
  std::optional<int64_t> scan_limit;
  scan->add_option("--table-root", scan_root, "Table location");
  scan->add_option("--table", scan_table, "Catalog name of the table");
  scan->add_option("--columns", scan_columns, "Comma separated columns (default: all)");
  scan->add_option("--where", scan_where, "Filter predicate");
  scan->add_option("--limit", scan_limit, "Maximum rows");
  scan->add_option("--as-of", as_of, "Snapshot id to read");
  scan->add_option("--as-of-ts", as_of_ts, "Read the snapshot current at this epoch ms");
  scan->add_flag("--no-prune", no_prune, "Disable file pruning");
  bind(scan, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto location = ResolveTarget(**store, scan_root, scan_table);
    if (!location.has_value()) return Fail(location.error());
    ScanOptions options;
    options.at = MakeAsOf(as_of, as_of_ts);
    options.columns = SplitList(scan_columns);
    options.limit = scan_limit;
    options.prune = !no_prune;
    if (!scan_where.empty()) {
      auto predicate = ParsePredicate(scan_where);
      if (!predicate.has_value()) return Fail(predicate.error());
      options.predicate = *predicate;
    }
    auto stream = Scan(**store, *location, std::move(options));
    if (!stream.has_value()) return Fail(stream.error());
    QueryResult result;
    result.columns = stream->columns();
    result.types = stream->types();
    auto rows = stream->Collect();
    if (!rows.has_value()) return Fail(rows.error());
    result.rows = std::move(rows).value();
    result.counters = stream->counters();
    PrintResult(result, global.format);
    PrintCounters(result.counters);
    return kExitOk;
  });

  // snapshots
  auto* snapshots = app.add_subcommand("snapshots", "List the snapshot log of a table");
  std::string snapshots_root;
  snapshots->add_option("--table-root", snapshots_root, "Table location")->required();
  bind(snapshots, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto table = LoadTable(**store, snapshots_root);
    if (!table.has_value()) return Fail(table.error());
    auto log = table->metadata.snapshots;
    std::sort(log.begin(), log.end(),
              [](const auto& a, const auto& b) { return a.sequence < b.sequence; });
    if (global.format == "json") {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& s : log) out.push_back(s.ToJson());
      std::cout << out.dump() << "\n";
    } else {
      for (const auto& s : log) {
        fmt::print("{}\t{}\t{}\t{}\t{}\t{}\n", s.sequence, s.snapshot_id, s.timestamp_ms,
                   ToString(s.operation), s.total_rows, s.total_files);
      }
    }
    return kExitOk;
  });

  // catalog
  auto* catalog_cmd = app.add_subcommand("catalog", "Dataset registry");
  catalog_cmd->require_subcommand(1);
  std::string cat_name;
  std::string cat_root;
  std::string cat_description;
  std::string cat_cadence;
  std::string cat_owner;
  std::string cat_engine;
  std::string cat_bind = "127.0.0.1:8080";
  auto* reg = catalog_cmd->add_subcommand("register", "Register a table");
  reg->add_option("--name", cat_name, "Dataset name")->required();
  reg->add_option("--table-root", cat_root, "Table location")->required();
  reg->add_option("--description", cat_description, "Free text");
  reg->add_option("--cadence", cat_cadence, "Update cadence");
  reg->add_option("--owner", cat_owner, "Owner");
  bind(reg, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    Catalog catalog(**store);
    auto entry = catalog.Register(cat_name, cat_root, cat_description, cat_cadence,
                                  cat_owner);
    if (!entry.has_value()) return Fail(entry.error());
    std::cout << entry->ToJson().dump() << "\n";
    return kExitOk;
  });
  auto* list = catalog_cmd->add_subcommand("list", "List registered datasets");
  bind(list, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto entries = Catalog(**store).List();
    if (!entries.has_value()) return Fail(entries.error());
    if (global.format == "json") {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& e : *entries) out.push_back(e.ToJson());
      std::cout << out.dump() << "\n";
    } else {
      for (const auto& e : *entries) fmt::print("{}\t{}\t{}\n", e.name, e.location, e.description);
    }
    return kExitOk;
  });
  auto* describe = catalog_cmd->add_subcommand("describe", "Show a dataset");
  describe->add_option("--name", cat_name, "Dataset name")->required();
  bind(describe, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto json = Catalog(**store).Describe(cat_name);
    if (!json.has_value()) return Fail(json.error());
    std::cout << json->dump(2) << "\n";
    return kExitOk;
  });
  auto* snippet = catalog_cmd->add_subcommand("snippet", "Print engine access text");
  snippet->add_option("--name", cat_name, "Dataset name")->required();
  snippet->add_option("--engine", cat_engine, "Engine id (sql, scan, reader)")->required();
  bind(snippet, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto text = Catalog(**store).Snippet(cat_name, cat_engine);
    if (!text.has_value()) return Fail(text.error());
    std::cout << *text << "\n";
    return kExitOk;
  });
  auto* serve = catalog_cmd->add_subcommand("serve", "Serve the catalog over HTTP");
  serve->add_option("--bind", cat_bind, "HOST:PORT");
  bind(serve, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto colon = cat_bind.rfind(':');
    if (colon == std::string::npos) return Fail(InvalidArgument("--bind needs HOST:PORT"));
    int port = 0;
    try {
      port = std::stoi(cat_bind.substr(colon + 1));
    } catch (const std::exception&) {
      return Fail(InvalidArgument("bad port in '{}'", cat_bind));
    }
    Catalog catalog(**store);
    CatalogServer server(catalog);
    fmt::print(stderr, "serving catalog on {}\n", cat_bind);
    auto status = server.Run(cat_bind.substr(0, colon), port);
    if (!status.has_value()) return Fail(status.error());
    return kExitOk;
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmarks and engine consistency checks");
  bench->require_subcommand(1);
  std::string bench_table;
  std::string bench_root;
  std::string bench_engines = "sql,scan";
  std::string bench_out;
  std::string reader_command;
  int bench_runs = 30;
  bool bench_warm = false;
  auto add_target = [&](CLI::App* sub) {
    sub->add_option("--table", bench_table, "Catalog name of the table");
    sub->add_option("--table-root", bench_root, "Table location");
    sub->add_option("--engines", bench_engines, "Comma separated engine ids");
    sub->add_option("--out", bench_out, "Also write the JSON report here");
    sub->add_option("--reader-command", reader_command, "Command template of 'reader'");
  };
  auto engine_config = [&] {
    EngineConfig config;
    if (!reader_command.empty()) config.reader_command = reader_command;
    return config;
  };
  auto write_out = [&](const nlohmann::json& json) -> Status {
    if (bench_out.empty()) return Ok();
    std::ofstream out(bench_out, std::ios::trunc);
    out << json.dump(2) << "\n";
    if (!out) return IoFailure("cannot write {}", bench_out);
    return Ok();
  };

  auto* bench_run = bench->add_subcommand("run", "Time Q1/Q2/Q3 per engine");
  add_target(bench_run);
  bench_run->add_option("--runs", bench_runs, "Runs per engine and query");
  bench_run->add_flag("--warm", bench_warm, "Reuse one process for all runs");
  bind(bench_run, [&] {
    auto root = StoreRoot(global);
    if (!root.has_value()) return Fail(root.error());
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto location = ResolveTarget(**store, bench_root, bench_table);
    if (!location.has_value()) return Fail(location.error());
    BenchOptions options;
    options.runs = bench_runs;
    options.cold = !bench_warm;
    options.cli_path = SelfPath(argv[0]);
    options.store_root = *root;
    auto report = RunBench(**store, *location, SplitList(bench_engines),
                           PoiWorkload(bench_table.empty() ? "poi" : bench_table), options,
                           engine_config());
    if (!report.has_value()) return Fail(report.error());
    auto status = write_out(report->ToJson());
    if (!status.has_value()) return Fail(status.error());
    if (global.format == "json") {
      std::cout << report->ToJson().dump(2) << "\n";
    } else {
      std::cout << report->ToText();
    }
    for (const auto& cell : report->cells) {
      if (cell.error.has_value()) return kExitInternal;
    }
    return kExitOk;
  });

  auto* bench_matrix = bench->add_subcommand("matrix", "Compare engine results");
  add_target(bench_matrix);
  bind(bench_matrix, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto location = ResolveTarget(**store, bench_root, bench_table);
    if (!location.has_value()) return Fail(location.error());
    std::vector<std::unique_ptr<QueryEngine>> owned;
    std::vector<QueryEngine*> engines;
    for (const auto& id : SplitList(bench_engines)) {
      auto engine = MakeEngine(id, engine_config());
      if (!engine.has_value()) return Fail(engine.error());
      engines.push_back(engine->get());
      owned.push_back(std::move(engine).value());
    }
    auto matrix = RunConsistencyMatrix(
        **store, *location, PoiWorkload(bench_table.empty() ? "poi" : bench_table),
        engines);
    auto status = write_out(matrix.ToJson());
    if (!status.has_value()) return Fail(status.error());
    if (global.format == "json") {
      std::cout << matrix.ToJson().dump(2) << "\n";
    } else {
      std::cout << matrix.ToText();
    }
    return matrix.all_pass() ? kExitOk : kExitInternal;
  });

  auto* bench_audit = bench->add_subcommand("audit", "Scripted write-once audit");
  WriteOnceScript script;
  std::string audit_ingest;
  std::vector<std::string> audit_appends;
  add_target(bench_audit);
  bench_audit->add_option("--dataset", script.dataset, "Dataset name")->required();
  bench_audit->add_option("--ingest-csv", audit_ingest, "Initial CSV")->required();
  bench_audit->add_option("--append-csv", audit_appends, "CSV appended per commit");
  bench_audit->add_option("--queries", script.queries, "Queries to interleave");
  bench_audit->add_option("--rows-per-file", script.rows_per_file, "Rows per data file");
  bind(bench_audit, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    if (bench_root.empty()) return Fail(InvalidArgument("pass --table-root"));
    script.location = bench_root;
    script.ingest_csv = audit_ingest;
    for (const auto& path : audit_appends) script.append_csvs.emplace_back(path);
    std::vector<std::unique_ptr<QueryEngine>> owned;
    std::vector<QueryEngine*> engines;
    for (const auto& id : SplitList(bench_engines)) {
      auto engine = MakeEngine(id, engine_config());
      if (!engine.has_value()) return Fail(engine.error());
      engines.push_back(engine->get());
      owned.push_back(std::move(engine).value());
    }
    auto report = VerifyWriteOnce(**store, script, engines);
    if (!report.has_value()) return Fail(report.error());
    auto status = write_out(report->ToJson());
    if (!status.has_value()) return Fail(status.error());
    std::cout << report->ToJson().dump(2) << "\n";
    return report->ok() ? kExitOk : kExitInternal;
  });

  auto* bench_once = bench->add_subcommand("once", "Run one query and report it as JSON");
  std::string once_engine;
  std::string once_sql;
  bench_once->add_option("--table-root", bench_root, "Table location")->required();
  bench_once->add_option("--engine", once_engine, "sql or scan")->required();
  bench_once->add_option("--sql", once_sql, "SELECT statement")->required();
  bind(bench_once, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    auto json = RunOnce(**store, bench_root, once_engine, once_sql);
    if (!json.has_value()) return Fail(json.error());
    std::cout << json->dump() << "\n";
    return kExitOk;
  });

  // audit
  auto* audit = app.add_subcommand("audit", "Census of table roots, copies and scratch");
  std::vector<std::string> audit_datasets;
  audit->add_option("--dataset", audit_datasets,
                    "NAME=LOCATION; default: every catalog entry");
  bind(audit, [&] {
    auto store = OpenStore(global);
    if (!store.has_value()) return Fail(store.error());
    std::vector<DatasetRef> datasets;
    for (const auto& spec : audit_datasets) {
      auto eq = spec.find('=');
      if (eq == std::string::npos) {
        return Fail(InvalidArgument("--dataset needs NAME=LOCATION, got '{}'", spec));
      }
      datasets.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
    }
    if (datasets.empty()) {
      auto entries = Catalog(**store).List();
      if (!entries.has_value()) return Fail(entries.error());
      for (const auto& e : *entries) datasets.push_back({e.name, e.location});
    }
    auto report = AuditReplicas(**store, datasets, DefaultScratchAreas());
    if (!report.has_value()) return Fail(report.error());
    std::cout << report->ToJson().dump(2) << "\n";
    return report->ok() ? kExitOk : kExitInternal;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUser;
  }
  if (!action) return kExitUser;
  try {
    return action();
  } catch (const std::exception& e) {
    fmt::print(stderr, "edsp: internal error: {}\n", e.what());
    return kExitInternal;
  }
}
