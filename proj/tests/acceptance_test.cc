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

// Acceptance run: builds the default 1M-row clustered POI table and checks
// every release criterion at its stated threshold. Prints one PASS/FAIL line
// per criterion and exits non-zero if any fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "edsp/bench_audit.h"
#include "edsp/catalog.h"
#include "edsp/columnar_file.h"
#include "edsp/prep.h"
#include "edsp/scan_api.h"
#include "edsp/sql_engine.h"
#include "edsp/table_format.h"
#include "support/test_support.h"

namespace edsp {
namespace {

constexpr int64_t kRows = 1000000;
constexpr double kShare = 0.021;
constexpr int64_t kRowsPerFile = 20834;
constexpr std::string_view kPoi = "tables/poi";

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict Fail(std::string detail) { return {false, std::move(detail)}; }

class Acceptance {
 public:
  Acceptance() : root_(dir_.path() / "store") {}

  bool Setup() {
    auto start = Clock::now();
    store_ = testing::OpenLocalStore(root_);
    csv_ = dir_.path() / "poi.csv";
    PoiGenSpec spec;
    spec.rows = kRows;
    spec.target_share = kShare;
    if (auto s = WritePoiCsv(spec, csv_); !s.has_value()) {
      std::cerr << "setup: " << s.error().ToString() << "\n";
      return false;
    }
    IngestSpec ingest;
    ingest.source_csv = csv_;
    ingest.target_location = std::string(kPoi);
    ingest.rows_per_file = kRowsPerFile;
    auto result = Ingest(*store_, ingest);
    if (!result.has_value()) {
      std::cerr << "setup: " << result.error().ToString() << "\n";
      return false;
    }
    std::cout << fmt::format("setup: {} rows in {} files ({:.1f} s)\n", result->rows,
                             result->files, Seconds(start));
    return true;
  }

  void Check(const std::string& name, const std::function<Verdict()>& body) {
    if (!filter_.empty() && name.find(filter_) == std::string::npos) return;
    auto start = Clock::now();
    Verdict verdict = body();
    std::cout << fmt::format("[{}] {}: {} ({:.1f} s)", verdict.pass ? "PASS" : "FAIL", name,
                             verdict.detail, Seconds(start))
              << std::endl;
    all_pass_ = all_pass_ && verdict.pass;
  }

  bool all_pass() const { return all_pass_; }
  void set_filter(std::string filter) { filter_ = std::move(filter); }

  Verdict Matrix() {
    auto start = Clock::now();
    auto sql = MakeEngine("sql");
    auto scan = MakeEngine("scan");
    auto matrix =
        RunConsistencyMatrix(*store_, kPoi, PoiWorkload(), {sql->get(), scan->get()});
    double elapsed = Seconds(start);
    std::cout << matrix.ToText();
    if (!matrix.all_pass()) return Fail("engines disagree");
    if (elapsed >= 120) return Fail(fmt::format("took {:.1f} s, limit 120 s", elapsed));
    return {true, fmt::format("{} cells equal", matrix.cells.size())};
  }

  Verdict WriteOnce() {
    auto start = Clock::now();
    testing::TempDir work;
    auto store = testing::OpenLocalStore(work.path());
    WriteOnceScript script;
    script.dataset = "poi";
    script.location = std::string(kPoi);
    script.ingest_csv = csv_;
    script.rows_per_file = kRowsPerFile;
    script.queries = 90;
    for (int i = 0; i < 4; ++i) {
      PoiGenSpec spec;
      spec.rows = 10000;
      spec.seed = 1000 + static_cast<uint64_t>(i);
      auto path = work.path() / fmt::format("append-{}.csv", i);
      if (!WritePoiCsv(spec, path).has_value()) return Fail("cannot write append CSV");
      script.append_csvs.push_back(path);
    }
    auto sql = MakeEngine("sql");
    auto scan = MakeEngine("scan");
    auto report = VerifyWriteOnce(*store, script, {sql->get(), scan->get()});
    double elapsed = Seconds(start);
    if (!report.has_value()) return Fail(report.error().ToString());
    std::vector<int64_t> want_versions = {1, 2, 3, 4, 5, 6};
    std::vector<int64_t> want_sequences = {1, 2, 3, 4, 5};
    if (!report->ok()) return Fail("violations: " + fmt::format("{}", fmt::join(report->violations, "; ")));
    if (report->pointer_versions != want_versions) return Fail("unexpected pointer versions");
    if (report->snapshot_sequences != want_sequences) return Fail("unexpected sequences");
    if (report->census.RootsOf("poi") != 1) return Fail("table root count is not 1");
    int64_t scratch = 0;
    for (const auto& [engine, bytes] : report->census.scratch_bytes) scratch += bytes;
    if (scratch != 0) return Fail(fmt::format("{} scratch bytes", scratch));
    if (report->queries_run != 90 || report->query_failures != 0) {
      return Fail(fmt::format("{} queries, {} failures", report->queries_run,
                              report->query_failures));
    }
    if (elapsed >= 180) return Fail(fmt::format("took {:.1f} s, limit 180 s", elapsed));
    return {true, "1 root, 0 scratch bytes, metadata versions 1..6, snapshots 1..5, 90 queries"};
  }

  Verdict Concurrency() {
    constexpr int kWriters = 8;
    constexpr int kCommitsEach = 10;
    constexpr int kRepeats = 20;
    auto schema = *Schema::Make({{"writer", DataType::kInt64, false},
                                 {"batch", DataType::kInt64, false}});
    int64_t exhausted = 0;
    std::atomic<int> max_attempts{0};
    for (int repeat = 0; repeat < kRepeats; ++repeat) {
      testing::TempDir work;
      auto store = testing::OpenLocalStore(work.path());
      if (!CreateTable(*store, "t", schema).has_value()) return Fail("create failed");
      std::atomic<int64_t> conflicts{0};
      std::atomic<int64_t> other_errors{0};
      std::atomic<int64_t> rows_written{0};
      std::vector<std::thread> threads;
      for (int w = 0; w < kWriters; ++w) {
        threads.emplace_back([&, w] {
          for (int c = 0; c < kCommitsEach; ++c) {
            int batch = 1 + (w * kCommitsEach + c) % 7;
            std::vector<Row> rows(static_cast<size_t>(batch),
                                  Row{Value::Int64(w), Value::Int64(c)});
            auto entry = WriteDataFile(*store, "t", schema, rows);
            if (!entry.has_value()) {
              ++other_errors;
              continue;
            }
            CommitOptions options;
            options.max_retries = 10;
            CommitStats stats;
            auto committed =
                Commit(*store, "t", SnapshotOperation::kAppend, {*entry}, 0, options, &stats);
            int seen = max_attempts.load();
            while (stats.attempts > seen && !max_attempts.compare_exchange_weak(seen, stats.attempts)) {
            }
            if (committed.has_value()) {
              rows_written += batch;
            } else if (committed.error().kind == ErrorKind::kConflictExhausted) {
              ++conflicts;
            } else {
              ++other_errors;
            }
          }
        });
      }
      for (auto& t : threads) t.join();
      exhausted += conflicts;
      if (other_errors > 0) return Fail(fmt::format("repeat {}: commit errors", repeat));
      auto table = LoadTable(*store, "t");
      if (!table.has_value() || !table->snapshot) return Fail("cannot load table");
      const auto& snapshots = table->metadata.snapshots;
      if (snapshots.size() != static_cast<size_t>(kWriters * kCommitsEach - conflicts)) {
        return Fail(fmt::format("repeat {}: {} snapshots", repeat, snapshots.size()));
      }
      // Walk the parent chain from the head; it must visit every snapshot once.
      std::set<int64_t> visited;
      const Snapshot* cursor = table->metadata.CurrentSnapshot();
      int64_t expected_sequence = static_cast<int64_t>(snapshots.size());
      while (cursor != nullptr) {
        if (cursor->sequence != expected_sequence-- || !visited.insert(cursor->snapshot_id).second) {
          return Fail(fmt::format("repeat {}: parent chain is not linear", repeat));
        }
        cursor = cursor->parent_id ? table->metadata.SnapshotById(*cursor->parent_id) : nullptr;
      }
      if (visited.size() != snapshots.size()) return Fail("snapshots outside the chain");
      int64_t counted = static_cast<int64_t>(testing::ReadTableNaive(*store, "t").size());
      if (counted != rows_written || table->snapshot->total_rows != rows_written) {
        return Fail(fmt::format("repeat {}: {} rows read, {} written", repeat, counted,
                                rows_written.load()));
      }
    }
    if (exhausted != 0) return Fail(fmt::format("{} commits exhausted their retries", exhausted));
    return {true, fmt::format("{} repeats of {}x{} commits, linear chains, no lost rows, "
                              "at most {} attempts per commit",
                              kRepeats, kWriters, kCommitsEach, max_attempts.load())};
  }

  Verdict Pruning() {
    auto workload = PoiWorkload();
    auto q1 = std::get<SelectStatement>(*ParseStatement(workload[0].sql));
    auto q2 = std::get<SelectStatement>(*ParseStatement(workload[1].sql));
    auto full = ExecuteSelect(*store_, kPoi, q1);
    auto pruned = ExecuteSelect(*store_, kPoi, q2);
    auto unpruned = ExecuteSelect(*store_, kPoi, q2, ExecOptions{false, {}});
    if (!full || !pruned || !unpruned) return Fail("query failed");
    const auto& c = pruned->counters;
    double pruned_share = static_cast<double>(c.files_pruned) / c.files_considered;
    double byte_share =
        static_cast<double>(c.data_bytes_read) / full->counters.data_bytes_read;
    std::string detail = fmt::format("{} of {} files pruned ({:.1f}%), {:.1f}% of Q1 bytes",
                                     c.files_pruned, c.files_considered, 100 * pruned_share,
                                     100 * byte_share);
    if (c.files_considered != 48) return Fail(detail + "; expected 48 files");
    if (pruned_share < 0.8) return Fail(detail);
    if (byte_share > 0.2) return Fail(detail);
    if (!testing::BitEqualRows(pruned->rows, unpruned->rows)) {
      return Fail(detail + "; rows differ from the unpruned scan");
    }
    return {true, detail};
  }

  Verdict Latency() {
    auto start = Clock::now();
    BenchOptions options;
    options.runs = 30;
    options.cold = true;
    options.cli_path = EDSP_CLI_PATH;
    options.store_root = root_;
    auto report = RunBench(*store_, kPoi, {"sql", "scan"}, PoiWorkload(), options);
    double elapsed = Seconds(start);
    if (!report.has_value()) return Fail(report.error().ToString());
    std::cout << report->ToText();
    std::string detail;
    for (const auto& engine : report->engines) {
      const BenchCell* q1 = report->Find(engine, "Q1");
      const BenchCell* q2 = report->Find(engine, "Q2");
      if (q1 == nullptr || q2 == nullptr) return Fail("missing cells");
      detail += fmt::format("{}: p50 Q2 {:.1f} ms vs Q1 {:.1f} ms; ", engine, q2->p50_ms,
                            q1->p50_ms);
    }
    // Ordering is asserted on the SQL engine, which reads all of Q1 before
    // applying LIMIT. The scan API stops Q1 after the first file by contract.
    const BenchCell* sql_q1 = report->Find("sql", "Q1");
    const BenchCell* sql_q2 = report->Find("sql", "Q2");
    if (!(sql_q2->p50_ms < sql_q1->p50_ms)) return Fail(detail + "sql Q2 not faster");
    if (!(sql_q2->counters.data_bytes_read < sql_q1->counters.data_bytes_read)) {
      return Fail(detail + "sql Q2 read more bytes than Q1");
    }
    for (const auto& cell : report->cells) {
      if (cell.error) return Fail(cell.engine + "/" + cell.query + ": " + *cell.error);
      if (!cell.verified || cell.timings_ms.size() != 30) {
        return Fail(cell.engine + "/" + cell.query + " not verified");
      }
      if (cell.p50_ms > cell.p95_ms) return Fail(cell.engine + "/" + cell.query + " p50 > p95");
    }
    if (elapsed >= 600) return Fail(detail + fmt::format("took {:.1f} s", elapsed));
    return {true, detail + "p50(Q2) < p50(Q1) on sql, p50 <= p95 in every cell"};
  }

  Verdict TimeTravel() {
    testing::TempDir work;
    auto store = testing::OpenLocalStore(work.path());
    auto schema = *Schema::Make({{"v", DataType::kInt64, false}});
    if (!CreateTable(*store, "t", schema).has_value()) return Fail("create failed");
    const int64_t batches[] = {137, 2048, 5};
    std::vector<int64_t> ids;
    for (int64_t size : batches) {
      std::vector<Row> rows(static_cast<size_t>(size), Row{Value::Int64(size)});
      auto entry = WriteDataFile(*store, "t", schema, rows);
      auto snapshot = Commit(*store, "t", SnapshotOperation::kAppend, {*entry}, 0);
      if (!snapshot.has_value()) return Fail(snapshot.error().ToString());
      ids.push_back(snapshot->snapshot_id);
    }
    auto count = std::get<SelectStatement>(*ParseStatement("SELECT COUNT(*) FROM t"));
    int64_t cumulative = 0;
    std::string detail;
    for (size_t i = 0; i < ids.size(); ++i) {
      cumulative += batches[i];
      ExecOptions options;
      options.as_of = SnapshotId{ids[i]};
      auto result = ExecuteSelect(*store, "t", count, options);
      if (!result.has_value()) return Fail(result.error().ToString());
      int64_t got = result->rows[0][0].as_int64();
      detail += fmt::format("{}{}", i ? ", " : "counts ", got);
      if (got != cumulative) return Fail(detail + fmt::format(" expected {}", cumulative));
    }
    return {true, detail};
  }

  Verdict Onboarding() {
    std::string before = testing::StoreDigest(*store_, "tables/");
    Catalog catalog(*store_);
    auto entry = catalog.Register("poi", std::string(kPoi), "synthetic POI", "static");
    if (!entry.has_value()) return Fail(entry.error().ToString());
    std::string after = testing::StoreDigest(*store_, "tables/");
    if (before != after) return Fail("registration changed table objects");
    auto snippet = catalog.Snippet("poi", "sql");
    if (!snippet.has_value()) return Fail(snippet.error().ToString());
    int statements = 0;
    size_t begin = 0;
    while (begin < snippet->size()) {
      size_t end = snippet->find(';', begin);
      std::string piece = snippet->substr(begin, end == std::string::npos ? end : end - begin);
      if (piece.find_first_not_of(" \t\r\n") != std::string::npos) ++statements;
      if (end == std::string::npos) break;
      begin = end + 1;
    }
    if (statements != 1) return Fail(fmt::format("snippet has {} statements", statements));
    SqlSession session(*store_);
    if (auto ddl = session.Execute(*snippet); !ddl.has_value()) {
      return Fail(ddl.error().ToString());
    }
    auto q1 = session.Execute(PoiWorkload()[0].sql);
    if (!q1.has_value()) return Fail(q1.error().ToString());
    auto direct = ExecuteSelect(*store_, kPoi,
                                std::get<SelectStatement>(*ParseStatement(PoiWorkload()[0].sql)));
    if (!testing::BitEqualRows(q1->rows, direct->rows)) return Fail("Q1 differs");
    return {true, fmt::format("'{}' then Q1 returned {} rows; table digest unchanged",
                              *snippet, q1->rows.size())};
  }

  Verdict Codec() {
    testing::Rng rng(0xC0DEC);
    for (int trial = 0; trial < 1000; ++trial) {
      Schema schema = testing::RandomSchema(rng);
      auto rows = testing::RandomRows(rng, schema, static_cast<size_t>(rng.Int(0, 64)));
      auto written = ecf::WriteFile(schema, rows);
      if (!written.has_value()) return Fail(written.error().ToString());
      auto decoded = ecf::ReadFile(written->bytes);
      if (!decoded.has_value()) return Fail(decoded.error().ToString());
      if (!(decoded->schema == schema) || !testing::BitEqualRows(decoded->rows, rows)) {
        return Fail(fmt::format("case {} did not round-trip", trial));
      }
      auto again = ecf::WriteFile(decoded->schema, decoded->rows);
      if (!again.has_value() || again->bytes != written->bytes) {
        return Fail(fmt::format("case {} re-encoded differently", trial));
      }
    }
    int detected = 0;
    for (int k = 0; k < 100; ++k) {
      Schema schema = testing::RandomSchema(rng);
      auto rows = testing::RandomRows(rng, schema, static_cast<size_t>(rng.Int(1, 32)));
      auto written = ecf::WriteFile(schema, rows);
      std::string bytes = written->bytes;
      size_t pos = static_cast<size_t>(rng.Int(0, static_cast<int64_t>(bytes.size()) - 1));
      bytes[pos] = static_cast<char>(bytes[pos] ^ static_cast<char>(rng.Int(1, 255)));
      if (!ecf::ReadFile(bytes).has_value()) ++detected;
    }
    if (detected != 100) return Fail(fmt::format("{} of 100 corruptions detected", detected));
    return {true, "1000 cases bit-exact, 100 of 100 corruptions detected"};
  }

  Verdict Selectivity() {
    const auto expected = static_cast<int64_t>(std::llround(kRows * kShare));
    int64_t generated = 0;
    PoiGenSpec spec;
    spec.rows = kRows;
    spec.target_share = kShare;
    auto status = GeneratePoi(spec, [&](Row&& row) -> Status {
      if (row[2].as_string() == "P31") ++generated;
      return Ok();
    });
    if (!status.has_value()) return Fail(status.error().ToString());
    int64_t stored = 0;
    for (const Row& row : testing::ReadTableNaive(*store_, kPoi)) {
      if (row[2] == Value::String("P31")) ++stored;
    }
    auto q2 = PoiWorkload("poi", std::nullopt)[1];
    auto result =
        ExecuteSelect(*store_, kPoi, std::get<SelectStatement>(*ParseStatement(q2.sql)));
    if (!result.has_value()) return Fail(result.error().ToString());
    auto returned = static_cast<int64_t>(result->rows.size());
    std::string detail = fmt::format("generator {}, table {}, unlimited Q2 {}, expected {}",
                                     generated, stored, returned, expected);
    if (expected != 21000 || generated != expected || stored != expected ||
        returned != expected) {
      return Fail(detail);
    }
    return {true, detail};
  }

 private:
  testing::TempDir dir_;
  std::filesystem::path root_;
  std::filesystem::path csv_;
  std::unique_ptr<LocalObjectStore> store_;
  bool all_pass_ = true;
  std::string filter_;
};

}  // namespace
}  // namespace edsp

// An optional argument runs only the criteria whose name contains it.
int main(int argc, char** argv) {
  edsp::Acceptance acceptance;
  if (argc > 1) acceptance.set_filter(argv[1]);
  if (!acceptance.Setup()) {
    std::cout << "[FAIL] setup" << std::endl;
    return 1;
  }
  acceptance.Check("selectivity fidelity", [&] { return acceptance.Selectivity(); });
  acceptance.Check("pruning effectiveness", [&] { return acceptance.Pruning(); });
  acceptance.Check("read-anywhere matrix", [&] { return acceptance.Matrix(); });
  acceptance.Check("time travel", [&] { return acceptance.TimeTravel(); });
  acceptance.Check("single-statement onboarding", [&] { return acceptance.Onboarding(); });
  acceptance.Check("codec conformance", [&] { return acceptance.Codec(); });
  acceptance.Check("concurrent appends", [&] { return acceptance.Concurrency(); });
  acceptance.Check("write-once audit", [&] { return acceptance.WriteOnce(); });
  acceptance.Check("latency ordering", [&] { return acceptance.Latency(); });
  std::cout << (acceptance.all_pass() ? "all criteria passed" : "some criteria failed")
            << std::endl;
  return acceptance.all_pass() ? 0 : 1;
}
