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


#include <benchmark/benchmark.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "edsp/bench_audit.h"
#include "edsp/columnar_file.h"
#include "edsp/object_store.h"
#include "edsp/prep.h"
#include "edsp/scan_api.h"
#include "edsp/sql_engine.h"
#include "edsp/table_format.h"

namespace edsp {
namespace {

constexpr int64_t kBenchRows = 200000;
constexpr int64_t kBenchRowsPerFile = 4167;

std::vector<Row> PoiRows(int64_t count) {
  std::vector<Row> rows;
  PoiGenSpec spec;
  spec.rows = count;
  auto status = GeneratePoi(spec, [&](Row&& row) -> Status {
    rows.push_back(std::move(row));
    return Ok();
  });
  if (!status.has_value()) std::abort();
  return rows;
}

/// A clustered POI table in memory, shared by every benchmark below.
InMemoryObjectStore& PoiStore() {
  static InMemoryObjectStore* store = [] {
    auto* created = new InMemoryObjectStore();
    Schema schema = PoiSchema();
    if (!CreateTable(*created, "poi", schema).has_value()) std::abort();
    auto rows = PoiRows(kBenchRows);
    std::vector<ManifestEntry> entries;
    for (size_t begin = 0; begin < rows.size(); begin += kBenchRowsPerFile) {
      size_t end = std::min(rows.size(), begin + static_cast<size_t>(kBenchRowsPerFile));
      auto entry = WriteDataFile(*created, "poi", schema,
                                 std::span<const Row>(rows.data() + begin, end - begin));
      if (!entry.has_value()) std::abort();
      entries.push_back(std::move(*entry));
    }
    if (!Commit(*created, "poi", SnapshotOperation::kAppend, entries, schema.schema_id())
             .has_value()) {
      std::abort();
    }
    return created;
  }();
  return *store;
}

void BM_EcfWrite(benchmark::State& state) {
  auto rows = PoiRows(state.range(0));
  Schema schema = PoiSchema();
  for (auto _ : state) {
    auto written = ecf::WriteFile(schema, rows);
    benchmark::DoNotOptimize(written);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EcfWrite)->Arg(1000)->Arg(20000);

void BM_EcfRead(benchmark::State& state) {
  auto rows = PoiRows(state.range(0));
  auto written = ecf::WriteFile(PoiSchema(), rows);
  for (auto _ : state) {
    auto decoded = ecf::ReadFile(written->bytes);
    benchmark::DoNotOptimize(decoded);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(written->bytes.size()));
}
BENCHMARK(BM_EcfRead)->Arg(1000)->Arg(20000);

void BM_PlanScan(benchmark::State& state) {
  auto& store = PoiStore();
  auto table = LoadTable(store, "poi");
  auto predicate = ParsePredicate("prefecture = 'P31'");
  for (auto _ : state) {
    auto plan = PlanScan(store, *table, *predicate);
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_PlanScan);

void BM_WorkloadQuery(benchmark::State& state) {
  auto& store = PoiStore();
  auto query = PoiWorkload()[static_cast<size_t>(state.range(0))];
  auto statement = std::get<SelectStatement>(*ParseStatement(query.sql));
  for (auto _ : state) {
    auto result = ExecuteSelect(store, "poi", statement);
    benchmark::DoNotOptimize(result);
  }
  state.SetLabel(query.name);
}
BENCHMARK(BM_WorkloadQuery)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ScanApiFiltered(benchmark::State& state) {
  auto& store = PoiStore();
  auto statement = std::get<SelectStatement>(*ParseStatement(PoiWorkload()[1].sql));
  for (auto _ : state) {
    auto result = RunWithScanApi(store, "poi", statement);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_ScanApiFiltered)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace edsp

BENCHMARK_MAIN();
