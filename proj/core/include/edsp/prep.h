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

/// \file edsp/prep.h
/// Loading CSV into tables, and the synthetic POI dataset.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "edsp/object_store.h"
#include "edsp/result.h"
#include "edsp/schema.h"
#include "edsp/table_format.h"

namespace edsp {

enum class IngestMode : uint8_t { kCreate, kAppend, kOverwrite };

std::string_view ToString(IngestMode mode);
Result<IngestMode> IngestModeFromString(std::string_view text);

struct IngestSpec {
  std::filesystem::path source_csv;
  std::string target_location;
  /// Inferred from the CSV when absent (CREATE only).
  std::optional<Schema> schema;
  IngestMode mode = IngestMode::kCreate;
  int64_t rows_per_file = 100000;
};

struct IngestResult {
  /// Absent when nothing was committed (zero-row CREATE or APPEND).
  std::optional<Snapshot> snapshot;
  int64_t rows = 0;
  int64_t files = 0;
  CommitStats commit;
};

/// Types each column from its values: INT64 if every non-empty field is an
/// integer, else FLOAT64 if every one is numeric, else BOOL if every one is
/// `true`/`false`, else STRING. A column is nullable iff any field is empty.
Result<Schema> InferSchema(const std::filesystem::path& csv_path);

/// Splits the CSV into data files of at most `rows_per_file` rows in input
/// order and commits them as one snapshot. A zero-row CREATE creates the
/// table without a snapshot and a zero-row APPEND commits nothing; a
/// zero-row OVERWRITE commits an empty snapshot.
Result<IngestResult> Ingest(ObjectStore& store, const IngestSpec& spec,
                            const CommitOptions& options = {});

struct PoiGenSpec {
  int64_t rows = 1000000;
  uint64_t seed = 42;
  /// Fraction of rows placed in `target_prefecture`, rounded to whole rows.
  double target_share = 0.021;
  std::string target_prefecture = "P31";
  /// Order rows by prefecture so each data file covers few prefectures.
  bool cluster_by_prefecture = true;
};

inline constexpr int kPoiPrefectures = 47;
inline constexpr int kPoiCategories = 100;

/// id, name, prefecture, category, lat, lon, rating (nullable), created_ms.
Schema PoiSchema();

std::string PrefectureCode(int index);
std::string CategoryCode(int index);

/// Generates rows in output order; the same spec always yields the same rows.
Status GeneratePoi(const PoiGenSpec& spec, const std::function<Status(Row&&)>& sink);

/// Writes the generated rows as CSV with a header line.
Status WritePoiCsv(const PoiGenSpec& spec, const std::filesystem::path& path);

}  // namespace edsp
