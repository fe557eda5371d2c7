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

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include <fmt/format.h>

#include "edsp/csv.h"
#include "edsp/prep.h"

namespace edsp {

namespace {

constexpr std::string_view kNames[] = {
    "Cafe",        "Ramen House", "Book, Store", "The \"Best\" Sushi", "ラーメン屋",
    "City Park",   "Hotel",       "Onsen 温泉",  "Museum",             "Bakery",
};

// 2024-01-01T00:00:00Z
constexpr int64_t kEpochStartMs = 1704067200000;
constexpr int64_t kYearMs = 365LL * 24 * 3600 * 1000;

class Generator {
 public:
  explicit Generator(uint64_t seed) : engine_(seed) {}

  uint64_t Below(uint64_t n) { return engine_() % n; }
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

double RoundTo(double value, double scale) { return std::round(value * scale) / scale; }

}  // namespace

Schema PoiSchema() {
  return Schema::Make({
                          {"id", DataType::kInt64, false},
                          {"name", DataType::kString, false},
                          {"prefecture", DataType::kString, false},
                          {"category", DataType::kString, false},
                          {"lat", DataType::kFloat64, false},
                          {"lon", DataType::kFloat64, false},
                          {"rating", DataType::kFloat64, true},
                          {"created_ms", DataType::kInt64, false},
                      })
      .value();
}

std::string PrefectureCode(int index) { return fmt::format("P{:02d}", index + 1); }

std::string CategoryCode(int index) { return fmt::format("C{:03d}", index); }

Status GeneratePoi(const PoiGenSpec& spec, const std::function<Status(Row&&)>& sink) {
  if (spec.rows < 0) return InvalidArgument("row count must not be negative");
  if (!(spec.target_share >= 0 && spec.target_share <= 1)) {
    return InvalidArgument("target share must be within [0, 1]");
  }
  int target = -1;
  for (int p = 0; p < kPoiPrefectures; ++p) {
    if (PrefectureCode(p) == spec.target_prefecture) target = p;
  }
  if (target < 0) {
    return InvalidArgument("unknown prefecture '{}'", spec.target_prefecture);
  }

  Generator gen(spec.seed);
  const auto rows = static_cast<size_t>(spec.rows);
  const auto target_rows = static_cast<size_t>(
      std::llround(static_cast<double>(spec.rows) * spec.target_share));

  std::vector<uint8_t> prefectures(rows);
  for (size_t i = 0; i < rows; ++i) {
    if (i < target_rows) {
      prefectures[i] = static_cast<uint8_t>(target);
    } else {
      auto p = static_cast<int>(gen.Below(kPoiPrefectures - 1));
      prefectures[i] = static_cast<uint8_t>(p >= target ? p + 1 : p);
    }
  }
  for (size_t i = rows; i > 1; --i) {
    std::swap(prefectures[i - 1], prefectures[gen.Below(i)]);
  }
  if (spec.cluster_by_prefecture) {
    std::vector<size_t> counts(kPoiPrefectures, 0);
    for (uint8_t p : prefectures) ++counts[p];
    size_t k = 0;
    for (int p = 0; p < kPoiPrefectures; ++p) {
      for (size_t n = 0; n < counts[p]; ++n) prefectures[k++] = static_cast<uint8_t>(p);
    }
  }

  for (size_t i = 0; i < rows; ++i) {
    const auto id = static_cast<int64_t>(i + 1);
    Row row;
    row.reserve(8);
    row.push_back(Value::Int64(id));
    row.push_back(Value::String(
        fmt::format("{} {}", kNames[gen.Below(std::size(kNames))], id)));
    row.push_back(Value::String(PrefectureCode(prefectures[i])));
    row.push_back(Value::String(CategoryCode(static_cast<int>(gen.Below(kPoiCategories)))));
    row.push_back(Value::Float64(RoundTo(24.0 + 22.0 * gen.Unit(), 1e6)));
    row.push_back(Value::Float64(RoundTo(123.0 + 23.0 * gen.Unit(), 1e6)));
    if (gen.Below(100) < 5) {
      row.push_back(Value::Null());
    } else {
      row.push_back(Value::Float64(RoundTo(5.0 * gen.Unit(), 10)));
    }
    row.push_back(Value::Int64(kEpochStartMs + static_cast<int64_t>(gen.Below(kYearMs))));
    EDSP_RETURN_IF_ERROR(sink(std::move(row)));
  }
  return Ok();
}

Status WritePoiCsv(const PoiGenSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return IoFailure("cannot create {}", path.string());
  Schema schema = PoiSchema();
  std::vector<std::string> fields;
  for (const Field& field : schema.fields()) fields.push_back(field.name);
  csv::WriteRecord(out, fields);
  EDSP_RETURN_IF_ERROR(GeneratePoi(spec, [&](Row&& row) -> Status {
    fields.clear();
    for (const Value& value : row) fields.push_back(csv::FormatValue(value));
    csv::WriteRecord(out, fields);
    return Ok();
  }));
  out.flush();
  if (!out) return IoFailure("failed writing {}", path.string());
  return Ok();
}

}  // namespace edsp
