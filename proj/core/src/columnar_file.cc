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

#include "edsp/columnar_file.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "edsp/util.h"

namespace edsp::ecf {

namespace {

using nlohmann::json;

constexpr uint64_t kHeadBytes = 8;   // magic + schema length
constexpr uint64_t kTailBytes = 8;   // footer length + magic

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(const char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(p[i])) << (8 * i);
  return v;
}

uint64_t GetU64(const char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(p[i])) << (8 * i);
  return v;
}

uint64_t BitmapBytes(uint64_t rows) { return (rows + 7) / 8; }

Error Corrupt(std::string_view what) {
  return MakeError(ErrorKind::kFooterMismatch, "corrupt ECF file: {}", what);
}

Error Truncated(std::string_view what) {
  return MakeError(ErrorKind::kTruncatedFile, "truncated ECF file: {}", what);
}

json ValueToJson(const Value& value) {
  switch (value.type()) {
    case DataType::kInt64:
      return value.as_int64();
    case DataType::kFloat64:
      return value.as_float64();
    case DataType::kBool:
      return value.as_bool();
    case DataType::kString:
      return value.as_string();
  }
  return nullptr;
}

Result<Value> ValueFromJson(const json& j, DataType type) {
  switch (type) {
    case DataType::kInt64:
      if (j.is_number_integer()) return Value::Int64(j.get<int64_t>());
      break;
    case DataType::kFloat64:
      if (j.is_number()) return Value::Float64(j.get<double>());
      break;
    case DataType::kBool:
      if (j.is_boolean()) return Value::Bool(j.get<bool>());
      break;
    case DataType::kString:
      if (j.is_string()) return Value::String(j.get<std::string>());
      break;
  }
  return InvalidArgument("statistic {} is not a {}", j.dump(), ToString(type));
}

template <typename T>
void UpdateMinMax(const T& v, bool& seen, T& lo, T& hi) {
  if (!seen) {
    lo = v;
    hi = v;
    seen = true;
    return;
  }
  if (v < lo) lo = v;
  if (hi < v) hi = v;
}

}  // namespace

// --------------------------------------------------------------------------
// Statistics

json ColumnStats::ToJson() const {
  json out = json::object();
  if (min.has_value()) out["min"] = ValueToJson(*min);
  if (max.has_value()) out["max"] = ValueToJson(*max);
  out["null_count"] = null_count;
  return out;
}

Result<ColumnStats> ColumnStats::FromJson(const json& j, DataType type) {
  if (!j.is_object() || !j.contains("null_count") ||
      !j["null_count"].is_number_unsigned()) {
    return InvalidArgument("column statistics need a non-negative null_count");
  }
  ColumnStats stats;
  stats.null_count = j["null_count"].get<int64_t>();
  if (j.contains("min") != j.contains("max")) {
    return InvalidArgument("column statistics carry only one of min/max");
  }
  if (j.contains("min")) {
    EDSP_ASSIGN_OR_RETURN(stats.min, ValueFromJson(j["min"], type));
    EDSP_ASSIGN_OR_RETURN(stats.max, ValueFromJson(j["max"], type));
    auto order = CompareValues(*stats.min, *stats.max);
    if (!order.has_value() || *order > 0) {
      return InvalidArgument("column statistics have min > max");
    }
  }
  return stats;
}

json StatsToJson(const StatsMap& stats) {
  json out = json::object();
  for (const auto& [name, column] : stats) out[name] = column.ToJson();
  return out;
}

Result<StatsMap> StatsFromJson(const json& j, const Schema& schema) {
  if (!j.is_object()) return InvalidArgument("statistics must be a JSON object");
  StatsMap out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Field* field = schema.FindField(it.key());
    if (field == nullptr) {
      return InvalidArgument("statistics for unknown column '{}'", it.key());
    }
    EDSP_ASSIGN_OR_RETURN(out[it.key()], ColumnStats::FromJson(it.value(), field->type));
  }
  return out;
}

Value Column::ValueAt(size_t row) const {
  if (IsNull(row)) return Value::Null();
  switch (type) {
    case DataType::kInt64:
      return Value::Int64(int64_values[row]);
    case DataType::kFloat64:
      return Value::Float64(float64_values[row]);
    case DataType::kBool:
      return Value::Bool(bool_values[row] != 0);
    case DataType::kString:
      return Value::String(string_values[row]);
  }
  return Value::Null();
}

Column Column::AllNull(DataType type, int64_t length) {
  Column column;
  column.type = type;
  column.length = length;
  auto n = static_cast<size_t>(length);
  column.validity.assign(n, 0);
  switch (type) {
    case DataType::kInt64:
      column.int64_values.assign(n, 0);
      break;
    case DataType::kFloat64:
      column.float64_values.assign(n, 0.0);
      break;
    case DataType::kBool:
      column.bool_values.assign(n, 0);
      break;
    case DataType::kString:
      column.string_values.assign(n, std::string());
      break;
  }
  return column;
}

ColumnStats ComputeStats(const Column& column) {
  ColumnStats stats;
  bool seen = false;
  auto n = static_cast<size_t>(column.length);
  switch (column.type) {
    case DataType::kInt64: {
      int64_t lo = 0, hi = 0;
      for (size_t i = 0; i < n; ++i) {
        if (column.IsNull(i)) continue;
        UpdateMinMax(column.int64_values[i], seen, lo, hi);
      }
      if (seen) {
        stats.min = Value::Int64(lo);
        stats.max = Value::Int64(hi);
      }
      break;
    }
    case DataType::kFloat64: {
      double lo = 0, hi = 0;
      for (size_t i = 0; i < n; ++i) {
        if (column.IsNull(i) || std::isnan(column.float64_values[i])) continue;
        UpdateMinMax(column.float64_values[i], seen, lo, hi);
      }
      if (seen) {
        stats.min = Value::Float64(lo);
        stats.max = Value::Float64(hi);
      }
      break;
    }
    case DataType::kBool: {
      bool lo = false, hi = false;
      for (size_t i = 0; i < n; ++i) {
        if (column.IsNull(i)) continue;
        UpdateMinMax(column.bool_values[i] != 0, seen, lo, hi);
      }
      if (seen) {
        stats.min = Value::Bool(lo);
        stats.max = Value::Bool(hi);
      }
      break;
    }
    case DataType::kString: {
      const std::string* lo = nullptr;
      const std::string* hi = nullptr;
      for (size_t i = 0; i < n; ++i) {
        if (column.IsNull(i)) continue;
        const std::string& v = column.string_values[i];
        if (lo == nullptr || v < *lo) lo = &v;
        if (hi == nullptr || *hi < v) hi = &v;
      }
      if (lo != nullptr) {
        stats.min = Value::String(*lo);
        stats.max = Value::String(*hi);
      }
      break;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (column.IsNull(i)) ++stats.null_count;
  }
  return stats;
}

// --------------------------------------------------------------------------
// Writer

namespace {

Result<Column> GatherColumn(const Field& field, size_t index, std::span<const Row> rows) {
  Column column;
  column.type = field.type;
  column.length = static_cast<int64_t>(rows.size());
  const size_t n = rows.size();
  if (field.nullable) column.validity.assign(n, 1);
  switch (field.type) {
    case DataType::kInt64:
      column.int64_values.assign(n, 0);
      break;
    case DataType::kFloat64:
      column.float64_values.assign(n, 0.0);
      break;
    case DataType::kBool:
      column.bool_values.assign(n, 0);
      break;
    case DataType::kString:
      column.string_values.resize(n);
      break;
  }
  for (size_t r = 0; r < n; ++r) {
    const Value& v = rows[r][index];
    if (v.is_null()) {
      column.validity[r] = 0;
      continue;
    }
    switch (field.type) {
      case DataType::kInt64:
        column.int64_values[r] = v.as_int64();
        break;
      case DataType::kFloat64:
        if (!std::isfinite(v.as_float64())) {
          return InvalidArgument("non-finite FLOAT64 in column '{}' row {}", field.name,
                                 r);
        }
        column.float64_values[r] = v.as_float64();
        break;
      case DataType::kBool:
        column.bool_values[r] = v.as_bool() ? 1 : 0;
        break;
      case DataType::kString:
        if (!IsValidUtf8(v.as_string())) {
          return MakeError(ErrorKind::kInvalidUtf8,
                           "column '{}' row {} is not valid UTF-8", field.name, r);
        }
        column.string_values[r] = v.as_string();
        break;
    }
  }
  return column;
}

void AppendBitmap(std::string& out, const std::vector<uint8_t>& bits, size_t n) {
  size_t start = out.size();
  out.append(BitmapBytes(n), '\0');
  for (size_t i = 0; i < n; ++i) {
    if (bits[i] != 0) out[start + i / 8] = static_cast<char>(out[start + i / 8] | (1 << (i % 8)));
  }
}

Status EncodeColumn(const Field& field, const Column& column, std::string& out) {
  const auto n = static_cast<size_t>(column.length);
  if (field.nullable) AppendBitmap(out, column.validity, n);
  switch (field.type) {
    case DataType::kInt64:
      for (size_t i = 0; i < n; ++i) {
        PutU64(out, column.IsNull(i) ? 0 : static_cast<uint64_t>(column.int64_values[i]));
      }
      break;
    case DataType::kFloat64:
      for (size_t i = 0; i < n; ++i) {
        uint64_t bits = 0;
        if (!column.IsNull(i)) std::memcpy(&bits, &column.float64_values[i], 8);
        PutU64(out, bits);
      }
      break;
    case DataType::kBool: {
      std::vector<uint8_t> bits(n);
      for (size_t i = 0; i < n; ++i) bits[i] = column.IsNull(i) ? 0 : column.bool_values[i];
      AppendBitmap(out, bits, n);
      break;
    }
    case DataType::kString: {
      uint64_t total = 0;
      PutU32(out, 0);
      for (size_t i = 0; i < n; ++i) {
        if (!column.IsNull(i)) total += column.string_values[i].size();
        if (total > std::numeric_limits<uint32_t>::max()) {
          return InvalidArgument("STRING column '{}' exceeds 4 GiB", field.name);
        }
        PutU32(out, static_cast<uint32_t>(total));
      }
      for (size_t i = 0; i < n; ++i) {
        if (!column.IsNull(i)) out.append(column.string_values[i]);
      }
      break;
    }
  }
  return Ok();
}

}  // namespace

Result<WrittenFile> WriteFile(const Schema& schema, std::span<const Row> rows) {
  for (const auto& row : rows) {
    EDSP_RETURN_IF_ERROR(schema.ValidateRow(row));
  }
  WrittenFile file;
  file.row_count = static_cast<int64_t>(rows.size());
  std::string& out = file.bytes;
  out.append(kMagic);
  std::string schema_json = schema.ToJson().dump();
  PutU32(out, static_cast<uint32_t>(schema_json.size()));
  out.append(schema_json);
  PutU64(out, static_cast<uint64_t>(rows.size()));
  for (size_t i = 0; i < schema.num_fields(); ++i) {
    const Field& field = schema.field(i);
    EDSP_ASSIGN_OR_RETURN(auto column, GatherColumn(field, i, rows));
    EDSP_RETURN_IF_ERROR(EncodeColumn(field, column, out));
    file.stats[field.name] = ComputeStats(column);
  }
  json footer = {{"row_count", file.row_count},
                 {"columns", StatsToJson(file.stats)},
                 {"crc32", Crc32(out)}};
  std::string footer_json = footer.dump();
  out.append(footer_json);
  PutU32(out, static_cast<uint32_t>(footer_json.size()));
  out.append(kMagic);
  return file;
}

// --------------------------------------------------------------------------
// Sources

Result<std::string> RangeSource::Read(uint64_t offset, uint64_t length) {
  if (offset > size() || length > size() - offset) {
    return Truncated(fmt::format("range [{}, {}) beyond size {}", offset,
                                 offset + length, size()));
  }
  EDSP_ASSIGN_OR_RETURN(auto bytes, DoRead(offset, length));
  bytes_read_ += bytes.size();
  return bytes;
}

Result<std::string> BufferSource::DoRead(uint64_t offset, uint64_t length) {
  return std::string(bytes_.substr(offset, length));
}

Result<std::string> BlobSource::DoRead(uint64_t offset, uint64_t length) {
  return store_.GetRange(key_, offset, length);
}

// --------------------------------------------------------------------------
// Reader

Result<FileReader> FileReader::Open(RangeSource& source) {
  FileReader reader(source);
  const uint64_t size = source.size();
  if (size >= kMagic.size()) {
    EDSP_ASSIGN_OR_RETURN(auto magic, source.Read(0, kMagic.size()));
    if (magic != kMagic) {
      return MakeError(ErrorKind::kBadMagic, "file does not start with ECF1");
    }
  }
  if (size < kHeadBytes + 8 + kTailBytes) {
    return Truncated(fmt::format("{} bytes is smaller than the minimum file", size));
  }
  EDSP_ASSIGN_OR_RETURN(auto tail, source.Read(size - kTailBytes, kTailBytes));
  if (std::string_view(tail).substr(4) != kMagic) {
    return MakeError(ErrorKind::kBadMagic, "file does not end with ECF1");
  }
  EDSP_ASSIGN_OR_RETURN(auto head, source.Read(0, kHeadBytes));
  const uint64_t schema_length = GetU32(head.data() + 4);
  const uint64_t footer_length = GetU32(tail.data());
  const uint64_t data_start = kHeadBytes + schema_length + 8;
  if (data_start + kTailBytes > size || footer_length > size - kTailBytes - data_start) {
    return Truncated("schema or footer length exceeds the file size");
  }
  reader.footer_offset_ = size - kTailBytes - footer_length;

  EDSP_ASSIGN_OR_RETURN(auto schema_block, source.Read(kHeadBytes, schema_length + 8));
  json schema_json = json::parse(schema_block.begin(), schema_block.end() - 8, nullptr,
                                 /*allow_exceptions=*/false);
  if (schema_json.is_discarded()) return Corrupt("schema block is not valid JSON");
  auto schema = Schema::FromJson(schema_json);
  if (!schema.has_value()) return Corrupt(schema.error().message);
  reader.schema_ = std::move(*schema);
  const uint64_t row_count = GetU64(schema_block.data() + schema_length);

  EDSP_ASSIGN_OR_RETURN(auto footer_block, source.Read(reader.footer_offset_, footer_length));
  json footer = json::parse(footer_block, nullptr, /*allow_exceptions=*/false);
  if (footer.is_discarded() || !footer.is_object()) {
    return Corrupt("footer is not a JSON object");
  }
  if (!footer.contains("row_count") || !footer["row_count"].is_number_unsigned() ||
      !footer.contains("columns") || !footer.contains("crc32") ||
      !footer["crc32"].is_number_unsigned()) {
    return Corrupt("footer lacks row_count, columns or crc32");
  }
  if (footer["row_count"].get<uint64_t>() != row_count) {
    return Corrupt(fmt::format("footer row_count {} disagrees with header row_count {}",
                               footer["row_count"].get<uint64_t>(), row_count));
  }
  if (row_count > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())) {
    return Corrupt("row_count out of range");
  }
  reader.row_count_ = static_cast<int64_t>(row_count);
  auto stats = StatsFromJson(footer["columns"], reader.schema_);
  if (!stats.has_value()) return Corrupt(stats.error().message);
  if (stats->size() != reader.schema_.num_fields()) {
    return Corrupt("footer statistics do not cover every column");
  }
  for (const auto& [name, column_stats] : *stats) {
    if (static_cast<uint64_t>(column_stats.null_count) > row_count) {
      return Corrupt(fmt::format("null_count of '{}' exceeds row_count", name));
    }
  }
  reader.stats_ = std::move(*stats);
  reader.crc32_ = footer["crc32"].get<uint32_t>();

  // Locate column blocks. Every size is bounded by the remaining space before
  // the footer, so the arithmetic below cannot overflow.
  uint64_t offset = data_start;
  const uint64_t limit = reader.footer_offset_;
  auto take = [&](uint64_t bytes) -> Status {
    if (bytes > limit - offset) {
      return Truncated("column blocks overrun the footer");
    }
    offset += bytes;
    return Ok();
  };
  const uint64_t rows = row_count;
  for (const auto& field : reader.schema_.fields()) {
    Block block;
    block.offset = offset;
    if (field.nullable) EDSP_RETURN_IF_ERROR(take(BitmapBytes(rows)));
    switch (field.type) {
      case DataType::kInt64:
      case DataType::kFloat64:
        if (rows > (limit - offset) / 8) return Truncated("column blocks overrun the footer");
        EDSP_RETURN_IF_ERROR(take(rows * 8));
        break;
      case DataType::kBool:
        EDSP_RETURN_IF_ERROR(take(BitmapBytes(rows)));
        break;
      case DataType::kString: {
        if (rows >= (limit - offset) / 4) return Truncated("column blocks overrun the footer");
        uint64_t last_offset_pos = offset + rows * 4;
        EDSP_ASSIGN_OR_RETURN(auto last, source.Read(last_offset_pos, 4));
        EDSP_RETURN_IF_ERROR(take((rows + 1) * 4));
        EDSP_RETURN_IF_ERROR(take(GetU32(last.data())));
        break;
      }
    }
    block.length = offset - block.offset;
    reader.blocks_.push_back(block);
  }
  if (offset != limit) {
    return Corrupt(fmt::format("column blocks end at {} but the footer starts at {}",
                               offset, limit));
  }
  return reader;
}

Status FileReader::VerifyChecksum() {
  EDSP_ASSIGN_OR_RETURN(auto body, source_->Read(0, footer_offset_));
  if (Crc32(body) != crc32_) {
    return MakeError(ErrorKind::kChecksumMismatch, "crc32 mismatch");
  }
  return Ok();
}

Result<Column> FileReader::ReadColumn(std::string_view name) {
  auto index = schema_.FieldIndex(name);
  if (!index.has_value()) {
    return MakeError(ErrorKind::kUnknownColumn, "file has no column '{}'", name);
  }
  return ReadColumn(*index);
}

Result<Column> FileReader::ReadColumn(size_t index) {
  const Field& field = schema_.field(index);
  const Block& block = blocks_[index];
  EDSP_ASSIGN_OR_RETURN(auto bytes, source_->Read(block.offset, block.length));
  const auto n = static_cast<size_t>(row_count_);
  const char* p = bytes.data();

  Column column;
  column.type = field.type;
  column.length = row_count_;

  auto read_bitmap = [&](std::vector<uint8_t>& out) -> Status {
    const size_t nbytes = BitmapBytes(n);
    out.resize(n);
    for (size_t i = 0; i < n; ++i) {
      out[i] = (static_cast<uint8_t>(p[i / 8]) >> (i % 8)) & 1;
    }
    if (n % 8 != 0 && (static_cast<uint8_t>(p[nbytes - 1]) >> (n % 8)) != 0) {
      return Corrupt(fmt::format("padding bits set in column '{}'", field.name));
    }
    p += nbytes;
    return Ok();
  };

  bool has_nulls = false;
  if (field.nullable) {
    EDSP_RETURN_IF_ERROR(read_bitmap(column.validity));
    for (uint8_t bit : column.validity) {
      if (bit == 0) {
        has_nulls = true;
        break;
      }
    }
  }
  auto null_slot_error = [&](size_t row) {
    return Corrupt(fmt::format("null slot {} of column '{}' is not zero", row, field.name));
  };

  switch (field.type) {
    case DataType::kInt64:
      column.int64_values.resize(n);
      for (size_t i = 0; i < n; ++i, p += 8) {
        column.int64_values[i] = static_cast<int64_t>(GetU64(p));
        if (column.IsNull(i) && column.int64_values[i] != 0) return null_slot_error(i);
      }
      break;
    case DataType::kFloat64:
      column.float64_values.resize(n);
      for (size_t i = 0; i < n; ++i, p += 8) {
        uint64_t bits = GetU64(p);
        std::memcpy(&column.float64_values[i], &bits, 8);
        if (column.IsNull(i)) {
          if (bits != 0) return null_slot_error(i);
        } else if (!std::isfinite(column.float64_values[i])) {
          return Corrupt(fmt::format("non-finite value in column '{}'", field.name));
        }
      }
      break;
    case DataType::kBool:
      EDSP_RETURN_IF_ERROR(read_bitmap(column.bool_values));
      for (size_t i = 0; i < n; ++i) {
        if (column.IsNull(i) && column.bool_values[i] != 0) return null_slot_error(i);
      }
      break;
    case DataType::kString: {
      const char* offsets = p;
      const char* data = p + (n + 1) * 4;
      const uint64_t data_length = GetU32(offsets + n * 4);
      if (GetU32(offsets) != 0) return Corrupt("first string offset is not zero");
      column.string_values.resize(n);
      uint32_t previous = 0;
      for (size_t i = 0; i < n; ++i) {
        uint32_t end = GetU32(offsets + (i + 1) * 4);
        if (end < previous || end > data_length) {
          return Corrupt(fmt::format("string offsets of '{}' are not monotone", field.name));
        }
        std::string_view value(data + previous, end - previous);
        if (column.IsNull(i) && !value.empty()) return null_slot_error(i);
        if (!IsValidUtf8(value)) {
          return MakeError(ErrorKind::kInvalidUtf8, "column '{}' row {} is not UTF-8",
                           field.name, i);
        }
        column.string_values[i].assign(value);
        previous = end;
      }
      break;
    }
  }
  if (!has_nulls) column.validity.clear();
  return column;
}

Result<DecodedFile> ReadFile(std::string_view bytes) {
  BufferSource source(bytes);
  EDSP_ASSIGN_OR_RETURN(auto reader, FileReader::Open(source));
  EDSP_RETURN_IF_ERROR(reader.VerifyChecksum());
  DecodedFile file;
  file.schema = reader.schema();
  file.row_count = reader.row_count();
  file.stats = reader.stats();
  const auto n = static_cast<size_t>(reader.row_count());
  file.rows.assign(n, Row(reader.schema().num_fields()));
  for (size_t c = 0; c < reader.schema().num_fields(); ++c) {
    EDSP_ASSIGN_OR_RETURN(auto column, reader.ReadColumn(c));
    const std::string& name = reader.schema().field(c).name;
    if (ComputeStats(column) != file.stats.at(name)) {
      return Corrupt(fmt::format("footer statistics of '{}' disagree with the data", name));
    }
    for (size_t r = 0; r < n; ++r) file.rows[r][c] = column.ValueAt(r);
  }
  return file;
}

// --------------------------------------------------------------------------
// Projected reads

namespace {

std::weak_ordering CompareCell(const Column& column, size_t row, const Value& literal) {
  switch (column.type) {
    case DataType::kInt64: {
      int64_t v = column.int64_values[row];
      if (literal.type() == DataType::kInt64) return v <=> literal.as_int64();
      return CompareInt64Float64(v, literal.as_float64());
    }
    case DataType::kFloat64: {
      double v = column.float64_values[row];
      if (literal.type() == DataType::kInt64) {
        return 0 <=> CompareInt64Float64(literal.as_int64(), v);
      }
      double l = literal.as_float64();
      if (v < l) return std::weak_ordering::less;
      if (v > l) return std::weak_ordering::greater;
      return std::weak_ordering::equivalent;
    }
    case DataType::kBool:
      return (column.bool_values[row] != 0) <=> literal.as_bool();
    case DataType::kString:
      return column.string_values[row].compare(literal.as_string()) <=> 0;
  }
  return std::weak_ordering::equivalent;
}

Truth EvaluateRow(const Predicate& predicate,
                  const std::unordered_map<std::string, const Column*>& columns,
                  size_t row) {
  switch (predicate.kind()) {
    case Predicate::Kind::kConstant:
      return predicate.constant() ? Truth::kTrue : Truth::kFalse;
    case Predicate::Kind::kIsNull:
      return columns.at(predicate.column())->IsNull(row) ? Truth::kTrue : Truth::kFalse;
    case Predicate::Kind::kIsNotNull:
      return columns.at(predicate.column())->IsNull(row) ? Truth::kFalse : Truth::kTrue;
    case Predicate::Kind::kCompare: {
      const Column& column = *columns.at(predicate.column());
      if (column.IsNull(row)) return Truth::kUnknown;
      return Satisfies(predicate.op(), CompareCell(column, row, predicate.literal()))
                 ? Truth::kTrue
                 : Truth::kFalse;
    }
    case Predicate::Kind::kAnd: {
      Truth lhs = EvaluateRow(*predicate.left(), columns, row);
      if (lhs == Truth::kFalse) return lhs;
      return And(lhs, EvaluateRow(*predicate.right(), columns, row));
    }
    case Predicate::Kind::kOr: {
      Truth lhs = EvaluateRow(*predicate.left(), columns, row);
      if (lhs == Truth::kTrue) return lhs;
      return Or(lhs, EvaluateRow(*predicate.right(), columns, row));
    }
  }
  return Truth::kUnknown;
}

}  // namespace

Result<std::vector<Row>> ProjectRead(RangeSource& source,
                                     const std::vector<std::string>& columns,
                                     const PredicatePtr& predicate,
                                     const Schema* reader_schema) {
  EDSP_ASSIGN_OR_RETURN(auto reader, FileReader::Open(source));
  const Schema& file_schema = reader.schema();
  const Schema& bind_schema = reader_schema != nullptr ? *reader_schema : file_schema;
  EDSP_RETURN_IF_ERROR(BindPredicate(predicate, bind_schema));

  std::map<std::string, Column> decoded;
  auto load = [&](const std::string& name) -> Status {
    if (decoded.contains(name)) return Ok();
    if (file_schema.FindField(name) != nullptr) {
      EDSP_ASSIGN_OR_RETURN(auto column, reader.ReadColumn(name));
      decoded.emplace(name, std::move(column));
      return Ok();
    }
    const Field* field = reader_schema != nullptr ? reader_schema->FindField(name) : nullptr;
    if (field == nullptr) {
      return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'", name);
    }
    decoded.emplace(name, Column::AllNull(field->type, reader.row_count()));
    return Ok();
  };
  for (const auto& name : columns) {
    if (file_schema.FindField(name) == nullptr &&
        (reader_schema == nullptr || reader_schema->FindField(name) == nullptr)) {
      return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'", name);
    }
  }

  const auto n = static_cast<size_t>(reader.row_count());
  std::vector<size_t> selection;
  if (predicate) {
    std::set<std::string> predicate_columns;
    CollectColumns(predicate, predicate_columns);
    std::unordered_map<std::string, const Column*> by_name;
    for (const auto& name : predicate_columns) {
      EDSP_RETURN_IF_ERROR(load(name));
      by_name[name] = &decoded.at(name);
    }
    for (size_t r = 0; r < n; ++r) {
      if (EvaluateRow(*predicate, by_name, r) == Truth::kTrue) selection.push_back(r);
    }
  } else {
    selection.resize(n);
    for (size_t r = 0; r < n; ++r) selection[r] = r;
  }

  std::vector<Row> rows;
  if (selection.empty()) return rows;
  std::vector<const Column*> output;
  for (const auto& name : columns) {
    EDSP_RETURN_IF_ERROR(load(name));
    output.push_back(&decoded.at(name));
  }
  rows.reserve(selection.size());
  for (size_t r : selection) {
    Row row;
    row.reserve(output.size());
    for (const Column* column : output) row.push_back(column->ValueAt(r));
    rows.push_back(std::move(row));
  }
  return rows;
}

Result<std::vector<Row>> ProjectRead(std::string_view bytes,
                                     const std::vector<std::string>& columns,
                                     const PredicatePtr& predicate,
                                     const Schema* reader_schema) {
  BufferSource source(bytes);
  return ProjectRead(source, columns, predicate, reader_schema);
}

}  // namespace edsp::ecf
