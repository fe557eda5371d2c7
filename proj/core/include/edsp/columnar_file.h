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

/// \file edsp/columnar_file.h
/// ECF v1: the columnar data-file codec.
///
/// Layout, little-endian throughout:
///
///     "ECF1"
///     u32 schema_length, schema JSON {"schema_id":N,"fields":[...]}
///     u64 row_count
///     per column in schema order:
///       [presence bitmap, ceil(rows/8) bytes, LSB-first]   (nullable only)
///       INT64 / FLOAT64: rows x 8 bytes
///       BOOL:            ceil(rows/8) bytes, LSB-first
///       STRING:          (rows + 1) u32 offsets, then the UTF-8 bytes
///     footer JSON {"row_count":N,"columns":{...},"crc32":C}
///     u32 footer_length
///     "ECF1"
///
/// `crc32` covers every byte before the footer. Null slots encode as zero or
/// empty. The footer is at a fixed distance from the end, so statistics are
/// available without decoding any column.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/object_store.h"
#include "edsp/predicate.h"
#include "edsp/result.h"
#include "edsp/schema.h"
#include "edsp/value.h"

namespace edsp::ecf {

inline constexpr std::string_view kMagic = "ECF1";
inline constexpr std::string_view kFileExtension = ".ecf";

/// Min/max/null statistics of one column. min and max are absent iff the
/// column has no non-null value.
struct ColumnStats {
  std::optional<Value> min;
  std::optional<Value> max;
  int64_t null_count = 0;

  nlohmann::json ToJson() const;
  static Result<ColumnStats> FromJson(const nlohmann::json& json, DataType type);

  friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

using StatsMap = std::map<std::string, ColumnStats>;

nlohmann::json StatsToJson(const StatsMap& stats);
Result<StatsMap> StatsFromJson(const nlohmann::json& json, const Schema& schema);

/// One decoded column. `validity` is empty for columns without nulls,
/// otherwise it holds one byte per row (1 = present).
struct Column {
  DataType type = DataType::kInt64;
  int64_t length = 0;
  std::vector<uint8_t> validity;
  std::vector<int64_t> int64_values;
  std::vector<double> float64_values;
  std::vector<uint8_t> bool_values;
  std::vector<std::string> string_values;

  bool IsNull(size_t row) const { return !validity.empty() && validity[row] == 0; }
  Value ValueAt(size_t row) const;

  static Column AllNull(DataType type, int64_t length);
};

ColumnStats ComputeStats(const Column& column);

struct WrittenFile {
  std::string bytes;
  StatsMap stats;
  int64_t row_count = 0;
};

/// Encodes rows. Fails with kTypeMismatch when a row does not conform to the
/// schema, kInvalidUtf8 for malformed strings and kInvalidArgument for NaN or
/// infinite FLOAT64 values.
Result<WrittenFile> WriteFile(const Schema& schema, std::span<const Row> rows);

struct DecodedFile {
  Schema schema;
  std::vector<Row> rows;
  StatsMap stats;
  int64_t row_count = 0;
};

/// Fully decodes and verifies a file: both magics, layout, checksum, and that
/// the footer statistics equal the statistics of the decoded values.
Result<DecodedFile> ReadFile(std::string_view bytes);

/// Random-access byte source with a running count of bytes fetched.
class RangeSource {
 public:
  virtual ~RangeSource() = default;
  virtual uint64_t size() const = 0;
  Result<std::string> Read(uint64_t offset, uint64_t length);
  uint64_t bytes_read() const { return bytes_read_; }

 protected:
  virtual Result<std::string> DoRead(uint64_t offset, uint64_t length) = 0;

 private:
  uint64_t bytes_read_ = 0;
};

class BufferSource final : public RangeSource {
 public:
  explicit BufferSource(std::string_view bytes) : bytes_(bytes) {}
  uint64_t size() const override { return bytes_.size(); }

 protected:
  Result<std::string> DoRead(uint64_t offset, uint64_t length) override;

 private:
  std::string_view bytes_;
};

/// Reads ranges of one blob directly from an object store.
class BlobSource final : public RangeSource {
 public:
  BlobSource(const ObjectStore& store, BlobKey key, uint64_t size)
      : store_(store), key_(std::move(key)), size_(size) {}
  uint64_t size() const override { return size_; }

 protected:
  Result<std::string> DoRead(uint64_t offset, uint64_t length) override;

 private:
  const ObjectStore& store_;
  BlobKey key_;
  uint64_t size_;
};

/// Lazily decodes individual columns. Open() reads only the head, the tail and
/// one 4-byte offset per STRING column to locate the column blocks.
class FileReader {
 public:
  static Result<FileReader> Open(RangeSource& source);

  const Schema& schema() const { return schema_; }
  int64_t row_count() const { return row_count_; }
  const StatsMap& stats() const { return stats_; }

  Result<Column> ReadColumn(size_t index);
  Result<Column> ReadColumn(std::string_view name);

  /// Reads every byte before the footer and checks the stored crc32.
  Status VerifyChecksum();

 private:
  struct Block {
    uint64_t offset = 0;
    uint64_t length = 0;
  };

  explicit FileReader(RangeSource& source) : source_(&source) {}

  RangeSource* source_;
  Schema schema_;
  int64_t row_count_ = 0;
  StatsMap stats_;
  uint32_t crc32_ = 0;
  uint64_t footer_offset_ = 0;
  std::vector<Block> blocks_;
};

/// Decodes the requested columns, keeping only rows for which `predicate`
/// evaluates to TRUE. Predicate columns are decoded first; when no row
/// qualifies the other blocks are never fetched.
///
/// With `reader_schema`, columns absent from the file (added by later schema
/// evolution) read as all-null; without it, requesting such a column is
/// kUnknownColumn. Output values follow the order of `columns`.
Result<std::vector<Row>> ProjectRead(RangeSource& source,
                                     const std::vector<std::string>& columns,
                                     const PredicatePtr& predicate,
                                     const Schema* reader_schema = nullptr);

Result<std::vector<Row>> ProjectRead(std::string_view bytes,
                                     const std::vector<std::string>& columns,
                                     const PredicatePtr& predicate,
                                     const Schema* reader_schema = nullptr);

}  // namespace edsp::ecf
