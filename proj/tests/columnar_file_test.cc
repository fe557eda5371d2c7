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

#include <zlib.h>

#include <cstring>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "edsp/columnar_file.h"
#include "support/test_support.h"

namespace edsp {
namespace {

using nlohmann::json;

void AppendLe(std::string& out, uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string AppendBits(const std::vector<bool>& bits) {
  std::string out((bits.size() + 7) / 8, '\0');
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] = static_cast<char>(out[i / 8] | (1 << (i % 8)));
  }
  return out;
}

// Byte layout written out by hand, independent of the library encoder.
std::string OracleBody(const Schema& schema, const std::vector<Row>& rows) {
  std::string out = "ECF1";
  json fields = json::array();
  for (const Field& f : schema.fields()) {
    fields.push_back(
        {{"name", f.name}, {"type", std::string(ToString(f.type))}, {"nullable", f.nullable}});
  }
  std::string schema_json = json{{"schema_id", schema.schema_id()}, {"fields", fields}}.dump();
  AppendLe(out, schema_json.size(), 4);
  out += schema_json;
  AppendLe(out, rows.size(), 8);
  for (size_t c = 0; c < schema.num_fields(); ++c) {
    const Field& f = schema.field(c);
    if (f.nullable) {
      std::vector<bool> present;
      for (const Row& row : rows) present.push_back(!row[c].is_null());
      out += AppendBits(present);
    }
    switch (f.type) {
      case DataType::kInt64:
        for (const Row& row : rows) {
          AppendLe(out, row[c].is_null() ? 0 : static_cast<uint64_t>(row[c].as_int64()), 8);
        }
        break;
      case DataType::kFloat64:
        for (const Row& row : rows) {
          uint64_t bits = 0;
          if (!row[c].is_null()) {
            double d = row[c].as_float64();
            std::memcpy(&bits, &d, 8);
          }
          AppendLe(out, bits, 8);
        }
        break;
      case DataType::kBool: {
        std::vector<bool> values;
        for (const Row& row : rows) values.push_back(!row[c].is_null() && row[c].as_bool());
        out += AppendBits(values);
        break;
      }
      case DataType::kString: {
        uint64_t total = 0;
        AppendLe(out, 0, 4);
        for (const Row& row : rows) {
          if (!row[c].is_null()) total += row[c].as_string().size();
          AppendLe(out, total, 4);
        }
        for (const Row& row : rows) {
          if (!row[c].is_null()) out += row[c].as_string();
        }
        break;
      }
    }
  }
  return out;
}

ecf::StatsMap OracleStats(const Schema& schema, const std::vector<Row>& rows) {
  ecf::StatsMap stats;
  for (size_t c = 0; c < schema.num_fields(); ++c) {
    ecf::ColumnStats s;
    for (const Row& row : rows) {
      const Value& v = row[c];
      if (v.is_null()) {
        ++s.null_count;
        continue;
      }
      if (!s.min || TotalOrder(v, *s.min) < 0) s.min = v;
      if (!s.max || TotalOrder(v, *s.max) > 0) s.max = v;
    }
    stats[schema.field(c).name] = s;
  }
  return stats;
}

uint32_t ZlibCrc(std::string_view bytes) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

// Splits a file into body and footer using only the trailer.
std::pair<std::string, json> SplitFile(const std::string& bytes) {
  EXPECT_EQ(bytes.substr(bytes.size() - 4), "ECF1");
  uint32_t footer_length = 0;
  for (int i = 0; i < 4; ++i) {
    footer_length |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[bytes.size() - 8 + i]))
                     << (8 * i);
  }
  size_t footer_start = bytes.size() - 8 - footer_length;
  return {bytes.substr(0, footer_start),
          json::parse(bytes.substr(footer_start, footer_length))};
}

Schema FixtureSchema() {
  return *Schema::Make({{"id", DataType::kInt64, false},
                        {"score", DataType::kFloat64, true},
                        {"flag", DataType::kBool, false},
                        {"name", DataType::kString, true}});
}

std::vector<Row> FixtureRows() {
  return {
      {Value::Int64(1), Value::Float64(2.5), Value::Bool(true), Value::String("ab")},
      {Value::Int64(-2), Value::Null(), Value::Bool(false), Value::Null()},
      {Value::Int64(300), Value::Float64(-0.0), Value::Bool(true), Value::String("東")},
  };
}

TEST(ColumnarFileTest, HandBuiltFixture) {
  // Body bytes for the fixture, spelled out field by field.
  std::string expected = "ECF1";
  std::string schema_json =
      R"({"fields":[{"name":"id","nullable":false,"type":"INT64"},)"
      R"({"name":"score","nullable":true,"type":"FLOAT64"},)"
      R"({"name":"flag","nullable":false,"type":"BOOL"},)"
      R"({"name":"name","nullable":true,"type":"STRING"}],"schema_id":0})";
  AppendLe(expected, schema_json.size(), 4);
  expected += schema_json;
  AppendLe(expected, 3, 8);
  AppendLe(expected, 1, 8);
  AppendLe(expected, static_cast<uint64_t>(int64_t{-2}), 8);
  AppendLe(expected, 300, 8);
  expected.push_back(static_cast<char>(0b101));  // score presence
  AppendLe(expected, 0x4004000000000000ull, 8);  // 2.5
  AppendLe(expected, 0, 8);
  AppendLe(expected, 0x8000000000000000ull, 8);  // -0.0
  expected.push_back(static_cast<char>(0b101));  // flag values
  expected.push_back(static_cast<char>(0b101));  // name presence
  for (uint32_t off : {0u, 2u, 2u, 5u}) AppendLe(expected, off, 4);
  expected += "ab東";

  auto written = ecf::WriteFile(FixtureSchema(), FixtureRows());
  ASSERT_TRUE(written.has_value()) << written.error().ToString();
  auto [body, footer] = SplitFile(written->bytes);
  EXPECT_EQ(body, expected);
  EXPECT_EQ(footer["row_count"], 3);
  EXPECT_EQ(footer["crc32"].get<uint32_t>(), ZlibCrc(expected));
  EXPECT_EQ(footer["columns"]["id"], json({{"min", -2}, {"max", 300}, {"null_count", 0}}));
  EXPECT_EQ(footer["columns"]["name"],
            json({{"min", "ab"}, {"max", "東"}, {"null_count", 1}}));
  EXPECT_EQ(footer["columns"]["flag"],
            json({{"min", false}, {"max", true}, {"null_count", 0}}));
  EXPECT_EQ(footer["columns"]["score"]["null_count"], 1);
  EXPECT_EQ(footer["columns"]["score"]["max"], 2.5);

  auto decoded = ecf::ReadFile(written->bytes);
  ASSERT_TRUE(decoded.has_value()) << decoded.error().ToString();
  EXPECT_TRUE(testing::BitEqualRows(decoded->rows, FixtureRows()));
}

TEST(ColumnarFileTest, AllNullColumnHasNoMinMax) {
  auto schema = *Schema::Make({{"x", DataType::kString, true}});
  std::vector<Row> rows = {{Value::Null()}, {Value::Null()}};
  auto written = ecf::WriteFile(schema, rows);
  ASSERT_TRUE(written.has_value());
  auto [body, footer] = SplitFile(written->bytes);
  EXPECT_EQ(footer["columns"]["x"], json({{"null_count", 2}}));
  EXPECT_FALSE(written->stats["x"].min.has_value());
  auto decoded = ecf::ReadFile(written->bytes);
  ASSERT_TRUE(decoded.has_value());
  EXPECT_TRUE(testing::BitEqualRows(decoded->rows, rows));
}

TEST(ColumnarFileTest, ZeroRowFile) {
  auto schema = FixtureSchema();
  auto written = ecf::WriteFile(schema, {});
  ASSERT_TRUE(written.has_value());
  auto [body, footer] = SplitFile(written->bytes);
  EXPECT_EQ(body, OracleBody(schema, {}));
  auto decoded = ecf::ReadFile(written->bytes);
  ASSERT_TRUE(decoded.has_value());
  EXPECT_EQ(decoded->row_count, 0);
  EXPECT_TRUE(decoded->rows.empty());
}

TEST(ColumnarFileTest, RejectsInvalidRows) {
  auto schema = FixtureSchema();
  std::vector<Row> wrong_type = {
      {Value::String("1"), Value::Null(), Value::Bool(true), Value::Null()}};
  EXPECT_EQ(ecf::WriteFile(schema, wrong_type).error().kind, ErrorKind::kTypeMismatch);
  std::vector<Row> null_required = {
      {Value::Null(), Value::Null(), Value::Bool(true), Value::Null()}};
  EXPECT_EQ(ecf::WriteFile(schema, null_required).error().kind, ErrorKind::kTypeMismatch);
  std::vector<Row> bad_utf8 = {
      {Value::Int64(1), Value::Null(), Value::Bool(true), Value::String("\xff")}};
  EXPECT_EQ(ecf::WriteFile(schema, bad_utf8).error().kind, ErrorKind::kInvalidUtf8);
  std::vector<Row> nan = {{Value::Int64(1), Value::Float64(std::nan("")), Value::Bool(true),
                           Value::Null()}};
  EXPECT_EQ(ecf::WriteFile(schema, nan).error().kind, ErrorKind::kInvalidArgument);
  std::vector<Row> inf = {{Value::Int64(1), Value::Float64(INFINITY), Value::Bool(true),
                           Value::Null()}};
  EXPECT_EQ(ecf::WriteFile(schema, inf).error().kind, ErrorKind::kInvalidArgument);
}

// Random schemas and rows: the encoder matches the hand-written layout, decoding
// is bit-exact, statistics match a direct computation, and re-encoding the
// decoded rows reproduces the same bytes.
TEST(ColumnarFileTest, RandomRoundTripProperty) {
  testing::Rng rng(20240501);
  for (int trial = 0; trial < 1000; ++trial) {
    Schema schema = testing::RandomSchema(rng);
    size_t n = static_cast<size_t>(rng.Chance(0.1) ? 0 : rng.Int(1, 70));
    auto rows = testing::RandomRows(rng, schema, n);
    auto written = ecf::WriteFile(schema, rows);
    ASSERT_TRUE(written.has_value()) << written.error().ToString();
    auto [body, footer] = SplitFile(written->bytes);
    ASSERT_EQ(body, OracleBody(schema, rows)) << "trial " << trial;
    ASSERT_EQ(footer["crc32"].get<uint32_t>(), ZlibCrc(body));
    ASSERT_EQ(written->stats, OracleStats(schema, rows)) << "trial " << trial;

    auto decoded = ecf::ReadFile(written->bytes);
    ASSERT_TRUE(decoded.has_value()) << decoded.error().ToString();
    ASSERT_EQ(decoded->schema, schema);
    ASSERT_TRUE(testing::BitEqualRows(decoded->rows, rows)) << "trial " << trial;
    ASSERT_EQ(decoded->stats, written->stats);

    auto again = ecf::WriteFile(decoded->schema, decoded->rows);
    ASSERT_TRUE(again.has_value());
    ASSERT_EQ(again->bytes, written->bytes) << "trial " << trial;
  }
}

// Single-byte corruptions anywhere in a file are reported as errors.
TEST(ColumnarFileTest, CorruptionsAreDetected) {
  testing::Rng rng(99);
  int corruptions = 0;
  while (corruptions < 100) {
    Schema schema = testing::RandomSchema(rng);
    auto rows = testing::RandomRows(rng, schema, static_cast<size_t>(rng.Int(1, 40)));
    auto written = ecf::WriteFile(schema, rows);
    ASSERT_TRUE(written.has_value());
    for (int k = 0; k < 10; ++k, ++corruptions) {
      std::string bytes = written->bytes;
      size_t pos = static_cast<size_t>(rng.Int(0, static_cast<int64_t>(bytes.size()) - 1));
      auto flip = static_cast<char>(rng.Int(1, 255));
      bytes[pos] = static_cast<char>(bytes[pos] ^ flip);
      auto decoded = ecf::ReadFile(bytes);
      EXPECT_FALSE(decoded.has_value()) << "byte " << pos << " of " << bytes.size();
    }
  }
}

TEST(ColumnarFileTest, StructuralErrors) {
  auto written = ecf::WriteFile(FixtureSchema(), FixtureRows());
  ASSERT_TRUE(written.has_value());
  const std::string& bytes = written->bytes;
  EXPECT_EQ(ecf::ReadFile("").error().kind, ErrorKind::kTruncatedFile);
  EXPECT_EQ(ecf::ReadFile("XCF1" + bytes.substr(4)).error().kind, ErrorKind::kBadMagic);
  EXPECT_EQ(ecf::ReadFile(bytes.substr(0, bytes.size() - 1) + "X").error().kind,
            ErrorKind::kBadMagic);
  EXPECT_FALSE(ecf::ReadFile(bytes.substr(0, bytes.size() / 2)).has_value());
  EXPECT_FALSE(ecf::ReadFile(bytes + "x").has_value());
}

TEST(ColumnarFileTest, FooterStatisticsMustMatchData) {
  auto written = ecf::WriteFile(FixtureSchema(), FixtureRows());
  ASSERT_TRUE(written.has_value());
  auto [body, footer] = SplitFile(written->bytes);
  footer["columns"]["id"]["max"] = 301;
  std::string footer_json = footer.dump();
  std::string forged = body + footer_json;
  AppendLe(forged, footer_json.size(), 4);
  forged += "ECF1";
  EXPECT_EQ(ecf::ReadFile(forged).error().kind, ErrorKind::kFooterMismatch);

  auto [body2, footer2] = SplitFile(written->bytes);
  footer2["crc32"] = footer2["crc32"].get<uint32_t>() ^ 1u;
  footer_json = footer2.dump();
  forged = body2 + footer_json;
  AppendLe(forged, footer_json.size(), 4);
  forged += "ECF1";
  EXPECT_EQ(ecf::ReadFile(forged).error().kind, ErrorKind::kChecksumMismatch);
}

// ProjectRead equals a full decode followed by filtering and projection.
TEST(ColumnarFileTest, ProjectReadMatchesFullDecode) {
  testing::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Schema schema = testing::RandomSchema(rng);
    auto rows = testing::RandomRows(rng, schema, static_cast<size_t>(rng.Int(0, 50)));
    auto written = ecf::WriteFile(schema, rows);
    ASSERT_TRUE(written.has_value());

    std::vector<std::string> columns;
    std::vector<size_t> indexes;
    for (size_t i = 0; i < schema.num_fields(); ++i) {
      if (rng.Chance(0.6)) {
        columns.push_back(schema.field(i).name);
        indexes.push_back(i);
      }
    }
    PredicatePtr predicate;
    if (rng.Chance(0.7)) {
      const Field& f = schema.field(static_cast<size_t>(rng.Int(0, schema.num_fields() - 1)));
      if (rng.Chance(0.2)) {
        predicate = Predicate::IsNull(f.name);
      } else {
        Value literal = testing::RandomValue(rng, Field{f.name, f.type, false});
        if (!rows.empty() && rng.Chance(0.5)) {
          const Value& existing = rows[static_cast<size_t>(rng.Int(0, rows.size() - 1))]
                                      [*schema.FieldIndex(f.name)];
          if (!existing.is_null()) literal = existing;
        }
        predicate = Predicate::Compare(f.name, static_cast<CompareOp>(rng.Int(0, 5)), literal);
      }
    }
    auto projected = ecf::ProjectRead(written->bytes, columns, predicate);
    ASSERT_TRUE(projected.has_value()) << projected.error().ToString();
    std::vector<Row> expected;
    for (const Row& row : testing::NaiveFilter(rows, schema, predicate)) {
      Row out;
      for (size_t i : indexes) out.push_back(row[i]);
      expected.push_back(std::move(out));
    }
    ASSERT_TRUE(testing::BitEqualRows(*projected, expected)) << "trial " << trial;
  }
}

TEST(ColumnarFileTest, ProjectionReadsFewerBytes) {
  auto schema = *Schema::Make({{"k", DataType::kInt64, false},
                               {"wide", DataType::kString, false},
                               {"v", DataType::kFloat64, false}});
  std::vector<Row> rows;
  for (int i = 0; i < 2000; ++i) {
    rows.push_back({Value::Int64(i), Value::String(std::string(50, 'w')), Value::Float64(i)});
  }
  auto written = ecf::WriteFile(schema, rows);
  ASSERT_TRUE(written.has_value());

  ecf::BufferSource full(written->bytes);
  ASSERT_TRUE(ecf::ProjectRead(full, {"k", "wide", "v"}, nullptr).has_value());
  ecf::BufferSource narrow(written->bytes);
  auto out = ecf::ProjectRead(narrow, {"k"}, nullptr);
  ASSERT_TRUE(out.has_value());
  EXPECT_EQ(out->size(), 2000u);
  EXPECT_LT(narrow.bytes_read() * 5, full.bytes_read());

  // No row qualifies, so the other columns are never fetched.
  ecf::BufferSource skipped(written->bytes);
  auto none = ecf::ProjectRead(skipped, {"k", "wide", "v"},
                               Predicate::Compare("k", CompareOp::kLt, Value::Int64(-1)));
  ASSERT_TRUE(none.has_value());
  EXPECT_TRUE(none->empty());
  EXPECT_LT(skipped.bytes_read() * 5, full.bytes_read());
}

TEST(ColumnarFileTest, ReaderSchemaFillsMissingColumns) {
  auto schema = *Schema::Make({{"a", DataType::kInt64, false}});
  std::vector<Row> rows = {{Value::Int64(1)}, {Value::Int64(2)}};
  auto written = ecf::WriteFile(schema, rows);
  ASSERT_TRUE(written.has_value());
  auto reader_schema = *schema.AddColumn("b", DataType::kString);
  auto out = ecf::ProjectRead(written->bytes, {"b", "a"}, nullptr, &reader_schema);
  ASSERT_TRUE(out.has_value());
  EXPECT_EQ(*out, (std::vector<Row>{{Value::Null(), Value::Int64(1)},
                                    {Value::Null(), Value::Int64(2)}}));
  EXPECT_EQ(ecf::ProjectRead(written->bytes, {"b"}, nullptr).error().kind,
            ErrorKind::kUnknownColumn);
  // A predicate on the missing column sees NULL everywhere.
  auto filtered = ecf::ProjectRead(written->bytes, {"a"}, Predicate::IsNull("b"),
                                   &reader_schema);
  ASSERT_TRUE(filtered.has_value());
  EXPECT_EQ(filtered->size(), 2u);
}

TEST(ColumnarFileTest, FileReaderOpensWithoutDecodingColumns) {
  auto schema = *Schema::Make({{"k", DataType::kInt64, false},
                               {"s", DataType::kString, false}});
  std::vector<Row> rows;
  for (int i = 0; i < 5000; ++i) rows.push_back({Value::Int64(i), Value::String("xxxxxxxx")});
  auto written = ecf::WriteFile(schema, rows);
  ASSERT_TRUE(written.has_value());
  ecf::BufferSource source(written->bytes);
  auto reader = ecf::FileReader::Open(source);
  ASSERT_TRUE(reader.has_value());
  EXPECT_EQ(reader->row_count(), 5000);
  EXPECT_EQ(reader->stats().at("k").max, Value::Int64(4999));
  EXPECT_LT(source.bytes_read(), 1000u);
  auto column = reader->ReadColumn("s");
  ASSERT_TRUE(column.has_value());
  EXPECT_EQ(column->string_values[4999], "xxxxxxxx");
  EXPECT_TRUE(reader->VerifyChecksum().has_value());
  EXPECT_EQ(reader->ReadColumn("nope").error().kind, ErrorKind::kUnknownColumn);
}

}  // namespace
}  // namespace edsp
