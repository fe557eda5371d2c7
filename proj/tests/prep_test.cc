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

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "edsp/prep.h"
#include "edsp/util.h"
#include "support/test_support.h"

namespace edsp {
namespace {

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

class PrepTest : public ::testing::Test {
 protected:
  void SetUp() override { store_ = testing::OpenLocalStore(dir_.path() / "store"); }

  std::filesystem::path Csv(const std::string& name, const std::string& text) {
    auto path = dir_.path() / name;
    WriteText(path, text);
    return path;
  }

  IngestSpec Spec(const std::filesystem::path& csv, IngestMode mode = IngestMode::kCreate) {
    IngestSpec spec;
    spec.source_csv = csv;
    spec.target_location = "tables/t";
    spec.mode = mode;
    return spec;
  }

  testing::TempDir dir_;
  std::unique_ptr<LocalObjectStore> store_;
};

TEST_F(PrepTest, InferSchemaPicksNarrowestType) {
  auto path = Csv("a.csv",
                  "i,f,b,s,n,q\n"
                  "1,1.5,true,x,,\"\"\n"
                  "-2,3,false,1,,1\n"
                  "3,,TRUE,y,,2\n");
  auto schema = InferSchema(path);
  ASSERT_TRUE(schema.has_value()) << schema.error().ToString();
  ASSERT_EQ(schema->num_fields(), 6u);
  EXPECT_EQ(schema->field(0), (Field{"i", DataType::kInt64, false}));
  EXPECT_EQ(schema->field(1), (Field{"f", DataType::kFloat64, true}));
  // `TRUE` is not a boolean literal in this dialect.
  EXPECT_EQ(schema->field(2).type, DataType::kString);
  EXPECT_EQ(schema->field(3).type, DataType::kString);
  EXPECT_TRUE(schema->field(4).nullable);
  // A quoted empty string is text, not a missing number.
  EXPECT_EQ(schema->field(5), (Field{"q", DataType::kString, false}));
}

TEST_F(PrepTest, InferSchemaRejectsBadHeaders) {
  EXPECT_FALSE(InferSchema(Csv("dup.csv", "a,a\n1,2\n")).has_value());
  EXPECT_FALSE(InferSchema(Csv("bad.csv", "a,b c\n1,2\n")).has_value());
  EXPECT_FALSE(InferSchema(Csv("empty.csv", "")).has_value());
  EXPECT_FALSE(InferSchema(dir_.path() / "absent.csv").has_value());
}

TEST_F(PrepTest, CreateSplitsIntoFilesInInputOrder) {
  testing::Rng rng(4);
  auto schema = *Schema::Make({{"id", DataType::kInt64, false},
                               {"s", DataType::kString, true},
                               {"f", DataType::kFloat64, true},
                               {"b", DataType::kBool, true}});
  auto rows = testing::RandomRows(rng, schema, 25);
  for (size_t i = 0; i < rows.size(); ++i) rows[i][0] = Value::Int64(static_cast<int64_t>(i));
  auto path = dir_.path() / "r.csv";
  testing::WriteCsv(path, schema, rows);
  auto spec = Spec(path);
  spec.schema = schema;
  spec.rows_per_file = 10;
  auto result = Ingest(*store_, spec);
  ASSERT_TRUE(result.has_value()) << result.error().ToString();
  EXPECT_EQ(result->rows, 25);
  EXPECT_EQ(result->files, 3);
  ASSERT_TRUE(result->snapshot.has_value());
  EXPECT_EQ(result->snapshot->sequence, 1);
  EXPECT_EQ(result->commit.metadata_version, 2);
  EXPECT_TRUE(testing::BitEqualRows(testing::ReadTableNaive(*store_, "tables/t"), rows));
  EXPECT_EQ(Ingest(*store_, spec).error().kind, ErrorKind::kAlreadyExists);
}

TEST_F(PrepTest, InferredCreateThenAppendAndOverwrite) {
  auto first = Csv("1.csv", "k,name\n1,a\n2,\n");
  auto result = Ingest(*store_, Spec(first));
  ASSERT_TRUE(result.has_value()) << result.error().ToString();
  auto table = LoadTable(*store_, "tables/t");
  EXPECT_EQ(table->schema.field(1), (Field{"name", DataType::kString, true}));

  // Columns may arrive in any order; absent nullable columns read as NULL.
  auto second = Csv("2.csv", "name,k\n\"c,d\",3\n");
  ASSERT_TRUE(Ingest(*store_, Spec(second, IngestMode::kAppend)).has_value());
  auto third = Csv("3.csv", "k\n4\n");
  ASSERT_TRUE(Ingest(*store_, Spec(third, IngestMode::kAppend)).has_value());
  auto rows = testing::ReadTableNaive(*store_, "tables/t");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2], (Row{Value::Int64(3), Value::String("c,d")}));
  EXPECT_EQ(rows[3], (Row{Value::Int64(4), Value::Null()}));

  auto overwrite = Ingest(*store_, Spec(Csv("4.csv", "k,name\n9,z\n"), IngestMode::kOverwrite));
  ASSERT_TRUE(overwrite.has_value());
  EXPECT_EQ(overwrite->snapshot->sequence, 4);
  EXPECT_EQ(testing::ReadTableNaive(*store_, "tables/t"),
            (std::vector<Row>{{Value::Int64(9), Value::String("z")}}));
}

TEST_F(PrepTest, RejectsMismatchedInput) {
  ASSERT_TRUE(Ingest(*store_, Spec(Csv("1.csv", "k,name\n1,a\n"))).has_value());
  auto append = [&](const std::string& text) {
    return Ingest(*store_, Spec(Csv("x.csv", text), IngestMode::kAppend));
  };
  EXPECT_EQ(append("k,other\n1,a\n").error().kind, ErrorKind::kSchemaMismatch);
  EXPECT_EQ(append("name\na\n").error().kind, ErrorKind::kSchemaMismatch);
  EXPECT_EQ(append("k,name\n,a\n").error().kind, ErrorKind::kSchemaMismatch);
  EXPECT_EQ(append("k,name\nx,a\n").error().kind, ErrorKind::kParseError);
  EXPECT_EQ(append("k,k\n1,2\n").error().kind, ErrorKind::kParseError);
  EXPECT_EQ(append("k,name\n1\n").error().kind, ErrorKind::kParseError);
  auto missing = Spec(Csv("y.csv", "k\n1\n"), IngestMode::kAppend);
  missing.target_location = "tables/none";
  EXPECT_EQ(Ingest(*store_, missing).error().kind, ErrorKind::kNotFound);
  // Failed ingests leave the table as it was.
  EXPECT_EQ(LoadTable(*store_, "tables/t")->snapshot->sequence, 1);
}

TEST_F(PrepTest, ZeroRowIngests) {
  auto empty = Csv("e.csv", "k,name\n");
  auto schema = *Schema::Make({{"k", DataType::kInt64, false}, {"name", DataType::kString, true}});
  auto create = Spec(empty);
  create.schema = schema;
  auto created = Ingest(*store_, create);
  ASSERT_TRUE(created.has_value()) << created.error().ToString();
  EXPECT_FALSE(created->snapshot.has_value());
  EXPECT_FALSE(LoadTable(*store_, "tables/t")->snapshot.has_value());

  auto appended = Ingest(*store_, Spec(empty, IngestMode::kAppend));
  ASSERT_TRUE(appended.has_value());
  EXPECT_FALSE(appended->snapshot.has_value());

  ASSERT_TRUE(Ingest(*store_, Spec(Csv("r.csv", "k,name\n1,a\n"), IngestMode::kAppend))
                  .has_value());
  auto truncated = Ingest(*store_, Spec(empty, IngestMode::kOverwrite));
  ASSERT_TRUE(truncated.has_value());
  ASSERT_TRUE(truncated->snapshot.has_value());
  EXPECT_EQ(truncated->snapshot->total_rows, 0);
  EXPECT_TRUE(testing::ReadTableNaive(*store_, "tables/t").empty());
}

TEST(IngestModeTest, Names) {
  for (auto mode : {IngestMode::kCreate, IngestMode::kAppend, IngestMode::kOverwrite}) {
    EXPECT_EQ(*IngestModeFromString(ToString(mode)), mode);
  }
  EXPECT_FALSE(IngestModeFromString("upsert").has_value());
}

std::vector<Row> Generate(const PoiGenSpec& spec) {
  std::vector<Row> rows;
  auto status = GeneratePoi(spec, [&](Row&& row) -> Status {
    rows.push_back(std::move(row));
    return Ok();
  });
  EXPECT_TRUE(status.has_value());
  return rows;
}

TEST(PoiGeneratorTest, DistributionProperties) {
  PoiGenSpec spec;
  spec.rows = 100000;
  auto rows = Generate(spec);
  ASSERT_EQ(rows.size(), 100000u);
  auto schema = PoiSchema();
  ASSERT_EQ(schema.num_fields(), 8u);
  std::map<std::string, int64_t> prefectures;
  std::map<std::string, int64_t> categories;
  int64_t null_ratings = 0;
  std::string previous;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    ASSERT_TRUE(schema.ValidateRow(row).has_value());
    EXPECT_EQ(row[0].as_int64(), static_cast<int64_t>(i) + 1);
    const std::string& p = row[2].as_string();
    EXPECT_LE(previous, p);
    previous = p;
    ++prefectures[p];
    ++categories[row[3].as_string()];
    if (row[6].is_null()) {
      ++null_ratings;
    } else {
      EXPECT_GE(row[6].as_float64(), 0.0);
      EXPECT_LE(row[6].as_float64(), 5.0);
    }
    EXPECT_GE(row[4].as_float64(), 24.0);
    EXPECT_LE(row[4].as_float64(), 46.0);
    EXPECT_GE(row[5].as_float64(), 123.0);
    EXPECT_LE(row[5].as_float64(), 146.0);
  }
  EXPECT_EQ(prefectures["P31"], 2100);
  EXPECT_EQ(prefectures.size(), 47u);
  EXPECT_EQ(categories.size(), 100u);
  for (const auto& [code, count] : categories) {
    EXPECT_NEAR(static_cast<double>(count), 1000.0, 100.0) << code;
  }
  EXPECT_NEAR(static_cast<double>(null_ratings), 5000.0, 500.0);
  EXPECT_EQ(PrefectureCode(0), "P01");
  EXPECT_EQ(CategoryCode(7), "C007");
}

TEST(PoiGeneratorTest, DeterministicPerSeed) {
  PoiGenSpec spec;
  spec.rows = 5000;
  auto a = Generate(spec);
  auto b = Generate(spec);
  EXPECT_TRUE(testing::BitEqualRows(a, b));
  spec.seed = 43;
  EXPECT_FALSE(testing::BitEqualRows(a, Generate(spec)));
  spec.cluster_by_prefecture = false;
  spec.seed = 42;
  auto unclustered = Generate(spec);
  int64_t target = 0;
  bool sorted = true;
  for (size_t i = 0; i < unclustered.size(); ++i) {
    if (unclustered[i][2].as_string() == "P31") ++target;
    if (i > 0 && unclustered[i - 1][2].as_string() > unclustered[i][2].as_string()) {
      sorted = false;
    }
  }
  EXPECT_EQ(target, 105);
  EXPECT_FALSE(sorted);
}

TEST(PoiGeneratorTest, CsvIngestsToIdenticalRows) {
  testing::TempDir dir;
  PoiGenSpec spec;
  spec.rows = 3000;
  auto csv_path = dir.path() / "poi.csv";
  ASSERT_TRUE(WritePoiCsv(spec, csv_path).has_value());
  auto inferred = InferSchema(csv_path);
  ASSERT_TRUE(inferred.has_value());
  EXPECT_EQ(inferred->fields(), PoiSchema().fields());
  auto store = testing::OpenLocalStore(dir.path() / "store");
  IngestSpec ingest;
  ingest.source_csv = csv_path;
  ingest.target_location = "poi";
  ingest.rows_per_file = 1000;
  auto result = Ingest(*store, ingest);
  ASSERT_TRUE(result.has_value()) << result.error().ToString();
  EXPECT_EQ(result->files, 3);
  EXPECT_TRUE(testing::BitEqualRows(testing::ReadTableNaive(*store, "poi"), Generate(spec)));
}

}  // namespace
}  // namespace edsp
