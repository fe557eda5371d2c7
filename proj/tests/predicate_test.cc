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

#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "edsp/columnar_file.h"
#include "edsp/predicate.h"
#include "edsp/sql_engine.h"
#include "edsp/table_format.h"
#include "support/test_support.h"

namespace edsp {
namespace {

// Kleene truth tables, with UNKNOWN encoded as 1/2.
int Level(Truth t) { return t == Truth::kFalse ? 0 : t == Truth::kUnknown ? 1 : 2; }

TEST(PredicateTest, ThreeValuedConnectives) {
  const Truth all[] = {Truth::kFalse, Truth::kUnknown, Truth::kTrue};
  for (Truth a : all) {
    for (Truth b : all) {
      EXPECT_EQ(Level(And(a, b)), std::min(Level(a), Level(b)));
      EXPECT_EQ(Level(Or(a, b)), std::max(Level(a), Level(b)));
    }
  }
}

TEST(PredicateTest, SatisfiesOperators) {
  using std::weak_ordering;
  EXPECT_TRUE(Satisfies(CompareOp::kEq, weak_ordering::equivalent));
  EXPECT_FALSE(Satisfies(CompareOp::kNe, weak_ordering::equivalent));
  EXPECT_TRUE(Satisfies(CompareOp::kLt, weak_ordering::less));
  EXPECT_TRUE(Satisfies(CompareOp::kLe, weak_ordering::equivalent));
  EXPECT_FALSE(Satisfies(CompareOp::kGt, weak_ordering::equivalent));
  EXPECT_TRUE(Satisfies(CompareOp::kGe, weak_ordering::greater));
}

TEST(PredicateTest, ConjunctsFlattenNestedAnds) {
  auto a = Predicate::IsNull("a");
  auto b = Predicate::IsNull("b");
  auto c = Predicate::IsNull("c");
  auto d = Predicate::Or(a, b);
  auto tree = Predicate::And(Predicate::And(a, d), c);
  auto parts = Conjuncts(tree);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0], a);
  EXPECT_EQ(parts[1], d);
  EXPECT_EQ(parts[2], c);
  EXPECT_TRUE(Conjuncts(nullptr).empty());
  std::set<std::string> columns;
  CollectColumns(tree, columns);
  EXPECT_EQ(columns, (std::set<std::string>{"a", "b", "c"}));
}

TEST(PredicateTest, BindChecksColumnsAndTypes) {
  auto schema = *Schema::Make({{"i", DataType::kInt64, false},
                               {"f", DataType::kFloat64, true},
                               {"s", DataType::kString, true},
                               {"b", DataType::kBool, false}});
  EXPECT_TRUE(BindPredicate(Predicate::Compare("i", CompareOp::kLt, Value::Float64(2.5)), schema)
                  .has_value());
  EXPECT_TRUE(BindPredicate(Predicate::Compare("f", CompareOp::kEq, Value::Int64(2)), schema)
                  .has_value());
  EXPECT_EQ(BindPredicate(Predicate::Compare("s", CompareOp::kEq, Value::Int64(1)), schema)
                .error()
                .kind,
            ErrorKind::kTypeError);
  EXPECT_EQ(BindPredicate(Predicate::Compare("b", CompareOp::kEq, Value::String("x")), schema)
                .error()
                .kind,
            ErrorKind::kTypeError);
  EXPECT_EQ(BindPredicate(Predicate::IsNull("zz"), schema).error().kind,
            ErrorKind::kUnknownColumn);
  EXPECT_EQ(BindPredicate(Predicate::And(Predicate::Constant(true), Predicate::IsNull("zz")),
                          schema)
                .error()
                .kind,
            ErrorKind::kUnknownColumn);
  EXPECT_TRUE(BindPredicate(nullptr, schema).has_value());
}

// Rendering a predicate and parsing it back yields one that evaluates
// identically on every row.
TEST(PredicateTest, RenderParseRoundTripProperty) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Schema schema = testing::RandomSchema(rng);
    auto rows = testing::RandomRows(rng, schema, 30);
    auto predicate = testing::RandomPredicate(rng, schema, rows, 3);
    std::string text = predicate->ToString();
    auto parsed = ParsePredicate(text);
    ASSERT_TRUE(parsed.has_value()) << text << ": " << parsed.error().ToString();
    for (const Row& row : rows) {
      ASSERT_EQ(testing::NaiveEvaluate(**parsed, schema, row),
                testing::NaiveEvaluate(*predicate, schema, row))
          << text;
    }
  }
}

// Pruning is sound: a file excluded by a conjunct has no row for which that
// conjunct is TRUE.
TEST(PredicateTest, FileExclusionIsSoundProperty) {
  testing::Rng rng(12);
  int excluded = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    Schema schema = testing::RandomSchema(rng, 3);
    auto rows = testing::RandomRows(rng, schema, static_cast<size_t>(rng.Int(1, 12)));
    auto written = ecf::WriteFile(schema, rows);
    ASSERT_TRUE(written.has_value());
    ManifestEntry entry;
    entry.data_path = "data/x.ecf";
    entry.row_count = written->row_count;
    entry.stats = written->stats;
    auto sample = testing::RandomRows(rng, schema, 4);
    sample.insert(sample.end(), rows.begin(), rows.end());
    auto conjunct = testing::RandomPredicate(rng, schema, sample, 1);
    if (!ConjunctExcludesFile(entry, *conjunct)) continue;
    ++excluded;
    for (const Row& row : rows) {
      ASSERT_NE(testing::NaiveEvaluate(*conjunct, schema, row), Truth::kTrue)
          << conjunct->ToString();
    }
  }
  EXPECT_GT(excluded, 200);
}

TEST(PredicateTest, ExclusionUsesMinMaxAndNullCounts) {
  ManifestEntry entry;
  entry.row_count = 10;
  entry.stats["x"] = ecf::ColumnStats{Value::Int64(5), Value::Int64(9), 0};
  entry.stats["n"] = ecf::ColumnStats{std::nullopt, std::nullopt, 10};
  auto cmp = [](CompareOp op, Value v) { return Predicate::Compare("x", op, std::move(v)); };
  EXPECT_TRUE(ConjunctExcludesFile(entry, *cmp(CompareOp::kLt, Value::Int64(5))));
  EXPECT_FALSE(ConjunctExcludesFile(entry, *cmp(CompareOp::kLe, Value::Int64(5))));
  EXPECT_TRUE(ConjunctExcludesFile(entry, *cmp(CompareOp::kGt, Value::Float64(9.0))));
  EXPECT_FALSE(ConjunctExcludesFile(entry, *cmp(CompareOp::kGt, Value::Float64(8.5))));
  EXPECT_TRUE(ConjunctExcludesFile(entry, *cmp(CompareOp::kEq, Value::Int64(10))));
  EXPECT_FALSE(ConjunctExcludesFile(entry, *cmp(CompareOp::kNe, Value::Int64(10))));
  EXPECT_TRUE(ConjunctExcludesFile(entry, *Predicate::IsNull("x")));
  EXPECT_FALSE(ConjunctExcludesFile(entry, *Predicate::IsNotNull("x")));
  EXPECT_TRUE(ConjunctExcludesFile(entry, *Predicate::IsNotNull("n")));
  EXPECT_TRUE(ConjunctExcludesFile(
      entry, *Predicate::Compare("n", CompareOp::kEq, Value::String("a"))));
  // A column the file predates is entirely NULL there.
  EXPECT_TRUE(ConjunctExcludesFile(
      entry, *Predicate::Compare("later", CompareOp::kEq, Value::Int64(1))));
  EXPECT_FALSE(ConjunctExcludesFile(entry, *Predicate::IsNull("later")));
  EXPECT_TRUE(ConjunctExcludesFile(entry, *Predicate::Constant(false)));
  EXPECT_FALSE(ConjunctExcludesFile(entry, *Predicate::Constant(true)));
}

}  // namespace
}  // namespace edsp
