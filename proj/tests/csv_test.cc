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

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "edsp/csv.h"
#include "support/test_support.h"

namespace edsp {
namespace {

std::vector<csv::Record> ParseAll(const std::string& text) {
  std::istringstream in(text);
  csv::Reader reader(in);
  std::vector<csv::Record> out;
  csv::Record record;
  while (true) {
    auto next = reader.Next(record);
    EXPECT_TRUE(next.has_value()) << next.error().ToString();
    if (!next.has_value() || !*next) break;
    out.push_back(record);
  }
  return out;
}

Error ParseError(const std::string& text) {
  std::istringstream in(text);
  csv::Reader reader(in);
  csv::Record record;
  while (true) {
    auto next = reader.Next(record);
    if (!next.has_value()) return next.error();
    if (!*next) return Error{ErrorKind::kInternal, "no error"};
  }
}

TEST(CsvTest, QuotingAndLineEndings) {
  auto records = ParseAll("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\n,\"\",\"multi\nline\"\n");
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].fields, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(records[1].fields, (std::vector<std::string>{"1", "x,y", "say \"hi\""}));
  EXPECT_EQ(records[2].fields, (std::vector<std::string>{"", "", "multi\nline"}));
  EXPECT_EQ(records[2].quoted, (std::vector<bool>{false, true, true}));
  EXPECT_EQ(records[2].line, 3);
}

TEST(CsvTest, FinalLineWithoutNewline) {
  auto records = ParseAll("a\n1");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].fields[0], "1");
}

TEST(CsvTest, MalformedInputReportsLine) {
  auto e = ParseError("a,b\n1,\"open\n");
  EXPECT_EQ(e.kind, ErrorKind::kParseError);
  EXPECT_NE(e.message.find("line 2"), std::string::npos) << e.message;
  EXPECT_EQ(ParseError("a\n\"x\"y\n").kind, ErrorKind::kParseError);
  EXPECT_EQ(ParseError("a\nx\"y\n").kind, ErrorKind::kParseError);
  EXPECT_EQ(ParseError("a\rb\n").kind, ErrorKind::kParseError);
}

// Writing then reading any field list reproduces it exactly.
TEST(CsvTest, WriteReadRoundTripProperty) {
  testing::Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::vector<std::string>> rows;
    size_t width = static_cast<size_t>(rng.Int(1, 5));
    std::ostringstream out;
    for (int r = 0; r < rng.Int(1, 6); ++r) {
      std::vector<std::string> fields;
      for (size_t c = 0; c < width; ++c) {
        std::string text = rng.Text(6);
        text.erase(std::remove(text.begin(), text.end(), '\0'), text.end());
        fields.push_back(text);
      }
      std::vector<std::string> quoted;
      for (const auto& f : fields) quoted.push_back(csv::QuoteField(f));
      csv::WriteRecord(out, quoted);
      rows.push_back(fields);
    }
    auto records = ParseAll(out.str());
    ASSERT_EQ(records.size(), rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      ASSERT_EQ(records[r].fields, rows[r]) << out.str();
      for (size_t c = 0; c < width; ++c) {
        // Empty strings are quoted so they do not read back as NULL.
        if (rows[r][c].empty()) {
          EXPECT_TRUE(records[r].quoted[c]);
        }
      }
    }
  }
}

TEST(CsvTest, ParseFieldByType) {
  EXPECT_TRUE(csv::ParseField("", false, DataType::kInt64)->is_null());
  EXPECT_EQ(*csv::ParseField("", true, DataType::kString), Value::String(""));
  EXPECT_EQ(*csv::ParseField("-42", false, DataType::kInt64), Value::Int64(-42));
  EXPECT_EQ(*csv::ParseField("9223372036854775807", false, DataType::kInt64),
            Value::Int64(INT64_MAX));
  EXPECT_FALSE(csv::ParseField("9223372036854775808", false, DataType::kInt64).has_value());
  EXPECT_FALSE(csv::ParseField("1.5", false, DataType::kInt64).has_value());
  EXPECT_EQ(*csv::ParseField("1.5e3", false, DataType::kFloat64), Value::Float64(1500));
  EXPECT_EQ(*csv::ParseField("7", false, DataType::kFloat64), Value::Float64(7));
  EXPECT_FALSE(csv::ParseField("inf", false, DataType::kFloat64).has_value());
  EXPECT_FALSE(csv::ParseField("nan", false, DataType::kFloat64).has_value());
  EXPECT_EQ(*csv::ParseField("true", false, DataType::kBool), Value::Bool(true));
  EXPECT_FALSE(csv::ParseField("yes", false, DataType::kBool).has_value());
  EXPECT_EQ(csv::ParseField("\xff", true, DataType::kString).error().kind,
            ErrorKind::kInvalidUtf8);
  EXPECT_TRUE(csv::IsIntegerText("-12"));
  EXPECT_FALSE(csv::IsIntegerText("1e3"));
  EXPECT_TRUE(csv::IsNumericText("1e3"));
  EXPECT_FALSE(csv::IsNumericText("abc"));
}

TEST(CsvTest, FormatValueRoundTripsThroughParse) {
  testing::Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    Field field{"x", static_cast<DataType>(rng.Int(0, 3)), true};
    Value v = testing::RandomValue(rng, field);
    std::string text = csv::FormatValue(v);
    std::ostringstream out;
    csv::WriteRecord(out, {text});
    auto records = ParseAll(out.str());
    ASSERT_EQ(records.size(), 1u);
    auto back = csv::ParseField(records[0].fields[0], records[0].quoted[0], field.type);
    ASSERT_TRUE(back.has_value()) << text;
    EXPECT_TRUE(testing::BitEqual(*back, v)) << text;
  }
}

}  // namespace
}  // namespace edsp
