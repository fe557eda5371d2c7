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

/// \file edsp/value.h
/// Scalar column types and the nullable typed value used in rows and statistics.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edsp/result.h"

namespace edsp {

enum class DataType : uint8_t { kInt64, kFloat64, kBool, kString };

std::string_view ToString(DataType type);
Result<DataType> DataTypeFromString(std::string_view name);

inline bool IsNumeric(DataType type) {
  return type == DataType::kInt64 || type == DataType::kFloat64;
}

/// A nullable scalar. Default-constructed values are null.
class Value {
 public:
  using Storage = std::variant<std::monostate, int64_t, double, bool, std::string>;

  Value() = default;

  static Value Null() { return Value(); }
  static Value Int64(int64_t v) { return Value(Storage(std::in_place_index<1>, v)); }
  static Value Float64(double v) { return Value(Storage(std::in_place_index<2>, v)); }
  static Value Bool(bool v) { return Value(Storage(std::in_place_index<3>, v)); }
  static Value String(std::string v) {
    return Value(Storage(std::in_place_index<4>, std::move(v)));
  }

  bool is_null() const { return storage_.index() == 0; }
  /// Type of a non-null value. Undefined for null.
  DataType type() const { return static_cast<DataType>(storage_.index() - 1); }

  int64_t as_int64() const { return std::get<1>(storage_); }
  double as_float64() const { return std::get<2>(storage_); }
  bool as_bool() const { return std::get<3>(storage_); }
  const std::string& as_string() const { return std::get<4>(storage_); }

  const Storage& storage() const { return storage_; }

  /// Human-readable rendering; null renders as "NULL".
  std::string ToString() const;

  /// Exact equality: same type and same value. FLOAT64 compares with ==.
  friend bool operator==(const Value& lhs, const Value& rhs) = default;

 private:
  explicit Value(Storage storage) : storage_(std::move(storage)) {}

  Storage storage_;
};

using Row = std::vector<Value>;

/// Three-way comparison of two non-null values of comparable types. INT64 and
/// FLOAT64 compare numerically with each other; any other type pairing is an error.
Result<std::weak_ordering> CompareValues(const Value& lhs, const Value& rhs);

/// Exact numeric comparison of an integer with a double.
std::weak_ordering CompareInt64Float64(int64_t lhs, double rhs);

/// Total order used for sorting result rows: values order by type tag first
/// (INT64, FLOAT64, BOOL, STRING), then by value; nulls sort last.
std::weak_ordering TotalOrder(const Value& lhs, const Value& rhs);

/// True when the value can be stored in a column of the given type.
bool ValueFitsType(const Value& value, DataType type);

}  // namespace edsp
