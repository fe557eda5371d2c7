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

#include "edsp/value.h"

#include <charconv>
#include <cmath>

namespace edsp {

std::string_view ToString(DataType type) {
  switch (type) {
    case DataType::kInt64:
      return "INT64";
    case DataType::kFloat64:
      return "FLOAT64";
    case DataType::kBool:
      return "BOOL";
    case DataType::kString:
      return "STRING";
  }
  return "?";
}

Result<DataType> DataTypeFromString(std::string_view name) {
  if (name == "INT64") return DataType::kInt64;
  if (name == "FLOAT64") return DataType::kFloat64;
  if (name == "BOOL") return DataType::kBool;
  if (name == "STRING") return DataType::kString;
  return InvalidArgument("unknown type '{}'", name);
}

std::string Value::ToString() const {
  switch (storage_.index()) {
    case 0:
      return "NULL";
    case 1:
      return std::to_string(as_int64());
    case 2: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), as_float64());
      return std::string(buf, end);
    }
    case 3:
      return as_bool() ? "true" : "false";
    default:
      return as_string();
  }
}

std::weak_ordering CompareInt64Float64(int64_t lhs, double rhs) {
  // x86-64 long double carries a 64-bit mantissa, so both conversions are exact.
  static_assert(std::numeric_limits<long double>::digits >= 64);
  auto l = static_cast<long double>(lhs);
  auto r = static_cast<long double>(rhs);
  if (l < r) return std::weak_ordering::less;
  if (l > r) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

namespace {

template <typename T>
std::weak_ordering Order(const T& lhs, const T& rhs) {
  if (lhs < rhs) return std::weak_ordering::less;
  if (rhs < lhs) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

}  // namespace

Result<std::weak_ordering> CompareValues(const Value& lhs, const Value& rhs) {
  if (lhs.is_null() || rhs.is_null()) {
    return InvalidArgument("cannot compare NULL");
  }
  DataType lt = lhs.type();
  DataType rt = rhs.type();
  if (lt == DataType::kInt64 && rt == DataType::kInt64) {
    return Order(lhs.as_int64(), rhs.as_int64());
  }
  if (lt == DataType::kFloat64 && rt == DataType::kFloat64) {
    return Order(lhs.as_float64(), rhs.as_float64());
  }
  if (lt == DataType::kInt64 && rt == DataType::kFloat64) {
    return CompareInt64Float64(lhs.as_int64(), rhs.as_float64());
  }
  if (lt == DataType::kFloat64 && rt == DataType::kInt64) {
    return 0 <=> CompareInt64Float64(rhs.as_int64(), lhs.as_float64());
  }
  if (lt == DataType::kBool && rt == DataType::kBool) {
    return Order(lhs.as_bool(), rhs.as_bool());
  }
  if (lt == DataType::kString && rt == DataType::kString) {
    // std::string compares by unsigned char, i.e. UTF-8 byte order.
    return Order(lhs.as_string(), rhs.as_string());
  }
  return MakeError(ErrorKind::kTypeError, "cannot compare {} with {}", ToString(lt),
                   ToString(rt));
}

std::weak_ordering TotalOrder(const Value& lhs, const Value& rhs) {
  if (lhs.is_null() || rhs.is_null()) {
    if (lhs.is_null() && rhs.is_null()) return std::weak_ordering::equivalent;
    return lhs.is_null() ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (lhs.type() != rhs.type()) {
    return Order(static_cast<int>(lhs.type()), static_cast<int>(rhs.type()));
  }
  return CompareValues(lhs, rhs).value();
}

bool ValueFitsType(const Value& value, DataType type) {
  return value.is_null() || value.type() == type;
}

}  // namespace edsp
