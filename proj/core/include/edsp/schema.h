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

/// \file edsp/schema.h

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/result.h"
#include "edsp/value.h"

namespace edsp {

struct Field {
  std::string name;
  DataType type = DataType::kInt64;
  bool nullable = false;

  friend bool operator==(const Field&, const Field&) = default;
};

/// An ordered list of uniquely named fields. Field names match
/// `[A-Za-z_][A-Za-z0-9_]*`.
class Schema {
 public:
  Schema() = default;

  /// Validates names and uniqueness.
  static Result<Schema> Make(std::vector<Field> fields, int32_t schema_id = 0);

  int32_t schema_id() const { return schema_id_; }
  const std::vector<Field>& fields() const { return fields_; }
  size_t num_fields() const { return fields_.size(); }
  const Field& field(size_t i) const { return fields_[i]; }

  /// Index of the named field, if present. Names are case-sensitive.
  std::optional<size_t> FieldIndex(std::string_view name) const;
  const Field* FindField(std::string_view name) const;

  /// A copy with one more nullable field and schema_id + 1.
  Result<Schema> AddColumn(std::string name, DataType type) const;

  /// Checks that a row has the right arity, types and nullability.
  Status ValidateRow(const Row& row) const;

  nlohmann::json ToJson() const;
  static Result<Schema> FromJson(const nlohmann::json& json);

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  Schema(std::vector<Field> fields, int32_t schema_id)
      : fields_(std::move(fields)), schema_id_(schema_id) {}

  std::vector<Field> fields_;
  int32_t schema_id_ = 0;
};

bool IsValidIdentifier(std::string_view name);

}  // namespace edsp
