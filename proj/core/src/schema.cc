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

#include "edsp/schema.h"

#include <set>

#include <nlohmann/json.hpp>

namespace edsp {

bool IsValidIdentifier(std::string_view name) {
  if (name.empty()) return false;
  auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!is_alpha(name.front())) return false;
  for (char c : name) {
    if (!is_alpha(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

Result<Schema> Schema::Make(std::vector<Field> fields, int32_t schema_id) {
  if (schema_id < 0) {
    return InvalidArgument("schema_id must be non-negative, got {}", schema_id);
  }
  std::set<std::string_view> seen;
  for (const auto& field : fields) {
    if (!IsValidIdentifier(field.name)) {
      return InvalidArgument("invalid field name '{}'", field.name);
    }
    if (!seen.insert(field.name).second) {
      return MakeError(ErrorKind::kDuplicateColumn, "duplicate field name '{}'",
                       field.name);
    }
  }
  return Schema(std::move(fields), schema_id);
}

std::optional<size_t> Schema::FieldIndex(std::string_view name) const {
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) return i;
  }
  return std::nullopt;
}

const Field* Schema::FindField(std::string_view name) const {
  auto index = FieldIndex(name);
  return index ? &fields_[*index] : nullptr;
}

Result<Schema> Schema::AddColumn(std::string name, DataType type) const {
  if (FindField(name) != nullptr) {
    return MakeError(ErrorKind::kDuplicateColumn, "column '{}' already exists", name);
  }
  auto fields = fields_;
  fields.push_back(Field{std::move(name), type, /*nullable=*/true});
  return Make(std::move(fields), schema_id_ + 1);
}

Status Schema::ValidateRow(const Row& row) const {
  if (row.size() != fields_.size()) {
    return TypeMismatch("row has {} values, schema has {} fields", row.size(),
                        fields_.size());
  }
  for (size_t i = 0; i < row.size(); ++i) {
    const auto& field = fields_[i];
    if (row[i].is_null()) {
      if (!field.nullable) {
        return TypeMismatch("NULL in non-nullable column '{}'", field.name);
      }
      continue;
    }
    if (row[i].type() != field.type) {
      return TypeMismatch("column '{}' expects {}, got {}", field.name,
                          ToString(field.type), ToString(row[i].type()));
    }
  }
  return Ok();
}

nlohmann::json Schema::ToJson() const {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& field : fields_) {
    fields.push_back({{"name", field.name},
                      {"type", std::string(ToString(field.type))},
                      {"nullable", field.nullable}});
  }
  return {{"schema_id", schema_id_}, {"fields", std::move(fields)}};
}

Result<Schema> Schema::FromJson(const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("fields") || !json["fields"].is_array()) {
    return InvalidArgument("schema JSON must be an object with a 'fields' array");
  }
  int32_t schema_id = 0;
  if (json.contains("schema_id")) {
    if (!json["schema_id"].is_number_integer()) {
      return InvalidArgument("schema_id must be an integer");
    }
    schema_id = json["schema_id"].get<int32_t>();
  }
  std::vector<Field> fields;
  for (const auto& item : json["fields"]) {
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string() ||
        !item.contains("type") || !item["type"].is_string()) {
      return InvalidArgument("malformed schema field");
    }
    Field field;
    field.name = item["name"].get<std::string>();
    EDSP_ASSIGN_OR_RETURN(field.type, DataTypeFromString(item["type"].get<std::string>()));
    if (item.contains("nullable")) {
      if (!item["nullable"].is_boolean()) {
        return InvalidArgument("field 'nullable' must be a boolean");
      }
      field.nullable = item["nullable"].get<bool>();
    }
    fields.push_back(std::move(field));
  }
  return Make(std::move(fields), schema_id);
}

}  // namespace edsp
