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

#include "edsp/prep.h"

#include <string>
#include <unordered_map>
#include <vector>

#include "edsp/csv.h"

namespace edsp {

std::string_view ToString(IngestMode mode) {
  switch (mode) {
    case IngestMode::kCreate:
      return "create";
    case IngestMode::kAppend:
      return "append";
    case IngestMode::kOverwrite:
      return "overwrite";
  }
  return "unknown";
}

Result<IngestMode> IngestModeFromString(std::string_view text) {
  if (text == "create") return IngestMode::kCreate;
  if (text == "append") return IngestMode::kAppend;
  if (text == "overwrite") return IngestMode::kOverwrite;
  return InvalidArgument("unknown ingest mode '{}'", text);
}

namespace {

Result<std::vector<std::string>> ReadHeader(csv::Reader& reader) {
  csv::Record record;
  EDSP_ASSIGN_OR_RETURN(bool more, reader.Next(record));
  if (!more) {
    return MakeError(ErrorKind::kParseError, "line 1: missing header");
  }
  return std::move(record.fields);
}

struct ColumnEvidence {
  bool all_int = true;
  bool all_numeric = true;
  bool all_bool = true;
  bool any_empty = false;
};

}  // namespace

Result<Schema> InferSchema(const std::filesystem::path& csv_path) {
  EDSP_ASSIGN_OR_RETURN(auto reader, csv::Reader::Open(csv_path));
  EDSP_ASSIGN_OR_RETURN(auto header, ReadHeader(reader));
  std::vector<ColumnEvidence> evidence(header.size());

  csv::Record record;
  while (true) {
    EDSP_ASSIGN_OR_RETURN(bool more, reader.Next(record));
    if (!more) break;
    if (record.fields.size() != header.size()) {
      return MakeError(ErrorKind::kParseError, "line {}: expected {} fields, found {}",
                       record.line, header.size(), record.fields.size());
    }
    for (size_t i = 0; i < header.size(); ++i) {
      const std::string& text = record.fields[i];
      ColumnEvidence& e = evidence[i];
      if (text.empty() && !record.quoted[i]) {
        e.any_empty = true;
        continue;
      }
      if (record.quoted[i] && text.empty()) {
        e.all_int = e.all_numeric = e.all_bool = false;
        continue;
      }
      if (e.all_int && !csv::IsIntegerText(text)) e.all_int = false;
      if (e.all_numeric && !csv::IsNumericText(text)) e.all_numeric = false;
      if (e.all_bool && text != "true" && text != "false") e.all_bool = false;
    }
  }

  std::vector<Field> fields;
  fields.reserve(header.size());
  for (size_t i = 0; i < header.size(); ++i) {
    const ColumnEvidence& e = evidence[i];
    DataType type = e.all_int       ? DataType::kInt64
                    : e.all_numeric ? DataType::kFloat64
                    : e.all_bool    ? DataType::kBool
                                    : DataType::kString;
    fields.push_back(Field{header[i], type, e.any_empty});
  }
  return Schema::Make(std::move(fields));
}

Result<IngestResult> Ingest(ObjectStore& store, const IngestSpec& spec,
                            const CommitOptions& options) {
  if (spec.rows_per_file <= 0) {
    return InvalidArgument("rows_per_file must be positive");
  }
  const std::string& location = spec.target_location;

  Schema schema;
  int32_t expected_schema_id = 0;
  if (spec.mode == IngestMode::kCreate) {
    auto existing = ReadPointer(store, location);
    if (existing.has_value()) {
      return AlreadyExists("table already exists at '{}'", location);
    }
    if (existing.error().kind != ErrorKind::kNotFound) return existing.error();
    if (spec.schema.has_value()) {
      schema = *spec.schema;
    } else {
      EDSP_ASSIGN_OR_RETURN(schema, InferSchema(spec.source_csv));
    }
  } else {
    auto loaded = LoadTable(store, location);
    if (!loaded.has_value()) {
      if (loaded.error().kind == ErrorKind::kNotFound) {
        return NotFound("{} requires an existing table at '{}'", ToString(spec.mode),
                        location);
      }
      return loaded.error();
    }
    schema = loaded->schema;
    if (spec.schema.has_value() && spec.schema->fields() != schema.fields()) {
      return MakeError(ErrorKind::kSchemaMismatch,
                       "supplied schema does not match the table schema");
    }
  }
  expected_schema_id = schema.schema_id();

  EDSP_ASSIGN_OR_RETURN(auto reader, csv::Reader::Open(spec.source_csv));
  EDSP_ASSIGN_OR_RETURN(auto header, ReadHeader(reader));

  // Map CSV columns to schema positions by name.
  std::vector<size_t> target(header.size());
  std::vector<bool> covered(schema.num_fields(), false);
  for (size_t i = 0; i < header.size(); ++i) {
    auto index = schema.FieldIndex(header[i]);
    if (!index.has_value()) {
      return MakeError(ErrorKind::kSchemaMismatch, "CSV column '{}' is not in the schema",
                       header[i]);
    }
    if (covered[*index]) {
      return MakeError(ErrorKind::kParseError, "line 1: duplicate header '{}'", header[i]);
    }
    covered[*index] = true;
    target[i] = *index;
  }
  for (size_t f = 0; f < schema.num_fields(); ++f) {
    if (!covered[f] && !schema.field(f).nullable) {
      return MakeError(ErrorKind::kSchemaMismatch,
                       "required column '{}' is missing from the CSV",
                       schema.field(f).name);
    }
  }

  IngestResult result;
  std::vector<ManifestEntry> entries;
  std::vector<Row> chunk;
  chunk.reserve(static_cast<size_t>(std::min<int64_t>(spec.rows_per_file, 1 << 16)));
  auto flush = [&]() -> Status {
    if (chunk.empty()) return Ok();
    EDSP_ASSIGN_OR_RETURN(auto entry, WriteDataFile(store, location, schema, chunk));
    entries.push_back(std::move(entry));
    chunk.clear();
    return Ok();
  };

  csv::Record record;
  while (true) {
    EDSP_ASSIGN_OR_RETURN(bool more, reader.Next(record));
    if (!more) break;
    if (record.fields.size() != header.size()) {
      return MakeError(ErrorKind::kParseError, "line {}: expected {} fields, found {}",
                       record.line, header.size(), record.fields.size());
    }
    Row row(schema.num_fields());
    for (size_t i = 0; i < header.size(); ++i) {
      const Field& field = schema.field(target[i]);
      auto value = csv::ParseField(record.fields[i], record.quoted[i], field.type);
      if (!value.has_value()) {
        return MakeError(value.error().kind, "line {}, column '{}': {}", record.line,
                         field.name, value.error().message);
      }
      if (value->is_null() && !field.nullable) {
        return MakeError(ErrorKind::kSchemaMismatch,
                         "line {}: NULL in non-nullable column '{}'", record.line,
                         field.name);
      }
      row[target[i]] = std::move(value).value();
    }
    chunk.push_back(std::move(row));
    ++result.rows;
    if (static_cast<int64_t>(chunk.size()) == spec.rows_per_file) {
      EDSP_RETURN_IF_ERROR(flush());
    }
  }
  EDSP_RETURN_IF_ERROR(flush());
  result.files = static_cast<int64_t>(entries.size());

  if (spec.mode == IngestMode::kCreate) {
    EDSP_RETURN_IF_ERROR(CreateTable(store, location, schema));
  }
  if (result.rows == 0 && spec.mode != IngestMode::kOverwrite) {
    return result;
  }
  SnapshotOperation op = spec.mode == IngestMode::kOverwrite ? SnapshotOperation::kOverwrite
                                                             : SnapshotOperation::kAppend;
  EDSP_ASSIGN_OR_RETURN(result.snapshot,
                        Commit(store, location, op, std::move(entries), expected_schema_id,
                               options, &result.commit));
  return result;
}

}  // namespace edsp
