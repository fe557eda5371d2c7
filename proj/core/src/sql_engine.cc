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
#include <chrono>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "edsp/columnar_file.h"
#include "edsp/csv.h"
#include "edsp/sql_engine.h"

namespace edsp {

nlohmann::json ValueToJson(const Value& value) {
  if (value.is_null()) return nullptr;
  switch (value.type()) {
    case DataType::kInt64:
      return value.as_int64();
    case DataType::kFloat64:
      return value.as_float64();
    case DataType::kBool:
      return value.as_bool();
    case DataType::kString:
      return value.as_string();
  }
  return nullptr;
}

Result<Value> ValueFromJson(const nlohmann::json& json, DataType type) {
  if (json.is_null()) return Value::Null();
  switch (type) {
    case DataType::kInt64:
      if (json.is_number_integer()) return Value::Int64(json.get<int64_t>());
      break;
    case DataType::kFloat64:
      if (json.is_number()) return Value::Float64(json.get<double>());
      break;
    case DataType::kBool:
      if (json.is_boolean()) return Value::Bool(json.get<bool>());
      break;
    case DataType::kString:
      if (json.is_string()) return Value::String(json.get<std::string>());
      break;
  }
  return InvalidArgument("JSON value {} is not a {}", json.dump(), ToString(type));
}

nlohmann::json QueryResult::ToJson(bool with_counters) const {
  nlohmann::json json;
  json["columns"] = columns;
  auto& types_json = json["types"] = nlohmann::json::array();
  for (DataType type : types) types_json.push_back(std::string(ToString(type)));
  auto& rows_json = json["rows"] = nlohmann::json::array();
  for (const Row& row : rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const Value& value : row) out.push_back(ValueToJson(value));
    rows_json.push_back(std::move(out));
  }
  if (with_counters) json["counters"] = counters.ToJson();
  return json;
}

Result<QueryResult> QueryResult::FromJson(const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("columns") || !json.contains("types") ||
      !json.contains("rows")) {
    return InvalidArgument("query result needs columns, types and rows");
  }
  QueryResult result;
  try {
    result.columns = json.at("columns").get<std::vector<std::string>>();
    for (const auto& type : json.at("types")) {
      EDSP_ASSIGN_OR_RETURN(auto parsed, DataTypeFromString(type.get<std::string>()));
      result.types.push_back(parsed);
    }
    if (result.types.size() != result.columns.size()) {
      return InvalidArgument("query result has {} columns but {} types",
                             result.columns.size(), result.types.size());
    }
    for (const auto& row_json : json.at("rows")) {
      if (!row_json.is_array() || row_json.size() != result.columns.size()) {
        return InvalidArgument("query result row has the wrong arity");
      }
      Row row;
      for (size_t i = 0; i < row_json.size(); ++i) {
        EDSP_ASSIGN_OR_RETURN(auto value, ValueFromJson(row_json[i], result.types[i]));
        row.push_back(std::move(value));
      }
      result.rows.push_back(std::move(row));
    }
    if (json.contains("counters")) {
      const auto& c = json.at("counters");
      result.counters.files_considered = c.value("files_considered", int64_t{0});
      result.counters.files_pruned = c.value("files_pruned", int64_t{0});
      result.counters.data_bytes_read = c.value("data_bytes_read", int64_t{0});
      result.counters.rows_scanned = c.value("rows_scanned", int64_t{0});
      result.counters.wall_time_ms = c.value("wall_time_ms", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    return InvalidArgument("malformed query result: {}", e.what());
  }
  return result;
}

std::string QueryResult::ToCsv() const {
  std::ostringstream out;
  std::vector<std::string> fields;
  for (const auto& name : columns) fields.push_back(csv::QuoteField(name));
  csv::WriteRecord(out, fields);
  for (const Row& row : rows) {
    fields.clear();
    for (const Value& value : row) fields.push_back(csv::FormatValue(value));
    csv::WriteRecord(out, fields);
  }
  return out.str();
}

bool MapResolver::Add(std::string name, std::string location) {
  return tables_.emplace(std::move(name), std::move(location)).second;
}

bool MapResolver::Contains(std::string_view name) const {
  return tables_.find(name) != tables_.end();
}

Result<std::string> MapResolver::Resolve(std::string_view name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) {
    return MakeError(ErrorKind::kUnknownTable, "unknown table '{}'", name);
  }
  return it->second;
}

namespace {

std::weak_ordering FromDoubles(double lhs, double rhs) {
  if (lhs < rhs) return std::weak_ordering::less;
  if (lhs > rhs) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

std::weak_ordering Reverse(std::weak_ordering ordering) {
  if (ordering < 0) return std::weak_ordering::greater;
  if (ordering > 0) return std::weak_ordering::less;
  return ordering;
}

// Compares a non-null cell with a literal of a bound-compatible type.
std::weak_ordering CompareCell(const ecf::Column& column, size_t row,
                               const Value& literal) {
  switch (column.type) {
    case DataType::kInt64: {
      int64_t v = column.int64_values[row];
      if (literal.type() == DataType::kInt64) return v <=> literal.as_int64();
      return CompareInt64Float64(v, literal.as_float64());
    }
    case DataType::kFloat64: {
      double v = column.float64_values[row];
      if (literal.type() == DataType::kFloat64) return FromDoubles(v, literal.as_float64());
      return Reverse(CompareInt64Float64(literal.as_int64(), v));
    }
    case DataType::kBool:
      return static_cast<bool>(column.bool_values[row]) <=> literal.as_bool();
    case DataType::kString: {
      int c = column.string_values[row].compare(literal.as_string());
      return c < 0 ? std::weak_ordering::less
                   : c > 0 ? std::weak_ordering::greater : std::weak_ordering::equivalent;
    }
  }
  return std::weak_ordering::equivalent;
}

struct BoundNode {
  Predicate::Kind kind = Predicate::Kind::kConstant;
  bool constant = true;
  size_t column = 0;
  CompareOp op = CompareOp::kEq;
  Value literal;
  std::unique_ptr<BoundNode> left;
  std::unique_ptr<BoundNode> right;
};

std::unique_ptr<BoundNode> Bind(const Predicate& p,
                                const std::vector<std::string>& column_names) {
  auto node = std::make_unique<BoundNode>();
  node->kind = p.kind();
  node->constant = p.constant();
  node->op = p.op();
  node->literal = p.literal();
  if (p.kind() == Predicate::Kind::kCompare || p.kind() == Predicate::Kind::kIsNull ||
      p.kind() == Predicate::Kind::kIsNotNull) {
    node->column = static_cast<size_t>(
        std::find(column_names.begin(), column_names.end(), p.column()) -
        column_names.begin());
  }
  if (p.left()) node->left = Bind(*p.left(), column_names);
  if (p.right()) node->right = Bind(*p.right(), column_names);
  return node;
}

Truth Evaluate(const BoundNode& node, const std::vector<ecf::Column>& columns,
               size_t row) {
  switch (node.kind) {
    case Predicate::Kind::kConstant:
      return node.constant ? Truth::kTrue : Truth::kFalse;
    case Predicate::Kind::kIsNull:
      return columns[node.column].IsNull(row) ? Truth::kTrue : Truth::kFalse;
    case Predicate::Kind::kIsNotNull:
      return columns[node.column].IsNull(row) ? Truth::kFalse : Truth::kTrue;
    case Predicate::Kind::kCompare: {
      const ecf::Column& column = columns[node.column];
      if (column.IsNull(row)) return Truth::kUnknown;
      return Satisfies(node.op, CompareCell(column, row, node.literal)) ? Truth::kTrue
                                                                       : Truth::kFalse;
    }
    case Predicate::Kind::kAnd: {
      Truth lhs = Evaluate(*node.left, columns, row);
      if (lhs == Truth::kFalse) return lhs;
      return And(lhs, Evaluate(*node.right, columns, row));
    }
    case Predicate::Kind::kOr: {
      Truth lhs = Evaluate(*node.left, columns, row);
      if (lhs == Truth::kTrue) return lhs;
      return Or(lhs, Evaluate(*node.right, columns, row));
    }
  }
  return Truth::kUnknown;
}

struct RowHash {
  size_t operator()(const Row& row) const {
    size_t h = 0x9e3779b97f4a7c15ULL;
    for (const Value& value : row) {
      h ^= std::hash<Value::Storage>{}(value.storage()) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
    }
    return h;
  }
};

bool RowLess(const Row& lhs, const Row& rhs) {
  for (size_t i = 0; i < lhs.size() && i < rhs.size(); ++i) {
    auto c = TotalOrder(lhs[i], rhs[i]);
    if (c != 0) return c < 0;
  }
  return lhs.size() < rhs.size();
}

struct Accumulator {
  int64_t count = 0;
  int64_t int_sum = 0;
  double float_sum = 0;
  long double avg_sum = 0;
  Value min;
  Value max;
};

struct AggregateSpec {
  AggregateFn fn = AggregateFn::kCount;
  /// Index into the decoded columns; absent for COUNT(*).
  std::optional<size_t> input;
  DataType input_type = DataType::kInt64;
};

Status Accumulate(const AggregateSpec& spec, Accumulator& acc,
                  const std::vector<ecf::Column>& columns, size_t row) {
  if (!spec.input.has_value()) {
    ++acc.count;
    return Ok();
  }
  const ecf::Column& column = columns[*spec.input];
  if (column.IsNull(row)) return Ok();
  ++acc.count;
  switch (spec.fn) {
    case AggregateFn::kCount:
      break;
    case AggregateFn::kSum:
      if (column.type == DataType::kInt64) {
        if (__builtin_add_overflow(acc.int_sum, column.int64_values[row], &acc.int_sum)) {
          return MakeError(ErrorKind::kInt64Overflow, "SUM overflows INT64");
        }
      } else {
        acc.float_sum += column.float64_values[row];
      }
      break;
    case AggregateFn::kAvg:
      acc.avg_sum += column.type == DataType::kInt64
                         ? static_cast<long double>(column.int64_values[row])
                         : static_cast<long double>(column.float64_values[row]);
      break;
    case AggregateFn::kMin:
    case AggregateFn::kMax: {
      Value value = column.ValueAt(row);
      Value& slot = spec.fn == AggregateFn::kMin ? acc.min : acc.max;
      if (slot.is_null()) {
        slot = std::move(value);
      } else {
        auto c = TotalOrder(value, slot);
        if (spec.fn == AggregateFn::kMin ? c < 0 : c > 0) slot = std::move(value);
      }
      break;
    }
  }
  return Ok();
}

Value Finish(const AggregateSpec& spec, const Accumulator& acc) {
  switch (spec.fn) {
    case AggregateFn::kCount:
      return Value::Int64(acc.count);
    case AggregateFn::kSum:
      if (acc.count == 0) return Value::Null();
      return spec.input_type == DataType::kInt64 ? Value::Int64(acc.int_sum)
                                                 : Value::Float64(acc.float_sum);
    case AggregateFn::kAvg:
      if (acc.count == 0) return Value::Null();
      return Value::Float64(static_cast<double>(acc.avg_sum / acc.count));
    case AggregateFn::kMin:
      return acc.min;
    case AggregateFn::kMax:
      return acc.max;
  }
  return Value::Null();
}

DataType ResultType(const AggregateSpec& spec) {
  switch (spec.fn) {
    case AggregateFn::kCount:
      return DataType::kInt64;
    case AggregateFn::kAvg:
      return DataType::kFloat64;
    default:
      return spec.input_type;
  }
}

}  // namespace

Result<QueryResult> ExecuteSelect(const ObjectStore& store, std::string_view location,
                                  const SelectStatement& statement,
                                  const ExecOptions& options) {
  auto started = std::chrono::steady_clock::now();
  auto loaded = LoadTable(store, location, options.as_of);
  if (!loaded.has_value()) {
    if (loaded.error().kind == ErrorKind::kNotFound) {
      return MakeError(ErrorKind::kUnknownTable, "no table at '{}': {}", location,
                       loaded.error().message);
    }
    return loaded.error();
  }
  LoadedTable table = std::move(loaded).value();
  const Schema& schema = table.schema;

  auto require_column = [&](const std::string& name) -> Result<const Field*> {
    const Field* field = schema.FindField(name);
    if (field == nullptr) {
      return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'", name);
    }
    return field;
  };

  // Columns decoded per file, predicate columns first.
  std::vector<std::string> needed;
  auto need = [&](const std::string& name) -> size_t {
    auto it = std::find(needed.begin(), needed.end(), name);
    if (it != needed.end()) return static_cast<size_t>(it - needed.begin());
    needed.push_back(name);
    return needed.size() - 1;
  };

  if (statement.where) {
    EDSP_RETURN_IF_ERROR(BindPredicate(statement.where, schema));
    std::set<std::string> names;
    CollectColumns(statement.where, names);
    for (const auto& name : names) need(name);
  }
  const size_t predicate_columns = needed.size();

  bool aggregate = !statement.group_by.empty();
  for (const auto& item : statement.items) {
    if (item.kind == SelectItem::Kind::kAggregate) aggregate = true;
  }

  QueryResult result;
  std::vector<size_t> projection;
  std::vector<size_t> group_inputs;
  std::vector<AggregateSpec> aggregates;
  // For each output column: group key position, or aggregate position.
  std::vector<std::pair<bool, size_t>> output_map;

  if (!aggregate) {
    for (const auto& item : statement.items) {
      if (item.kind == SelectItem::Kind::kStar) {
        for (const Field& field : schema.fields()) {
          projection.push_back(need(field.name));
          result.columns.push_back(field.name);
          result.types.push_back(field.type);
        }
      } else {
        EDSP_ASSIGN_OR_RETURN(const Field* field, require_column(item.column));
        projection.push_back(need(field->name));
        result.columns.push_back(item.OutputName());
        result.types.push_back(field->type);
      }
    }
  } else {
    for (const auto& name : statement.group_by) {
      EDSP_ASSIGN_OR_RETURN(const Field* field, require_column(name));
      group_inputs.push_back(need(field->name));
    }
    for (const auto& item : statement.items) {
      switch (item.kind) {
        case SelectItem::Kind::kStar:
          return InvalidArgument("SELECT * cannot be combined with aggregation");
        case SelectItem::Kind::kColumn: {
          EDSP_ASSIGN_OR_RETURN(const Field* field, require_column(item.column));
          auto it = std::find(statement.group_by.begin(), statement.group_by.end(),
                              item.column);
          if (it == statement.group_by.end()) {
            return InvalidArgument("column '{}' must appear in GROUP BY", item.column);
          }
          output_map.emplace_back(true, static_cast<size_t>(it - statement.group_by.begin()));
          result.columns.push_back(item.column);
          result.types.push_back(field->type);
          break;
        }
        case SelectItem::Kind::kAggregate: {
          AggregateSpec spec;
          spec.fn = item.fn;
          if (!item.column.empty()) {
            EDSP_ASSIGN_OR_RETURN(const Field* field, require_column(item.column));
            if ((item.fn == AggregateFn::kSum || item.fn == AggregateFn::kAvg) &&
                !IsNumeric(field->type)) {
              return MakeError(ErrorKind::kTypeError, "{} needs a numeric column, '{}' is {}",
                               ToString(item.fn), field->name, ToString(field->type));
            }
            spec.input = need(field->name);
            spec.input_type = field->type;
          }
          output_map.emplace_back(false, aggregates.size());
          result.columns.push_back(item.OutputName());
          result.types.push_back(ResultType(spec));
          aggregates.push_back(spec);
          break;
        }
      }
    }
  }

  EDSP_ASSIGN_OR_RETURN(auto plan, PlanScan(store, table, statement.where, options.prune));
  result.counters.files_considered = plan.files_considered;
  result.counters.files_pruned = plan.files_pruned;

  std::unique_ptr<BoundNode> filter;
  if (statement.where) filter = Bind(*statement.where, needed);

  std::unordered_map<Row, size_t, RowHash> group_index;
  std::vector<Row> group_keys;
  std::vector<std::vector<Accumulator>> group_accs;
  if (aggregate && statement.group_by.empty()) {
    group_index.emplace(Row{}, 0);
    group_keys.emplace_back();
    group_accs.emplace_back(aggregates.size());
  }
  const int64_t limit = statement.limit.value_or(std::numeric_limits<int64_t>::max());

  std::vector<ecf::Column> columns(needed.size());
  std::vector<uint32_t> selection;
  for (const ManifestEntry& entry : plan.files) {
    EDSP_ASSIGN_OR_RETURN(auto blob_key, BlobKey::Make(entry.data_path));
    ecf::BlobSource source(store, std::move(blob_key), static_cast<uint64_t>(entry.file_size));
    auto decode = [&](size_t i, ecf::FileReader& reader) -> Status {
      const Field* field = schema.FindField(needed[i]);
      if (reader.schema().FieldIndex(needed[i]).has_value()) {
        EDSP_ASSIGN_OR_RETURN(columns[i], reader.ReadColumn(needed[i]));
      } else {
        columns[i] = ecf::Column::AllNull(field->type, reader.row_count());
      }
      return Ok();
    };
    auto opened = ecf::FileReader::Open(source);
    if (!opened.has_value()) {
      return MakeError(opened.error().kind, "{}: {}", entry.data_path,
                       opened.error().message);
    }
    ecf::FileReader& reader = *opened;
    const auto rows = static_cast<size_t>(reader.row_count());
    result.counters.rows_scanned += reader.row_count();

    for (size_t i = 0; i < predicate_columns; ++i) EDSP_RETURN_IF_ERROR(decode(i, reader));
    selection.clear();
    for (size_t r = 0; r < rows; ++r) {
      if (!filter || Evaluate(*filter, columns, r) == Truth::kTrue) {
        selection.push_back(static_cast<uint32_t>(r));
      }
    }
    if (selection.empty()) {
      result.counters.data_bytes_read += static_cast<int64_t>(source.bytes_read());
      continue;
    }
    for (size_t i = predicate_columns; i < needed.size(); ++i) {
      EDSP_RETURN_IF_ERROR(decode(i, reader));
    }
    result.counters.data_bytes_read += static_cast<int64_t>(source.bytes_read());

    if (!aggregate) {
      for (uint32_t r : selection) {
        if (static_cast<int64_t>(result.rows.size()) >= limit) break;
        Row row;
        row.reserve(projection.size());
        for (size_t c : projection) row.push_back(columns[c].ValueAt(r));
        result.rows.push_back(std::move(row));
      }
      continue;
    }
    Row key;
    for (uint32_t r : selection) {
      key.clear();
      for (size_t c : group_inputs) key.push_back(columns[c].ValueAt(r));
      auto [it, inserted] = group_index.try_emplace(key, group_keys.size());
      if (inserted) {
        group_keys.push_back(key);
        group_accs.emplace_back(aggregates.size());
      }
      auto& accs = group_accs[it->second];
      for (size_t a = 0; a < aggregates.size(); ++a) {
        EDSP_RETURN_IF_ERROR(Accumulate(aggregates[a], accs[a], columns, r));
      }
    }
  }

  if (aggregate) {
    std::vector<size_t> order(group_keys.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return RowLess(group_keys[a], group_keys[b]); });
    for (size_t g : order) {
      if (static_cast<int64_t>(result.rows.size()) >= limit) break;
      Row row;
      for (const auto& [is_key, index] : output_map) {
        row.push_back(is_key ? group_keys[g][index]
                             : Finish(aggregates[index], group_accs[g][index]));
      }
      result.rows.push_back(std::move(row));
    }
  }

  result.counters.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

Result<std::string> SqlSession::Resolve(std::string_view name) const {
  if (tables_.Contains(name)) return tables_.Resolve(name);
  if (fallback_ != nullptr) return fallback_->Resolve(name);
  return MakeError(ErrorKind::kUnknownTable, "unknown table '{}'", name);
}

Status SqlSession::RegisterExternalTable(std::string name, std::string location) {
  if (tables_.Contains(name)) {
    return MakeError(ErrorKind::kDuplicateName, "table '{}' is already registered", name);
  }
  auto loaded = LoadTable(store_, location);
  if (!loaded.has_value()) {
    return MakeError(ErrorKind::kInvalidTable, "no table at '{}': {}", location,
                     loaded.error().message);
  }
  tables_.Add(std::move(name), std::move(location));
  return Ok();
}

Result<QueryResult> SqlSession::Execute(std::string_view sql, const ExecOptions& options) {
  EDSP_ASSIGN_OR_RETURN(auto statement, ParseStatement(sql));
  if (auto* create = std::get_if<CreateExternalTableStatement>(&statement)) {
    EDSP_RETURN_IF_ERROR(RegisterExternalTable(create->name, create->location));
    return QueryResult{};
  }
  const auto& select = std::get<SelectStatement>(statement);
  EDSP_ASSIGN_OR_RETURN(auto location, Resolve(select.table));
  return ExecuteSelect(store_, location, select, options);
}

}  // namespace edsp
