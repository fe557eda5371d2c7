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

#include "edsp/scan_api.h"

#include <map>
#include <set>

#include "edsp/columnar_file.h"

namespace edsp {

namespace {

Result<LoadedTable> LoadForScan(const ObjectStore& store, std::string_view location,
                                const AsOf& at) {
  auto table = LoadTable(store, location, at);
  if (!table.has_value() && table.error().kind == ErrorKind::kNotFound) {
    return MakeError(ErrorKind::kUnknownTable, "no table at '{}': {}", location,
                     table.error().message);
  }
  return table;
}

}  // namespace

Result<RowStream> RowStream::Open(const ObjectStore& store, std::string_view location,
                                  ScanOptions options) {
  auto started = std::chrono::steady_clock::now();
  if (options.limit.has_value() && *options.limit < 0) {
    return InvalidArgument("limit must not be negative");
  }
  EDSP_ASSIGN_OR_RETURN(auto table, LoadForScan(store, location, options.at));
  RowStream stream(store, std::move(options));
  stream.started_ = started;
  const Schema& schema = table.schema;
  if (stream.options_.columns.empty()) {
    for (const Field& field : schema.fields()) stream.options_.columns.push_back(field.name);
  }
  for (const auto& name : stream.options_.columns) {
    const Field* field = schema.FindField(name);
    if (field == nullptr) {
      return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'", name);
    }
    stream.columns_.push_back(name);
    stream.types_.push_back(field->type);
  }
  if (stream.options_.predicate) {
    EDSP_RETURN_IF_ERROR(BindPredicate(stream.options_.predicate, schema));
  }
  EDSP_ASSIGN_OR_RETURN(stream.plan_, PlanScan(store, table, stream.options_.predicate,
                                               stream.options_.prune));
  stream.counters_.files_considered = stream.plan_.files_considered;
  stream.counters_.files_pruned = stream.plan_.files_pruned;
  return stream;
}

Status RowStream::LoadNextFile() {
  const ManifestEntry& entry = plan_.files[next_file_++];
  EDSP_ASSIGN_OR_RETURN(auto key, BlobKey::Make(entry.data_path));
  ecf::BlobSource source(*store_, std::move(key), static_cast<uint64_t>(entry.file_size));
  auto rows = ecf::ProjectRead(source, columns_, options_.predicate, &plan_.schema);
  counters_.data_bytes_read += static_cast<int64_t>(source.bytes_read());
  if (!rows.has_value()) {
    return MakeError(rows.error().kind, "{}: {}", entry.data_path, rows.error().message);
  }
  counters_.rows_scanned += entry.row_count;
  buffer_ = std::move(rows).value();
  buffer_pos_ = 0;
  return Ok();
}

Result<bool> RowStream::Next(Row& row) {
  auto finish = [&](bool more) {
    counters_.wall_time_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - started_)
                                 .count();
    return more;
  };
  if (options_.limit.has_value() && emitted_ >= *options_.limit) return finish(false);
  while (buffer_pos_ >= buffer_.size()) {
    buffer_.clear();
    buffer_pos_ = 0;
    if (next_file_ >= plan_.files.size()) return finish(false);
    EDSP_RETURN_IF_ERROR(LoadNextFile());
  }
  row = std::move(buffer_[buffer_pos_++]);
  ++emitted_;
  return finish(true);
}

Result<std::vector<Row>> RowStream::Collect() {
  std::vector<Row> rows;
  Row row;
  while (true) {
    EDSP_ASSIGN_OR_RETURN(bool more, Next(row));
    if (!more) break;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

struct KeyLess {
  bool operator()(const Row& lhs, const Row& rhs) const {
    for (size_t i = 0; i < lhs.size(); ++i) {
      auto c = TotalOrder(lhs[i], rhs[i]);
      if (c < 0) return true;
      if (c > 0) return false;
    }
    return false;
  }
};

struct State {
  int64_t rows = 0;
  int64_t non_null = 0;
  int64_t int_total = 0;
  double float_total = 0;
  long double mean_total = 0;
  std::optional<Value> lowest;
  std::optional<Value> highest;
};

}  // namespace

Result<QueryResult> Aggregate(const ObjectStore& store, std::string_view location,
                              const AggregateOptions& options) {
  auto started = std::chrono::steady_clock::now();
  EDSP_ASSIGN_OR_RETURN(auto table, LoadForScan(store, location, options.at));
  const Schema& schema = table.schema;

  QueryResult result;
  ScanOptions scan;
  scan.at = options.at;
  scan.predicate = options.predicate;
  scan.prune = options.prune;
  auto position = [&](const std::string& name) -> Result<size_t> {
    const Field* field = schema.FindField(name);
    if (field == nullptr) {
      return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'", name);
    }
    for (size_t i = 0; i < scan.columns.size(); ++i) {
      if (scan.columns[i] == name) return i;
    }
    scan.columns.push_back(name);
    return scan.columns.size() - 1;
  };

  std::vector<size_t> key_positions;
  for (const auto& name : options.group_by) {
    EDSP_ASSIGN_OR_RETURN(size_t pos, position(name));
    key_positions.push_back(pos);
    result.columns.push_back(name);
    result.types.push_back(schema.FindField(name)->type);
  }
  std::vector<std::optional<size_t>> inputs;
  std::vector<DataType> input_types;
  for (const auto& request : options.aggregates) {
    SelectItem item{SelectItem::Kind::kAggregate, request.column, request.fn};
    result.columns.push_back(item.OutputName());
    if (request.column.empty()) {
      if (request.fn != AggregateFn::kCount) {
        return InvalidArgument("{} needs a column", ToString(request.fn));
      }
      inputs.push_back(std::nullopt);
      input_types.push_back(DataType::kInt64);
      result.types.push_back(DataType::kInt64);
      continue;
    }
    EDSP_ASSIGN_OR_RETURN(size_t pos, position(request.column));
    DataType type = schema.FindField(request.column)->type;
    if ((request.fn == AggregateFn::kSum || request.fn == AggregateFn::kAvg) &&
        !IsNumeric(type)) {
      return MakeError(ErrorKind::kTypeError, "{}({}) needs a numeric column",
                       ToString(request.fn), request.column);
    }
    inputs.push_back(pos);
    input_types.push_back(type);
    result.types.push_back(request.fn == AggregateFn::kCount ? DataType::kInt64
                           : request.fn == AggregateFn::kAvg ? DataType::kFloat64
                                                             : type);
  }
  if (scan.columns.empty()) {
    // COUNT(*) alone still needs rows; any column will do.
    scan.columns.push_back(schema.field(0).name);
  }

  EDSP_ASSIGN_OR_RETURN(auto stream, RowStream::Open(store, location, std::move(scan)));
  std::map<Row, std::vector<State>, KeyLess> groups;
  if (options.group_by.empty()) groups[Row{}].resize(options.aggregates.size());

  Row row;
  Row key;
  while (true) {
    EDSP_ASSIGN_OR_RETURN(bool more, stream.Next(row));
    if (!more) break;
    key.clear();
    for (size_t pos : key_positions) key.push_back(row[pos]);
    auto& states = groups[key];
    if (states.empty()) states.resize(options.aggregates.size());
    for (size_t a = 0; a < options.aggregates.size(); ++a) {
      State& state = states[a];
      ++state.rows;
      if (!inputs[a].has_value()) continue;
      const Value& v = row[*inputs[a]];
      if (v.is_null()) continue;
      ++state.non_null;
      switch (options.aggregates[a].fn) {
        case AggregateFn::kSum:
          if (v.type() == DataType::kInt64) {
            if (__builtin_add_overflow(state.int_total, v.as_int64(), &state.int_total)) {
              return MakeError(ErrorKind::kInt64Overflow, "SUM({}) overflows INT64",
                               options.aggregates[a].column);
            }
          } else {
            state.float_total += v.as_float64();
          }
          break;
        case AggregateFn::kAvg:
          state.mean_total += v.type() == DataType::kInt64
                                  ? static_cast<long double>(v.as_int64())
                                  : static_cast<long double>(v.as_float64());
          break;
        case AggregateFn::kMin:
          if (!state.lowest || TotalOrder(v, *state.lowest) < 0) state.lowest = v;
          break;
        case AggregateFn::kMax:
          if (!state.highest || TotalOrder(v, *state.highest) > 0) state.highest = v;
          break;
        case AggregateFn::kCount:
          break;
      }
    }
  }

  for (const auto& [group_key, states] : groups) {
    Row out = group_key;
    for (size_t a = 0; a < options.aggregates.size(); ++a) {
      const State& state = states[a];
      switch (options.aggregates[a].fn) {
        case AggregateFn::kCount:
          out.push_back(Value::Int64(inputs[a] ? state.non_null : state.rows));
          break;
        case AggregateFn::kSum:
          if (state.non_null == 0) {
            out.push_back(Value::Null());
          } else if (input_types[a] == DataType::kInt64) {
            out.push_back(Value::Int64(state.int_total));
          } else {
            out.push_back(Value::Float64(state.float_total));
          }
          break;
        case AggregateFn::kAvg:
          out.push_back(state.non_null == 0
                            ? Value::Null()
                            : Value::Float64(static_cast<double>(state.mean_total /
                                                                 state.non_null)));
          break;
        case AggregateFn::kMin:
          out.push_back(state.lowest.value_or(Value::Null()));
          break;
        case AggregateFn::kMax:
          out.push_back(state.highest.value_or(Value::Null()));
          break;
      }
    }
    result.rows.push_back(std::move(out));
  }
  result.counters = stream.counters();
  result.counters.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

}  // namespace edsp
