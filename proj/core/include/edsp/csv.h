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

/// \file edsp/csv.h
/// The CSV dialect used for ingest and query output: comma separated,
/// double-quote quoting with "" as the escaped quote, first line is the header,
/// UTF-8, `\n` or `\r\n` line endings.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "edsp/result.h"
#include "edsp/value.h"

namespace edsp::csv {

struct Record {
  std::vector<std::string> fields;
  /// Whether each field was quoted; an unquoted empty field is a NULL.
  std::vector<bool> quoted;
  /// 1-based line on which the record starts.
  int64_t line = 0;
};

class Reader {
 public:
  static Result<Reader> Open(const std::filesystem::path& path);
  /// Reads from a caller-owned stream.
  explicit Reader(std::istream& in) : in_(&in) {}

  Reader(Reader&&) = default;
  Reader& operator=(Reader&&) = default;

  /// False at end of input. Parse errors carry the line number.
  Result<bool> Next(Record& record);

 private:
  Reader() = default;

  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_ = nullptr;
  int64_t line_ = 1;
};

/// Quotes a field when it contains a comma, quote, CR or LF, or is empty
/// (so an empty string stays distinguishable from NULL).
std::string QuoteField(std::string_view field);

/// CSV text of a value: NULL is the empty field.
std::string FormatValue(const Value& value);

void WriteRecord(std::ostream& out, const std::vector<std::string>& fields);

bool IsIntegerText(std::string_view text);
bool IsNumericText(std::string_view text);

/// Parses one field as `type`. Unquoted empty fields are NULL.
Result<Value> ParseField(std::string_view text, bool quoted, DataType type);

}  // namespace edsp::csv
