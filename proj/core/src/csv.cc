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

#include "edsp/csv.h"

#include <charconv>
#include <cmath>
#include <memory>

#include "edsp/util.h"

namespace edsp::csv {

Result<Reader> Reader::Open(const std::filesystem::path& path) {
  auto stream = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*stream) {
    return NotFound("cannot open CSV file {}", path.string());
  }
  Reader reader;
  reader.in_ = stream.get();
  reader.owned_ = std::move(stream);
  return reader;
}

Result<bool> Reader::Next(Record& record) {
  record.fields.clear();
  record.quoted.clear();
  record.line = line_;

  std::istream& in = *in_;
  int c = in.get();
  if (c == std::char_traits<char>::eof()) return false;

  std::string field;
  bool quoted = false;
  bool after_quote = false;
  auto finish_field = [&] {
    record.fields.push_back(std::move(field));
    record.quoted.push_back(quoted);
    field.clear();
    quoted = false;
    after_quote = false;
  };

  while (true) {
    if (c == std::char_traits<char>::eof()) {
      finish_field();
      return true;
    }
    char ch = static_cast<char>(c);
    if (quoted && !after_quote) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      c = in.get();
      if (c == std::char_traits<char>::eof() && !after_quote) {
        return MakeError(ErrorKind::kParseError, "line {}: unterminated quoted field",
                         record.line);
      }
      continue;
    }
    if (ch == ',') {
      finish_field();
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r') {
        if (in.peek() != '\n') {
          return MakeError(ErrorKind::kParseError, "line {}: bare carriage return", line_);
        }
        in.get();
      }
      ++line_;
      finish_field();
      return true;
    } else if (after_quote) {
      return MakeError(ErrorKind::kParseError,
                       "line {}: unexpected character after closing quote", line_);
    } else if (ch == '"') {
      if (!field.empty()) {
        return MakeError(ErrorKind::kParseError, "line {}: quote inside unquoted field",
                         line_);
      }
      quoted = true;
    } else {
      field.push_back(ch);
    }
    c = in.get();
  }
}

std::string QuoteField(std::string_view field) {
  if (!field.empty() && field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string FormatValue(const Value& value) {
  if (value.is_null()) return {};
  switch (value.type()) {
    case DataType::kString:
      return QuoteField(value.as_string());
    case DataType::kFloat64:
      return FormatDouble(value.as_float64());
    default:
      return value.ToString();
  }
}

void WriteRecord(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.put(',');
    out << fields[i];
  }
  out.put('\n');
}

bool IsIntegerText(std::string_view text) {
  size_t i = 0;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
  if (i == text.size()) return false;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  return true;
}

bool IsNumericText(std::string_view text) {
  size_t i = 0;
  auto digits = [&] {
    size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    return i - start;
  };
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
  size_t integral = digits();
  size_t fraction = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    fraction = digits();
  }
  if (integral == 0 && fraction == 0) return false;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    if (digits() == 0) return false;
  }
  return i == text.size();
}

Result<Value> ParseField(std::string_view text, bool quoted, DataType type) {
  if (text.empty() && !quoted) return Value::Null();
  switch (type) {
    case DataType::kInt64: {
      if (!IsIntegerText(text)) break;
      std::string_view digits = text.front() == '+' ? text.substr(1) : text;
      int64_t v = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        return MakeError(ErrorKind::kParseError, "integer '{}' out of range", text);
      }
      return Value::Int64(v);
    }
    case DataType::kFloat64: {
      if (!IsNumericText(text)) break;
      std::string_view number = text.front() == '+' ? text.substr(1) : text;
      double v = 0;
      auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), v);
      if (ec != std::errc() || ptr != number.data() + number.size() || !std::isfinite(v)) {
        return MakeError(ErrorKind::kParseError, "number '{}' out of range", text);
      }
      return Value::Float64(v);
    }
    case DataType::kBool:
      if (text == "true") return Value::Bool(true);
      if (text == "false") return Value::Bool(false);
      break;
    case DataType::kString:
      if (!IsValidUtf8(text)) {
        return MakeError(ErrorKind::kInvalidUtf8, "field is not valid UTF-8");
      }
      return Value::String(std::string(text));
  }
  return MakeError(ErrorKind::kParseError, "'{}' is not a valid {}", text, ToString(type));
}

}  // namespace edsp::csv
