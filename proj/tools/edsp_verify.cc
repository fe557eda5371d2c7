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

// edsp-verify: validates a query result read from stdin.
//
//     edsp query ... --format json | edsp-verify [--expect-rows N]
//
// Prints "ok: <rows> rows, <columns> columns" and exits 0 when the input is a
// well-formed result whose JSON re-serializes identically.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edsp/sql_engine.h"

int main(int argc, char** argv) {
  std::optional<long long> expect_rows;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-rows") == 0 && i + 1 < argc) {
      expect_rows = std::atoll(argv[++i]);
    } else {
      fmt::print(stderr, "usage: edsp-verify [--expect-rows N] < result.json\n");
      return 2;
    }
  }
  std::string input((std::istreambuf_iterator<char>(std::cin)),
                    std::istreambuf_iterator<char>());
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(input);
  } catch (const nlohmann::json::exception& e) {
    fmt::print(stderr, "edsp-verify: not JSON: {}\n", e.what());
    return 1;
  }
  auto result = edsp::QueryResult::FromJson(json);
  if (!result.has_value()) {
    fmt::print(stderr, "edsp-verify: {}\n", result.error().ToString());
    return 1;
  }
  nlohmann::json round_trip = result->ToJson(json.contains("counters"));
  if (round_trip != json) {
    fmt::print(stderr, "edsp-verify: result does not round-trip\n");
    return 1;
  }
  if (expect_rows.has_value() && static_cast<long long>(result->rows.size()) != *expect_rows) {
    fmt::print(stderr, "edsp-verify: expected {} rows, found {}\n", *expect_rows,
               result->rows.size());
    return 1;
  }
  fmt::print("ok: {} rows, {} columns\n", result->rows.size(), result->columns.size());
  return 0;
}
