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

/// \file edsp/audit.h
/// Byte census of a store: how many table roots each dataset has, whether any
/// of its data files were copied elsewhere, and what engines left in their
/// scratch areas.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsp/object_store.h"
#include "edsp/result.h"

namespace edsp {

struct DatasetRef {
  std::string name;
  std::string location;
};

/// Store prefix an engine declares for temporary files.
struct ScratchArea {
  std::string engine;
  std::string prefix;
};

/// `_scratch/<engine>/` for every engine id.
ScratchArea ScratchAreaFor(std::string_view engine);
std::vector<ScratchArea> DefaultScratchAreas();

struct DatasetCensus {
  std::string name;
  std::string location;
  std::string table_uuid;
  /// Every table root in the store that carries this dataset's table uuid.
  std::vector<std::string> roots;
  /// Keys outside the dataset root whose bytes equal one of its data files.
  std::vector<std::string> copies;
  int64_t data_files = 0;
  int64_t data_bytes = 0;
};

struct ReplicaReport {
  std::vector<DatasetCensus> datasets;
  std::map<std::string, int64_t> scratch_bytes;
  int64_t total_objects = 0;
  int64_t total_bytes = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  int64_t RootsOf(std::string_view dataset) const;
  nlohmann::json ToJson() const;
};

/// Takes the census and flags every dataset without exactly one root, every
/// copied data file and every non-empty scratch area.
Result<ReplicaReport> AuditReplicas(const ObjectStore& store,
                                    const std::vector<DatasetRef>& datasets,
                                    const std::vector<ScratchArea>& scratch);

/// Violations introduced between two censuses of the same datasets: scratch
/// growth, new roots and new copies.
std::vector<std::string> CompareReports(const ReplicaReport& before,
                                        const ReplicaReport& after);

}  // namespace edsp
