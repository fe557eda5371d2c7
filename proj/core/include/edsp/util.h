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

/// \file edsp/util.h
/// Small helpers shared by the storage and metadata layers.

#include <cstdint>
#include <string>
#include <string_view>

namespace edsp {

/// Random 128-bit UUID (version 4), lowercase hex with dashes.
std::string NewUuidV4();

/// Time-ordered UUID (version 7). Within a process, successive calls return
/// strictly increasing strings, so names built from them sort by creation order.
std::string NewUuidV7();

/// Uniform random 64-bit value from a per-thread generator seeded by the OS.
uint64_t RandomU64();

/// Milliseconds since the Unix epoch (wall clock).
int64_t NowMs();

std::string Sha256Hex(std::string_view bytes);

uint32_t Crc32(std::string_view bytes);

bool IsValidUtf8(std::string_view bytes);

/// Shortest text that parses back to exactly the same double.
std::string FormatDouble(double value);

}  // namespace edsp
