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

#include "edsp/result.h"

namespace edsp {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid-argument";
    case ErrorKind::kNotFound:
      return "not-found";
    case ErrorKind::kIoFailure:
      return "io-failure";
    case ErrorKind::kPreconditionFailed:
      return "precondition-failed";
    case ErrorKind::kAlreadyExists:
      return "already-exists";
    case ErrorKind::kTypeMismatch:
      return "type-mismatch";
    case ErrorKind::kInvalidUtf8:
      return "non-utf8-string";
    case ErrorKind::kBadMagic:
      return "bad-magic";
    case ErrorKind::kTruncatedFile:
      return "truncated-file";
    case ErrorKind::kFooterMismatch:
      return "footer-mismatch";
    case ErrorKind::kChecksumMismatch:
      return "checksum-mismatch";
    case ErrorKind::kUnknownColumn:
      return "unknown-column";
    case ErrorKind::kUnknownSnapshot:
      return "unknown-snapshot";
    case ErrorKind::kNoSnapshotBeforeTimestamp:
      return "no-snapshot-before-timestamp";
    case ErrorKind::kConflictExhausted:
      return "conflict-exhausted";
    case ErrorKind::kSchemaMismatch:
      return "schema-mismatch";
    case ErrorKind::kDuplicateColumn:
      return "duplicate-column";
    case ErrorKind::kParseError:
      return "parse-error";
    case ErrorKind::kSyntaxError:
      return "syntax-error";
    case ErrorKind::kUnsupportedFeature:
      return "unsupported-feature";
    case ErrorKind::kUnknownTable:
      return "unknown-table";
    case ErrorKind::kTypeError:
      return "type-error";
    case ErrorKind::kInt64Overflow:
      return "int64-overflow";
    case ErrorKind::kDuplicateName:
      return "duplicate-name";
    case ErrorKind::kInvalidTable:
      return "invalid-table";
    case ErrorKind::kUnknownEntry:
      return "unknown-entry";
    case ErrorKind::kUnknownEngine:
      return "unknown-engine";
    case ErrorKind::kInternal:
      return "internal";
  }
  return "unknown";
}

std::string Error::ToString() const {
  return fmt::format("{}: {}", edsp::ToString(kind), message);
}

}  // namespace edsp
