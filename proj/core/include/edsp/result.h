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

/// \file edsp/result.h
/// Error kinds and the Result<T> return type used across the library.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include <fmt/format.h>

namespace edsp {

enum class ErrorKind : uint8_t {
  kInvalidArgument,
  kNotFound,
  kIoFailure,
  kPreconditionFailed,
  kAlreadyExists,
  kTypeMismatch,
  kInvalidUtf8,
  kBadMagic,
  kTruncatedFile,
  kFooterMismatch,
  kChecksumMismatch,
  kUnknownColumn,
  kUnknownSnapshot,
  kNoSnapshotBeforeTimestamp,
  kConflictExhausted,
  kSchemaMismatch,
  kDuplicateColumn,
  kParseError,
  kSyntaxError,
  kUnsupportedFeature,
  kUnknownTable,
  kTypeError,
  kInt64Overflow,
  kDuplicateName,
  kInvalidTable,
  kUnknownEntry,
  kUnknownEngine,
  kInternal,
};

std::string_view ToString(ErrorKind kind);

struct [[nodiscard]] Error {
  ErrorKind kind;
  std::string message;

  std::string ToString() const;
};

/// A value of type T or an Error. Modeled on std::expected, which GCC 11 lacks.
template <typename T>
class [[nodiscard]] Result {
 public:
  using value_type = T;

  Result(const T& value) : storage_(std::in_place_index<0>, value) {}  // NOLINT
  Result(T&& value) : storage_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  template <typename U>
    requires(std::is_constructible_v<T, U&&> &&
             !std::is_same_v<std::remove_cvref_t<U>, T> &&
             !std::is_same_v<std::remove_cvref_t<U>, Error> &&
             !std::is_same_v<std::remove_cvref_t<U>, Result<T>>)
  Result(U&& value) : storage_(std::in_place_index<0>, std::forward<U>(value)) {}  // NOLINT
  Result(Error error) : storage_(std::in_place_index<1>, std::move(error)) {}  // NOLINT

  bool has_value() const { return storage_.index() == 0; }
  explicit operator bool() const { return has_value(); }

  T& value() & { return std::get<0>(storage_); }
  const T& value() const& { return std::get<0>(storage_); }
  T&& value() && { return std::get<0>(std::move(storage_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T&& operator*() && { return std::move(*this).value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const& { return std::get<1>(storage_); }
  Error&& error() && { return std::get<1>(std::move(storage_)); }

 private:
  std::variant<T, Error> storage_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  using value_type = void;

  Result() = default;
  Result(Error error) : error_(std::move(error)) {}  // NOLINT

  bool has_value() const { return !error_.has_value(); }
  explicit operator bool() const { return has_value(); }
  void value() const {}

  const Error& error() const& { return *error_; }
  Error&& error() && { return std::move(*error_); }

 private:
  std::optional<Error> error_;
};

using Status = Result<void>;

inline Status Ok() { return {}; }

template <typename... Args>
Error MakeError(ErrorKind kind, fmt::format_string<Args...> format, Args&&... args) {
  return Error{kind, fmt::format(format, std::forward<Args>(args)...)};
}

#define EDSP_DEFINE_ERROR_HELPER(Name)                                    \
  template <typename... Args>                                            \
  Error Name(fmt::format_string<Args...> format, Args&&... args) {       \
    return MakeError(ErrorKind::k##Name, format, std::forward<Args>(args)...); \
  }

EDSP_DEFINE_ERROR_HELPER(InvalidArgument)
EDSP_DEFINE_ERROR_HELPER(NotFound)
EDSP_DEFINE_ERROR_HELPER(IoFailure)
EDSP_DEFINE_ERROR_HELPER(PreconditionFailed)
EDSP_DEFINE_ERROR_HELPER(AlreadyExists)
EDSP_DEFINE_ERROR_HELPER(TypeMismatch)
EDSP_DEFINE_ERROR_HELPER(Internal)

#undef EDSP_DEFINE_ERROR_HELPER

}  // namespace edsp

#define EDSP_CONCAT_IMPL(a, b) a##b
#define EDSP_CONCAT(a, b) EDSP_CONCAT_IMPL(a, b)

#define EDSP_RETURN_IF_ERROR(expr)                        \
  do {                                                    \
    auto&& _edsp_status = (expr);                         \
    if (!_edsp_status.has_value()) {                      \
      return std::move(_edsp_status).error();             \
    }                                                     \
  } while (false)

#define EDSP_ASSIGN_OR_RETURN_IMPL(tmp, lhs, expr) \
  auto tmp = (expr);                               \
  if (!tmp.has_value()) {                          \
    return std::move(tmp).error();                 \
  }                                                \
  lhs = std::move(tmp).value()

#define EDSP_ASSIGN_OR_RETURN(lhs, expr) \
  EDSP_ASSIGN_OR_RETURN_IMPL(EDSP_CONCAT(_edsp_result_, __COUNTER__), lhs, expr)
