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

/// \file edsp/predicate.h
/// Boolean filter expressions over a single table: comparisons between a column
/// and a literal, IS [NOT] NULL, AND, OR and the constants TRUE/FALSE.
///
/// Evaluation uses three-valued logic; a comparison involving NULL is unknown
/// and unknown rows are filtered out.

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edsp/result.h"
#include "edsp/schema.h"
#include "edsp/value.h"

namespace edsp {

enum class CompareOp : uint8_t { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view ToString(CompareOp op);

/// Whether `ordering` satisfies `op`.
bool Satisfies(CompareOp op, std::weak_ordering ordering);

enum class Truth : uint8_t { kFalse, kTrue, kUnknown };

Truth And(Truth lhs, Truth rhs);
Truth Or(Truth lhs, Truth rhs);

class Predicate;
using PredicatePtr = std::shared_ptr<const Predicate>;

class Predicate {
 public:
  enum class Kind : uint8_t { kConstant, kCompare, kIsNull, kIsNotNull, kAnd, kOr };

  static PredicatePtr Constant(bool value);
  static PredicatePtr Compare(std::string column, CompareOp op, Value literal);
  static PredicatePtr IsNull(std::string column);
  static PredicatePtr IsNotNull(std::string column);
  static PredicatePtr And(PredicatePtr lhs, PredicatePtr rhs);
  static PredicatePtr Or(PredicatePtr lhs, PredicatePtr rhs);

  Kind kind() const { return kind_; }
  bool constant() const { return constant_; }
  const std::string& column() const { return column_; }
  CompareOp op() const { return op_; }
  const Value& literal() const { return literal_; }
  const PredicatePtr& left() const { return left_; }
  const PredicatePtr& right() const { return right_; }

  /// SQL-like rendering that the SQL parser accepts back.
  std::string ToString() const;

 private:
  Predicate() = default;

  Kind kind_ = Kind::kConstant;
  bool constant_ = true;
  std::string column_;
  CompareOp op_ = CompareOp::kEq;
  Value literal_;
  PredicatePtr left_;
  PredicatePtr right_;
};

/// Top-level AND operands, flattened. A null predicate has no conjuncts.
std::vector<PredicatePtr> Conjuncts(const PredicatePtr& predicate);

void CollectColumns(const PredicatePtr& predicate, std::set<std::string>& out);

/// Checks every referenced column exists and every literal is comparable with
/// its column's type (numeric with numeric, STRING with STRING, BOOL with BOOL).
Status BindPredicate(const PredicatePtr& predicate, const Schema& schema);

}  // namespace edsp
