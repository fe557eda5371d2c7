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

#include "edsp/predicate.h"

namespace edsp {

std::string_view ToString(CompareOp op) {
  switch (op) {
    case CompareOp::kEq:
      return "=";
    case CompareOp::kNe:
      return "!=";
    case CompareOp::kLt:
      return "<";
    case CompareOp::kLe:
      return "<=";
    case CompareOp::kGt:
      return ">";
    case CompareOp::kGe:
      return ">=";
  }
  return "?";
}

bool Satisfies(CompareOp op, std::weak_ordering ordering) {
  switch (op) {
    case CompareOp::kEq:
      return ordering == 0;
    case CompareOp::kNe:
      return ordering != 0;
    case CompareOp::kLt:
      return ordering < 0;
    case CompareOp::kLe:
      return ordering <= 0;
    case CompareOp::kGt:
      return ordering > 0;
    case CompareOp::kGe:
      return ordering >= 0;
  }
  return false;
}

Truth And(Truth lhs, Truth rhs) {
  if (lhs == Truth::kFalse || rhs == Truth::kFalse) return Truth::kFalse;
  if (lhs == Truth::kTrue && rhs == Truth::kTrue) return Truth::kTrue;
  return Truth::kUnknown;
}

Truth Or(Truth lhs, Truth rhs) {
  if (lhs == Truth::kTrue || rhs == Truth::kTrue) return Truth::kTrue;
  if (lhs == Truth::kFalse && rhs == Truth::kFalse) return Truth::kFalse;
  return Truth::kUnknown;
}

PredicatePtr Predicate::Constant(bool value) {
  auto p = std::shared_ptr<Predicate>(new Predicate());
  p->kind_ = Kind::kConstant;
  p->constant_ = value;
  return p;
}

PredicatePtr Predicate::Compare(std::string column, CompareOp op, Value literal) {
  auto p = std::shared_ptr<Predicate>(new Predicate());
  p->kind_ = Kind::kCompare;
  p->column_ = std::move(column);
  p->op_ = op;
  p->literal_ = std::move(literal);
  return p;
}

PredicatePtr Predicate::IsNull(std::string column) {
  auto p = std::shared_ptr<Predicate>(new Predicate());
  p->kind_ = Kind::kIsNull;
  p->column_ = std::move(column);
  return p;
}

PredicatePtr Predicate::IsNotNull(std::string column) {
  auto p = std::shared_ptr<Predicate>(new Predicate());
  p->kind_ = Kind::kIsNotNull;
  p->column_ = std::move(column);
  return p;
}

PredicatePtr Predicate::And(PredicatePtr lhs, PredicatePtr rhs) {
  auto p = std::shared_ptr<Predicate>(new Predicate());
  p->kind_ = Kind::kAnd;
  p->left_ = std::move(lhs);
  p->right_ = std::move(rhs);
  return p;
}

PredicatePtr Predicate::Or(PredicatePtr lhs, PredicatePtr rhs) {
  auto p = std::shared_ptr<Predicate>(new Predicate());
  p->kind_ = Kind::kOr;
  p->left_ = std::move(lhs);
  p->right_ = std::move(rhs);
  return p;
}

namespace {

std::string LiteralToSql(const Value& value) {
  if (value.is_null()) return "NULL";
  switch (value.type()) {
    case DataType::kString: {
      std::string out = "'";
      for (char c : value.as_string()) {
        if (c == '\'') out.push_back('\'');
        out.push_back(c);
      }
      out.push_back('\'');
      return out;
    }
    case DataType::kBool:
      return value.as_bool() ? "TRUE" : "FALSE";
    case DataType::kFloat64: {
      std::string text = value.ToString();
      // Keep a float literal a float literal when it reparses.
      if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
      return text;
    }
    default:
      return value.ToString();
  }
}

}  // namespace

std::string Predicate::ToString() const {
  switch (kind_) {
    case Kind::kConstant:
      return constant_ ? "TRUE" : "FALSE";
    case Kind::kCompare:
      return fmt::format("{} {} {}", column_, edsp::ToString(op_), LiteralToSql(literal_));
    case Kind::kIsNull:
      return column_ + " IS NULL";
    case Kind::kIsNotNull:
      return column_ + " IS NOT NULL";
    case Kind::kAnd:
      return fmt::format("({} AND {})", left_->ToString(), right_->ToString());
    case Kind::kOr:
      return fmt::format("({} OR {})", left_->ToString(), right_->ToString());
  }
  return "?";
}

std::vector<PredicatePtr> Conjuncts(const PredicatePtr& predicate) {
  std::vector<PredicatePtr> out;
  if (!predicate) return out;
  std::vector<PredicatePtr> stack{predicate};
  while (!stack.empty()) {
    PredicatePtr node = std::move(stack.back());
    stack.pop_back();
    if (node->kind() == Predicate::Kind::kAnd) {
      stack.push_back(node->right());
      stack.push_back(node->left());
    } else {
      out.push_back(std::move(node));
    }
  }
  return out;
}

void CollectColumns(const PredicatePtr& predicate, std::set<std::string>& out) {
  if (!predicate) return;
  switch (predicate->kind()) {
    case Predicate::Kind::kConstant:
      return;
    case Predicate::Kind::kCompare:
    case Predicate::Kind::kIsNull:
    case Predicate::Kind::kIsNotNull:
      out.insert(predicate->column());
      return;
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr:
      CollectColumns(predicate->left(), out);
      CollectColumns(predicate->right(), out);
      return;
  }
}

Status BindPredicate(const PredicatePtr& predicate, const Schema& schema) {
  if (!predicate) return Ok();
  switch (predicate->kind()) {
    case Predicate::Kind::kConstant:
      return Ok();
    case Predicate::Kind::kIsNull:
    case Predicate::Kind::kIsNotNull:
      if (schema.FindField(predicate->column()) == nullptr) {
        return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'",
                         predicate->column());
      }
      return Ok();
    case Predicate::Kind::kCompare: {
      const Field* field = schema.FindField(predicate->column());
      if (field == nullptr) {
        return MakeError(ErrorKind::kUnknownColumn, "unknown column '{}'",
                         predicate->column());
      }
      const Value& literal = predicate->literal();
      if (literal.is_null()) {
        return MakeError(ErrorKind::kTypeError,
                         "comparison with NULL literal on '{}'; use IS NULL",
                         field->name);
      }
      bool ok = IsNumeric(field->type) ? IsNumeric(literal.type())
                                       : literal.type() == field->type;
      if (!ok) {
        return MakeError(ErrorKind::kTypeError, "cannot compare {} column '{}' with {}",
                         edsp::ToString(field->type), field->name,
                         edsp::ToString(literal.type()));
      }
      return Ok();
    }
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr:
      EDSP_RETURN_IF_ERROR(BindPredicate(predicate->left(), schema));
      return BindPredicate(predicate->right(), schema);
  }
  return Ok();
}

}  // namespace edsp
