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

#include <cctype>
#include <charconv>
#include <cmath>

#include "edsp/csv.h"
#include "edsp/sql_engine.h"

namespace edsp {

std::string_view ToString(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::kCount:
      return "COUNT";
    case AggregateFn::kSum:
      return "SUM";
    case AggregateFn::kAvg:
      return "AVG";
    case AggregateFn::kMin:
      return "MIN";
    case AggregateFn::kMax:
      return "MAX";
  }
  return "?";
}

std::string SelectItem::OutputName() const {
  switch (kind) {
    case Kind::kStar:
      return "*";
    case Kind::kColumn:
      return column;
    case Kind::kAggregate:
      return fmt::format("{}({})", edsp::ToString(fn), column.empty() ? "*" : column);
  }
  return column;
}

namespace {

enum class TokenKind : uint8_t {
  kIdentifier,
  kString,
  kInteger,
  kFloat,
  kSymbol,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
  size_t position = 0;
};

bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool IsDigit(char c) { return c >= '0' && c <= '9'; }

std::string Upper(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

Error SyntaxError(size_t position, std::string_view message) {
  return MakeError(ErrorKind::kSyntaxError, "at position {}: {}", position, message);
}

Result<std::vector<Token>> Tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < sql.size()) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token token;
    token.position = i;
    if (IsIdentStart(c)) {
      size_t start = i;
      while (i < sql.size() && IsIdentChar(sql[i])) ++i;
      token.kind = TokenKind::kIdentifier;
      token.text = std::string(sql.substr(start, i - start));
    } else if (IsDigit(c) || (c == '.' && i + 1 < sql.size() && IsDigit(sql[i + 1])) ||
               (c == '-' && i + 1 < sql.size() &&
                (IsDigit(sql[i + 1]) || sql[i + 1] == '.'))) {
      size_t start = i;
      if (c == '-') ++i;
      while (i < sql.size() && IsDigit(sql[i])) ++i;
      if (i < sql.size() && sql[i] == '.') {
        ++i;
        while (i < sql.size() && IsDigit(sql[i])) ++i;
      }
      if (i < sql.size() && (sql[i] == 'e' || sql[i] == 'E')) {
        size_t mark = i++;
        if (i < sql.size() && (sql[i] == '+' || sql[i] == '-')) ++i;
        if (i < sql.size() && IsDigit(sql[i])) {
          while (i < sql.size() && IsDigit(sql[i])) ++i;
        } else {
          i = mark;
        }
      }
      token.text = std::string(sql.substr(start, i - start));
      token.kind = csv::IsIntegerText(token.text) ? TokenKind::kInteger : TokenKind::kFloat;
      if (token.kind == TokenKind::kFloat && !csv::IsNumericText(token.text)) {
        return SyntaxError(start, fmt::format("malformed number '{}'", token.text));
      }
    } else if (c == '\'') {
      size_t start = i++;
      std::string text;
      bool closed = false;
      while (i < sql.size()) {
        if (sql[i] == '\'') {
          if (i + 1 < sql.size() && sql[i + 1] == '\'') {
            text.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text.push_back(sql[i++]);
      }
      if (!closed) return SyntaxError(start, "unterminated string literal");
      token.kind = TokenKind::kString;
      token.text = std::move(text);
    } else {
      token.kind = TokenKind::kSymbol;
      std::string_view two = sql.substr(i, 2);
      if (two == "<=" || two == ">=" || two == "!=" || two == "<>") {
        token.text = std::string(two);
        i += 2;
      } else if (std::ispunct(static_cast<unsigned char>(c))) {
        // Left for the parser so an earlier unsupported keyword is reported first.
        token.text = std::string(1, c);
        ++i;
      } else {
        return SyntaxError(i, fmt::format("unexpected character '{}'", c));
      }
    }
    tokens.push_back(std::move(token));
  }
  tokens.push_back(Token{TokenKind::kEnd, "", sql.size()});
  return tokens;
}

constexpr std::string_view kUnsupportedKeywords[] = {
    "JOIN",   "ORDER",  "HAVING", "UNION",  "INSERT", "UPDATE",    "DELETE",
    "DISTINCT", "OFFSET", "WITH",  "INNER", "LEFT",   "RIGHT",     "OUTER",
    "CROSS",  "INTERSECT", "EXCEPT", "DROP", "ALTER", "AS",        "IN",
    "LIKE",   "BETWEEN", "CASE",  "EXISTS", "SELECT",
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Result<Statement> ParseStatement() {
    if (PeekKeyword("SELECT")) {
      EDSP_ASSIGN_OR_RETURN(auto select, ParseSelect());
      EDSP_RETURN_IF_ERROR(ExpectEnd());
      return Statement(std::move(select));
    }
    if (PeekKeyword("CREATE")) {
      EDSP_ASSIGN_OR_RETURN(auto create, ParseCreate());
      EDSP_RETURN_IF_ERROR(ExpectEnd());
      return Statement(std::move(create));
    }
    if (Peek().kind == TokenKind::kIdentifier && IsUnsupported(Peek())) {
      return Unsupported(Peek());
    }
    return SyntaxError(Peek().position, "expected SELECT or CREATE");
  }

  Result<PredicatePtr> ParseStandalonePredicate() {
    EDSP_ASSIGN_OR_RETURN(auto predicate, ParseOr());
    EDSP_RETURN_IF_ERROR(ExpectEnd());
    return predicate;
  }

 private:
  const Token& Peek(size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& Advance() {
    const Token& token = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return token;
  }

  bool PeekKeyword(std::string_view keyword, size_t ahead = 0) const {
    const Token& token = Peek(ahead);
    return token.kind == TokenKind::kIdentifier && Upper(token.text) == keyword;
  }
  bool PeekSymbol(std::string_view symbol) const {
    return Peek().kind == TokenKind::kSymbol && Peek().text == symbol;
  }
  bool AcceptKeyword(std::string_view keyword) {
    if (!PeekKeyword(keyword)) return false;
    Advance();
    return true;
  }
  bool AcceptSymbol(std::string_view symbol) {
    if (!PeekSymbol(symbol)) return false;
    Advance();
    return true;
  }

  static bool IsUnsupported(const Token& token) {
    std::string upper = Upper(token.text);
    for (std::string_view keyword : kUnsupportedKeywords) {
      if (upper == keyword) return true;
    }
    return false;
  }
  static Error Unsupported(const Token& token) {
    return MakeError(ErrorKind::kUnsupportedFeature, "at position {}: {} is not supported",
                     token.position, Upper(token.text));
  }

  Error Unexpected(std::string_view expected) const {
    const Token& token = Peek();
    if (token.kind == TokenKind::kIdentifier && IsUnsupported(token)) {
      return Unsupported(token);
    }
    if (token.kind == TokenKind::kEnd) {
      return SyntaxError(token.position, fmt::format("expected {}, found end of input",
                                                     expected));
    }
    return SyntaxError(token.position,
                       fmt::format("expected {}, found '{}'", expected, token.text));
  }

  Status ExpectKeyword(std::string_view keyword) {
    if (!AcceptKeyword(keyword)) return Unexpected(keyword);
    return Ok();
  }
  Status ExpectSymbol(std::string_view symbol) {
    if (!AcceptSymbol(symbol)) return Unexpected(fmt::format("'{}'", symbol));
    return Ok();
  }
  Status ExpectEnd() {
    AcceptSymbol(";");
    if (Peek().kind != TokenKind::kEnd) return Unexpected("end of statement");
    return Ok();
  }

  static bool IsReserved(const Token& token) {
    static constexpr std::string_view kReserved[] = {
        "SELECT", "FROM", "WHERE", "GROUP", "BY",   "LIMIT",  "AND",
        "OR",     "NOT",  "IS",    "NULL",  "TRUE", "FALSE",
    };
    std::string upper = Upper(token.text);
    for (std::string_view keyword : kReserved) {
      if (upper == keyword) return true;
    }
    return IsUnsupported(token);
  }

  Result<std::string> ExpectIdentifier(std::string_view what) {
    const Token& token = Peek();
    if (token.kind != TokenKind::kIdentifier || IsReserved(token)) return Unexpected(what);
    return Advance().text;
  }

  Result<SelectItem> ParseItem() {
    SelectItem item;
    if (AcceptSymbol("*")) {
      item.kind = SelectItem::Kind::kStar;
      return item;
    }
    static constexpr std::pair<std::string_view, AggregateFn> kFunctions[] = {
        {"COUNT", AggregateFn::kCount}, {"SUM", AggregateFn::kSum},
        {"AVG", AggregateFn::kAvg},     {"MIN", AggregateFn::kMin},
        {"MAX", AggregateFn::kMax},
    };
    if (Peek().kind == TokenKind::kIdentifier && Peek(1).kind == TokenKind::kSymbol &&
        Peek(1).text == "(") {
      std::string upper = Upper(Peek().text);
      for (const auto& [name, fn] : kFunctions) {
        if (upper != name) continue;
        Advance();
        Advance();
        item.kind = SelectItem::Kind::kAggregate;
        item.fn = fn;
        if (fn == AggregateFn::kCount && AcceptSymbol("*")) {
          EDSP_RETURN_IF_ERROR(ExpectSymbol(")"));
          return item;
        }
        EDSP_ASSIGN_OR_RETURN(item.column, ExpectIdentifier("a column name"));
        EDSP_RETURN_IF_ERROR(ExpectSymbol(")"));
        return item;
      }
      return MakeError(ErrorKind::kUnsupportedFeature,
                       "at position {}: function {} is not supported", Peek().position,
                       Peek().text);
    }
    item.kind = SelectItem::Kind::kColumn;
    EDSP_ASSIGN_OR_RETURN(item.column, ExpectIdentifier("a select item"));
    return item;
  }

  Result<SelectStatement> ParseSelect() {
    EDSP_RETURN_IF_ERROR(ExpectKeyword("SELECT"));
    SelectStatement select;
    do {
      size_t position = Peek().position;
      EDSP_ASSIGN_OR_RETURN(auto item, ParseItem());
      if (item.kind == SelectItem::Kind::kStar && !select.items.empty()) {
        return SyntaxError(position, "'*' must be the only select item");
      }
      if (!select.items.empty() && select.items.front().kind == SelectItem::Kind::kStar) {
        return SyntaxError(position, "'*' must be the only select item");
      }
      select.items.push_back(std::move(item));
    } while (AcceptSymbol(","));

    EDSP_RETURN_IF_ERROR(ExpectKeyword("FROM"));
    EDSP_ASSIGN_OR_RETURN(select.table, ExpectIdentifier("a table name"));
    if (PeekSymbol(",")) {
      return MakeError(ErrorKind::kUnsupportedFeature,
                       "at position {}: multiple tables are not supported",
                       Peek().position);
    }
    if (AcceptKeyword("WHERE")) {
      EDSP_ASSIGN_OR_RETURN(select.where, ParseOr());
    }
    if (AcceptKeyword("GROUP")) {
      EDSP_RETURN_IF_ERROR(ExpectKeyword("BY"));
      do {
        EDSP_ASSIGN_OR_RETURN(auto column, ExpectIdentifier("a column name"));
        select.group_by.push_back(std::move(column));
      } while (AcceptSymbol(","));
    }
    if (AcceptKeyword("LIMIT")) {
      const Token& token = Peek();
      if (token.kind != TokenKind::kInteger || token.text.front() == '-') {
        return Unexpected("a non-negative integer");
      }
      int64_t limit = 0;
      auto [ptr, ec] =
          std::from_chars(token.text.data(), token.text.data() + token.text.size(), limit);
      if (ec != std::errc()) return SyntaxError(token.position, "LIMIT out of range");
      Advance();
      select.limit = limit;
    }
    return select;
  }

  Result<CreateExternalTableStatement> ParseCreate() {
    EDSP_RETURN_IF_ERROR(ExpectKeyword("CREATE"));
    EDSP_RETURN_IF_ERROR(ExpectKeyword("EXTERNAL"));
    EDSP_RETURN_IF_ERROR(ExpectKeyword("TABLE"));
    CreateExternalTableStatement create;
    EDSP_ASSIGN_OR_RETURN(create.name, ExpectIdentifier("a table name"));
    EDSP_RETURN_IF_ERROR(ExpectKeyword("LOCATION"));
    if (Peek().kind != TokenKind::kString) return Unexpected("a quoted location");
    create.location = Advance().text;
    EDSP_RETURN_IF_ERROR(ExpectKeyword("FORMAT"));
    const Token& format = Peek();
    if (format.kind != TokenKind::kIdentifier) return Unexpected("a format name");
    create.format = Upper(Advance().text);
    if (create.format != kExternalTableFormat) {
      return MakeError(ErrorKind::kUnsupportedFeature, "at position {}: format {} is not supported",
                       format.position, format.text);
    }
    return create;
  }

  Result<PredicatePtr> ParseOr() {
    EDSP_ASSIGN_OR_RETURN(auto lhs, ParseAnd());
    while (AcceptKeyword("OR")) {
      EDSP_ASSIGN_OR_RETURN(auto rhs, ParseAnd());
      lhs = Predicate::Or(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Result<PredicatePtr> ParseAnd() {
    EDSP_ASSIGN_OR_RETURN(auto lhs, ParseNot());
    while (AcceptKeyword("AND")) {
      EDSP_ASSIGN_OR_RETURN(auto rhs, ParseNot());
      lhs = Predicate::And(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Result<PredicatePtr> ParseNot() {
    if (AcceptKeyword("NOT")) {
      EDSP_ASSIGN_OR_RETURN(auto inner, ParseNot());
      return Negate(inner);
    }
    return ParsePrimary();
  }

  // Three-valued negation pushed down to the leaves; unknown stays unknown.
  static PredicatePtr Negate(const PredicatePtr& p) {
    switch (p->kind()) {
      case Predicate::Kind::kConstant:
        return Predicate::Constant(!p->constant());
      case Predicate::Kind::kIsNull:
        return Predicate::IsNotNull(p->column());
      case Predicate::Kind::kIsNotNull:
        return Predicate::IsNull(p->column());
      case Predicate::Kind::kAnd:
        return Predicate::Or(Negate(p->left()), Negate(p->right()));
      case Predicate::Kind::kOr:
        return Predicate::And(Negate(p->left()), Negate(p->right()));
      case Predicate::Kind::kCompare:
        break;
    }
    CompareOp op = CompareOp::kEq;
    switch (p->op()) {
      case CompareOp::kEq:
        op = CompareOp::kNe;
        break;
      case CompareOp::kNe:
        op = CompareOp::kEq;
        break;
      case CompareOp::kLt:
        op = CompareOp::kGe;
        break;
      case CompareOp::kLe:
        op = CompareOp::kGt;
        break;
      case CompareOp::kGt:
        op = CompareOp::kLe;
        break;
      case CompareOp::kGe:
        op = CompareOp::kLt;
        break;
    }
    return Predicate::Compare(p->column(), op, p->literal());
  }

  std::optional<CompareOp> AcceptCompareOp() {
    static constexpr std::pair<std::string_view, CompareOp> kOps[] = {
        {"=", CompareOp::kEq},  {"!=", CompareOp::kNe}, {"<>", CompareOp::kNe},
        {"<", CompareOp::kLt},  {"<=", CompareOp::kLe}, {">", CompareOp::kGt},
        {">=", CompareOp::kGe},
    };
    for (const auto& [text, op] : kOps) {
      if (AcceptSymbol(text)) return op;
    }
    return std::nullopt;
  }

  static CompareOp Flip(CompareOp op) {
    switch (op) {
      case CompareOp::kLt:
        return CompareOp::kGt;
      case CompareOp::kLe:
        return CompareOp::kGe;
      case CompareOp::kGt:
        return CompareOp::kLt;
      case CompareOp::kGe:
        return CompareOp::kLe;
      default:
        return op;
    }
  }

  bool PeekLiteral() const {
    const Token& token = Peek();
    return token.kind == TokenKind::kString || token.kind == TokenKind::kInteger ||
           token.kind == TokenKind::kFloat || PeekKeyword("NULL") ||
           PeekKeyword("TRUE") || PeekKeyword("FALSE");
  }

  Result<Value> ParseLiteral() {
    const Token& token = Peek();
    switch (token.kind) {
      case TokenKind::kString:
        return Value::String(Advance().text);
      case TokenKind::kInteger: {
        int64_t v = 0;
        std::string_view text = token.text;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc()) {
          return SyntaxError(token.position, fmt::format("integer {} out of range", text));
        }
        Advance();
        return Value::Int64(v);
      }
      case TokenKind::kFloat: {
        double v = 0;
        std::string_view text = token.text;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || !std::isfinite(v)) {
          return SyntaxError(token.position, fmt::format("number {} out of range", text));
        }
        Advance();
        return Value::Float64(v);
      }
      default:
        break;
    }
    if (AcceptKeyword("NULL")) return Value::Null();
    if (AcceptKeyword("TRUE")) return Value::Bool(true);
    if (AcceptKeyword("FALSE")) return Value::Bool(false);
    return Unexpected("a literal");
  }

  Result<PredicatePtr> ParsePrimary() {
    if (AcceptSymbol("(")) {
      EDSP_ASSIGN_OR_RETURN(auto inner, ParseOr());
      EDSP_RETURN_IF_ERROR(ExpectSymbol(")"));
      return inner;
    }
    if (PeekKeyword("TRUE") || PeekKeyword("FALSE")) {
      // A bare boolean constant unless it is the left side of a comparison.
      const Token& next = Peek(1);
      bool compared = next.kind == TokenKind::kSymbol && next.text != ")" &&
                      next.text != ";" && next.text != ",";
      if (!compared) {
        bool value = PeekKeyword("TRUE");
        Advance();
        return Predicate::Constant(value);
      }
    }
    if (PeekLiteral()) {
      EDSP_ASSIGN_OR_RETURN(auto literal, ParseLiteral());
      auto op = AcceptCompareOp();
      if (!op.has_value()) return Unexpected("a comparison operator");
      if (Peek().kind == TokenKind::kIdentifier && !IsReserved(Peek())) {
        std::string column = Advance().text;
        return Predicate::Compare(std::move(column), Flip(*op), std::move(literal));
      }
      if (PeekLiteral()) {
        return MakeError(ErrorKind::kUnsupportedFeature,
                         "at position {}: comparisons need a column operand",
                         Peek().position);
      }
      return Unexpected("a column name");
    }
    EDSP_ASSIGN_OR_RETURN(auto column, ExpectIdentifier("a column name or literal"));
    if (AcceptKeyword("IS")) {
      bool negated = AcceptKeyword("NOT");
      EDSP_RETURN_IF_ERROR(ExpectKeyword("NULL"));
      return negated ? Predicate::IsNotNull(std::move(column))
                     : Predicate::IsNull(std::move(column));
    }
    auto op = AcceptCompareOp();
    if (!op.has_value()) return Unexpected("a comparison operator or IS");
    if (PeekLiteral()) {
      EDSP_ASSIGN_OR_RETURN(auto literal, ParseLiteral());
      return Predicate::Compare(std::move(column), *op, std::move(literal));
    }
    if (Peek().kind == TokenKind::kIdentifier && !IsReserved(Peek())) {
      return MakeError(ErrorKind::kUnsupportedFeature,
                       "at position {}: column-to-column comparisons are not supported",
                       Peek().position);
    }
    return Unexpected("a literal");
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace

Result<Statement> ParseStatement(std::string_view sql) {
  EDSP_ASSIGN_OR_RETURN(auto tokens, Tokenize(sql));
  Parser parser(std::move(tokens));
  return parser.ParseStatement();
}

Result<PredicatePtr> ParsePredicate(std::string_view text) {
  EDSP_ASSIGN_OR_RETURN(auto tokens, Tokenize(text));
  Parser parser(std::move(tokens));
  return parser.ParseStandalonePredicate();
}

}  // namespace edsp
