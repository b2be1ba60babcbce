// Copyright 2026 The insightgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Context filter expressions: a conjunction of `column op literal`
// predicates, e.g. "ts_weekday == 'Mon' and ts_hour < 12" or
// "physician in ['P1', 'P2']".

#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "insightgen/error.hpp"

namespace insightgen {

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe, kIn };

using Literal = std::variant<double, std::string>;

struct Predicate {
  std::string column;
  CompareOp op = CompareOp::kEq;
  std::vector<Literal> values;  // one value unless op == kIn
  std::size_t position = 0;     // offset of the column name in the source

  bool operator==(const Predicate&) const = default;
};

struct FilterExpr {
  std::vector<Predicate> predicates;  // empty means "match every row"
  std::string source;

  bool operator==(const FilterExpr&) const = default;
};

inline std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "==";
    case CompareOp::kNe: return "!=";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
    case CompareOp::kIn: return "in";
  }
  return "?";
}

namespace detail {

class FilterParser {
 public:
  explicit FilterParser(std::string_view text) : text_(text) {}

  FilterExpr parse() {
    FilterExpr expr;
    expr.source = std::string(text_);
    skip_space();
    if (at_end()) return expr;
    if (peek_word() == "true") {
      pos_ += 4;
      skip_space();
      if (!at_end()) fail("unexpected input after 'true'");
      return expr;
    }
    for (;;) {
      expr.predicates.push_back(parse_predicate());
      skip_space();
      if (at_end()) break;
      if (!lower_equals(peek_word(), "and")) fail("expected 'and' or end of filter");
      pos_ += 3;
      skip_space();
    }
    return expr;
  }

 private:
  Predicate parse_predicate() {
    Predicate pred;
    pred.position = pos_;
    pred.column = parse_identifier();
    skip_space();
    pred.op = parse_operator();
    skip_space();
    if (pred.op == CompareOp::kIn) {
      pred.values = parse_list();
    } else {
      pred.values.push_back(parse_literal());
    }
    return pred;
  }

  std::string parse_identifier() {
    const std::size_t start = pos_;
    if (at_end() || !(std::isalpha(uc(text_[pos_])) || text_[pos_] == '_')) {
      fail("expected column name");
    }
    while (!at_end() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  CompareOp parse_operator() {
    const std::size_t start = pos_;
    if (lower_equals(peek_word(), "in")) {
      pos_ += 2;
      return CompareOp::kIn;
    }
    while (!at_end() && is_op_char(text_[pos_])) ++pos_;
    const std::string_view op = text_.substr(start, pos_ - start);
    if (op == "==") return CompareOp::kEq;
    if (op == "!=") return CompareOp::kNe;
    if (op == "<") return CompareOp::kLt;
    if (op == "<=") return CompareOp::kLe;
    if (op == ">") return CompareOp::kGt;
    if (op == ">=") return CompareOp::kGe;
    pos_ = start;
    if (op.empty()) fail("expected comparison operator");
    fail("unknown operator '" + std::string(op) + "'");
  }

  std::vector<Literal> parse_list() {
    if (at_end() || (text_[pos_] != '[' && text_[pos_] != '(')) fail("expected '[' after 'in'");
    const char close = text_[pos_] == '[' ? ']' : ')';
    ++pos_;
    std::vector<Literal> values;
    skip_space();
    if (!at_end() && text_[pos_] == close) fail("empty 'in' list");
    for (;;) {
      skip_space();
      values.push_back(parse_literal());
      skip_space();
      if (at_end()) fail("unterminated 'in' list");
      if (text_[pos_] == close) {
        ++pos_;
        break;
      }
      if (text_[pos_] != ',') fail("expected ',' in list");
      ++pos_;
    }
    return values;
  }

  Literal parse_literal() {
    if (at_end()) fail("expected literal");
    const char c = text_[pos_];
    if (c == '\'' || c == '"') {
      const std::size_t start = pos_++;
      std::string out;
      for (;;) {
        if (at_end()) {
          pos_ = start;
          fail("unterminated string literal");
        }
        const char ch = text_[pos_++];
        if (ch == c) {
          if (!at_end() && text_[pos_] == c) {  // doubled quote
            out.push_back(c);
            ++pos_;
            continue;
          }
          break;
        }
        out.push_back(ch);
      }
      return out;
    }
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '.' ||
                         text_[pos_] == '-' || text_[pos_] == '+')) {
      ++pos_;
    }
    const std::string_view tok = text_.substr(start, pos_ - start);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      pos_ = start;
      fail("expected number or quoted string");
    }
    return value;
  }

  static bool is_op_char(char c) { return c == '=' || c == '!' || c == '<' || c == '>' || c == '~'; }
  static unsigned char uc(char c) { return static_cast<unsigned char>(c); }
  static bool lower_equals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::tolower(uc(a[i])) != b[i]) return false;
    }
    return true;
  }

  std::string_view peek_word() const {
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(uc(text_[end])) || text_[end] == '_')) ++end;
    return text_.substr(pos_, end - pos_);
  }

  void skip_space() {
    while (!at_end() && std::isspace(uc(text_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("filter: " + msg, pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse a filter; throws ParseError with the offending offset.
inline FilterExpr parse_filter(std::string_view text) { return detail::FilterParser(text).parse(); }

}  // namespace insightgen
