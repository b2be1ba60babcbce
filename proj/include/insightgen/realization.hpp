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

// Surface realization: fill `{placeholder}` slots and conjugate
// `{tense(verb)}` / `{tense(verb,person)}` slots in insight templates.

#include <cctype>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "insightgen/error.hpp"

namespace insightgen {

enum class Tense { kPresent, kPast };

inline std::string_view to_string(Tense t) { return t == Tense::kPast ? "past" : "present"; }

inline Tense tense_from_string(std::string_view s) {
  if (s == "present") return Tense::kPresent;
  if (s == "past") return Tense::kPast;
  throw InputError("unknown tense '" + std::string(s) + "'");
}

/// person 2 addresses the user, person 3 refers to the measurement.
struct VerbSpec {
  std::string lemma;
  int person = 3;
  Tense tense = Tense::kPresent;
};

namespace detail {

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::size_t vowel_groups(std::string_view s) {
  std::size_t groups = 0;
  bool prev = false;
  for (char c : s) {
    const bool v = is_vowel(c);
    if (v && !prev) ++groups;
    prev = v;
  }
  return groups;
}

struct IrregularForms {
  std::string_view present2, present3, past2, past3;
};

inline const std::unordered_map<std::string_view, IrregularForms>& irregular_verbs() {
  static const std::unordered_map<std::string_view, IrregularForms> table = {
      {"be", {"are", "is", "were", "was"}},
      {"have", {"have", "has", "had", "had"}},
      {"do", {"do", "does", "did", "did"}},
      {"go", {"go", "goes", "went", "went"}},
      {"sleep", {"sleep", "sleeps", "slept", "slept"}},
      {"spend", {"spend", "spends", "spent", "spent"}},
      {"take", {"take", "takes", "took", "took"}},
      {"get", {"get", "gets", "got", "got"}},
      {"make", {"make", "makes", "made", "made"}},
      {"run", {"run", "runs", "ran", "ran"}},
      {"see", {"see", "sees", "saw", "saw"}},
      {"eat", {"eat", "eats", "ate", "ate"}},
      {"give", {"give", "gives", "gave", "gave"}},
      {"come", {"come", "comes", "came", "came"}},
      {"feel", {"feel", "feels", "felt", "felt"}},
      {"keep", {"keep", "keeps", "kept", "kept"}},
  };
  return table;
}

inline std::string third_person_present(const std::string& lemma) {
  if (ends_with(lemma, "s") || ends_with(lemma, "x") || ends_with(lemma, "z") ||
      ends_with(lemma, "ch") || ends_with(lemma, "sh") || ends_with(lemma, "o")) {
    return lemma + "es";
  }
  if (lemma.size() >= 2 && lemma.back() == 'y' && !is_vowel(lemma[lemma.size() - 2])) {
    return lemma.substr(0, lemma.size() - 1) + "ies";
  }
  return lemma + "s";
}

inline std::string regular_past(const std::string& lemma) {
  if (ends_with(lemma, "e")) return lemma + "d";
  const std::size_t n = lemma.size();
  if (n >= 2 && lemma.back() == 'y' && !is_vowel(lemma[n - 2])) {
    return lemma.substr(0, n - 1) + "ied";
  }
  // single-syllable consonant-vowel-consonant: stop -> stopped
  if (n >= 3 && !is_vowel(lemma[n - 1]) && is_vowel(lemma[n - 2]) && !is_vowel(lemma[n - 3]) &&
      lemma[n - 1] != 'w' && lemma[n - 1] != 'x' && lemma[n - 1] != 'y' && vowel_groups(lemma) == 1) {
    return lemma + lemma.back() + "ed";
  }
  return lemma + "ed";
}

}  // namespace detail

/// Conjugate a lowercase lemma. Verbs outside the irregular table follow the
/// regular -s/-es and -ed rules.
inline std::string conjugate(const VerbSpec& verb) {
  const bool third = verb.person == 3;
  const auto& irregular = detail::irregular_verbs();
  if (const auto it = irregular.find(verb.lemma); it != irregular.end()) {
    const auto& f = it->second;
    if (verb.tense == Tense::kPresent) return std::string(third ? f.present3 : f.present2);
    return std::string(third ? f.past3 : f.past2);
  }
  if (verb.tense == Tense::kPast) return detail::regular_past(verb.lemma);
  return third ? detail::third_person_present(verb.lemma) : verb.lemma;
}

// ---------------------------------------------------------------------------
// numbers

/// Round half to even at `decimals` places.
inline double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(value * scale);
  std::fesetround(saved);
  return r / scale;
}

inline std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) return "n/a";
  const double r = round_half_even(value, decimals);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r == 0.0 ? 0.0 : r);
  return buf;
}

/// Relative difference of a from b in percent, as a magnitude: 100(b-a)/b
/// when a < b, 100(a-b)/b when a > b. Rounded half-even to 2 decimals.
inline double percent_diff(double a, double b) {
  if (b == 0.0) throw InputError("percent_diff: reference value is zero");
  const double raw = a < b ? 100.0 * (b - a) / b : 100.0 * (a - b) / b;
  return round_half_even(raw, 2);
}

/// A number rendered as `value suffix`, optionally wrapped in parentheses.
struct Quantity {
  double value = 0.0;
  int decimals = 2;
  std::string suffix;  // e.g. " hours", "%"
  bool parenthesized = false;

  std::string render() const {
    std::string s = format_fixed(value, decimals) + suffix;
    return parenthesized ? "(" + s + ")" : s;
  }
};

using BindingValue = std::variant<std::string, Quantity>;
using RealizationBinding = std::map<std::string, BindingValue, std::less<>>;

// ---------------------------------------------------------------------------
// templates

struct TemplatePiece {
  enum class Kind { kLiteral, kPlaceholder, kVerb };
  Kind kind = Kind::kLiteral;
  std::string text;  // literal text, placeholder name, or verb lemma
  int person = 3;
  std::size_t position = 0;
};

/// Split a template into literals, placeholders and verb slots.
inline std::vector<TemplatePiece> parse_template(std::string_view tpl) {
  std::vector<TemplatePiece> pieces;
  std::string literal;
  std::size_t literal_start = 0;
  auto flush = [&] {
    if (!literal.empty()) {
      pieces.push_back({TemplatePiece::Kind::kLiteral, std::move(literal), 3, literal_start});
      literal.clear();
    }
  };
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    const char c = tpl[i];
    if (c == '}') throw ParseError("template: unmatched '}'", i);
    if (c != '{') {
      if (literal.empty()) literal_start = i;
      literal.push_back(c);
      continue;
    }
    const std::size_t close = tpl.find('}', i + 1);
    if (close == std::string_view::npos) throw ParseError("template: unterminated '{'", i);
    std::string_view body = tpl.substr(i + 1, close - i - 1);
    if (body.find('{') != std::string_view::npos) throw ParseError("template: nested '{'", i);
    while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
    while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
    if (body.empty()) throw ParseError("template: empty placeholder", i);
    flush();
    TemplatePiece piece;
    piece.position = i;
    if (body.substr(0, 6) == "tense(") {
      if (body.back() != ')') throw ParseError("template: malformed tense() slot", i);
      std::string_view args = body.substr(6, body.size() - 7);
      std::string_view lemma = args;
      if (const auto comma = args.find(','); comma != std::string_view::npos) {
        lemma = args.substr(0, comma);
        std::string_view person = args.substr(comma + 1);
        while (!person.empty() && person.front() == ' ') person.remove_prefix(1);
        if (person == "2") {
          piece.person = 2;
        } else if (person == "3") {
          piece.person = 3;
        } else {
          throw ParseError("template: tense() person must be 2 or 3", i);
        }
      }
      while (!lemma.empty() && lemma.back() == ' ') lemma.remove_suffix(1);
      if (lemma.empty()) throw ParseError("template: tense() needs a verb", i);
      for (char ch : lemma) {
        if (!std::islower(static_cast<unsigned char>(ch))) {
          throw ParseError("template: verb lemma must be lowercase letters", i);
        }
      }
      piece.kind = TemplatePiece::Kind::kVerb;
      piece.text = std::string(lemma);
    } else {
      for (char ch : body) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == ':')) {
          throw ParseError("template: invalid placeholder name '" + std::string(body) + "'", i);
        }
      }
      piece.kind = TemplatePiece::Kind::kPlaceholder;
      piece.text = std::string(body);
    }
    pieces.push_back(std::move(piece));
    i = close;
  }
  flush();
  return pieces;
}

enum class Capitalization { kSentence, kNone };

/// Fill a template. Whitespace runs collapse to one space; sentences get an
/// initial capital unless `cap` is kNone (for fragments).
inline std::string realize(std::string_view tpl, const RealizationBinding& binding, Tense tense,
                           Capitalization cap = Capitalization::kSentence) {
  std::string raw;
  for (const auto& piece : parse_template(tpl)) {
    switch (piece.kind) {
      case TemplatePiece::Kind::kLiteral:
        raw += piece.text;
        break;
      case TemplatePiece::Kind::kVerb:
        raw += conjugate({piece.text, piece.person, tense});
        break;
      case TemplatePiece::Kind::kPlaceholder: {
        const auto it = binding.find(piece.text);
        if (it == binding.end()) {
          throw InputError("template: no binding for placeholder {" + piece.text + "}");
        }
        if (const auto* s = std::get_if<std::string>(&it->second)) {
          raw += *s;
        } else {
          raw += std::get<Quantity>(it->second).render();
        }
        break;
      }
    }
  }
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  if (cap == Capitalization::kSentence) {
    for (char& c : out) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        break;
      }
    }
  }
  return out;
}

}  // namespace insightgen
