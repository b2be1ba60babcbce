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

// Tabular data: CSV ingestion with declared column types, derived temporal
// columns, filter binding, and per-context sample extraction.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/error.hpp"
#include "insightgen/filter.hpp"

namespace insightgen {

enum class ColumnType { kNumeric, kCategorical, kTimestamp };

inline std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::kNumeric: return "numeric";
    case ColumnType::kCategorical: return "categorical";
    case ColumnType::kTimestamp: return "timestamp";
  }
  return "?";
}

inline ColumnType column_type_from_string(std::string_view s) {
  if (s == "numeric") return ColumnType::kNumeric;
  if (s == "categorical") return ColumnType::kCategorical;
  if (s == "timestamp") return ColumnType::kTimestamp;
  throw InputError("unknown column type '" + std::string(s) + "'");
}

enum class TimeUnit { kSeconds, kMinutes, kHours, kDays };

inline double seconds_per(TimeUnit u) {
  switch (u) {
    case TimeUnit::kSeconds: return 1.0;
    case TimeUnit::kMinutes: return 60.0;
    case TimeUnit::kHours: return 3600.0;
    case TimeUnit::kDays: return 86400.0;
  }
  return 1.0;
}

inline std::string_view to_string(TimeUnit u) {
  switch (u) {
    case TimeUnit::kSeconds: return "seconds";
    case TimeUnit::kMinutes: return "minutes";
    case TimeUnit::kHours: return "hours";
    case TimeUnit::kDays: return "days";
  }
  return "?";
}

inline TimeUnit time_unit_from_string(std::string_view s) {
  if (s == "seconds") return TimeUnit::kSeconds;
  if (s == "minutes") return TimeUnit::kMinutes;
  if (s == "hours") return TimeUnit::kHours;
  if (s == "days") return TimeUnit::kDays;
  throw InputError("unknown time unit '" + std::string(s) + "'");
}

/// Column typing for one CSV file. Undeclared columns load as categorical.
struct IngestConfig {
  std::map<std::string, ColumnType> column_types;
  std::string primary_timestamp;
  TimeUnit time_unit = TimeUnit::kHours;

  static IngestConfig from_json(const nlohmann::json& j) {
    IngestConfig cfg;
    if (j.contains("columns")) {
      for (const auto& [name, type] : j.at("columns").items()) {
        cfg.column_types[name] = column_type_from_string(type.get<std::string>());
      }
    }
    cfg.primary_timestamp = j.value("primary_timestamp", std::string());
    cfg.time_unit = time_unit_from_string(j.value("time_unit", std::string("hours")));
    return cfg;
  }

  nlohmann::json to_json() const {
    nlohmann::json cols = nlohmann::json::object();
    for (const auto& [name, type] : column_types) cols[name] = std::string(to_string(type));
    return {{"columns", cols},
            {"primary_timestamp", primary_timestamp},
            {"time_unit", std::string(to_string(time_unit))}};
  }
};

// ---------------------------------------------------------------------------
// timestamps

struct ParsedTimestamp {
  double utc_seconds = 0.0;
  unsigned weekday = 0;  // 0 = Sunday, wall clock
  int hour = 0;          // wall clock
};

namespace detail {

inline bool read_int(std::string_view s, std::size_t& pos, std::size_t digits, int& out) {
  if (pos + digits > s.size()) return false;
  const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + digits, out);
  if (ec != std::errc() || ptr != s.data() + pos + digits) return false;
  pos += digits;
  return true;
}

}  // namespace detail

/// ISO-8601 date or date-time: YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM].
inline std::optional<ParsedTimestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  double frac = 0.0;
  if (!detail::read_int(s, pos, 4, y) || pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!detail::read_int(s, pos, 2, mo) || pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!detail::read_int(s, pos, 2, d)) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  int offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (!detail::read_int(s, pos, 2, h) || pos >= s.size() || s[pos++] != ':') return std::nullopt;
    if (!detail::read_int(s, pos, 2, mi)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!detail::read_int(s, pos, 2, sec)) return std::nullopt;
      if (pos < s.size() && s[pos] == '.') {
        const std::size_t start = pos;
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start + 1) return std::nullopt;
        std::from_chars(s.data() + start, s.data() + pos, frac);
      }
    }
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    if (pos < s.size()) {
      if (s[pos] == 'Z') {
        ++pos;
      } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh = 0, om = 0;
        if (!detail::read_int(s, pos, 2, oh)) return std::nullopt;
        if (pos < s.size() && s[pos] == ':') ++pos;
        if (!detail::read_int(s, pos, 2, om)) return std::nullopt;
        offset_minutes = sign * (oh * 60 + om);
      }
    }
  }
  if (pos != s.size()) return std::nullopt;
  const sys_days days{ymd};
  const double local = static_cast<double>(days.time_since_epoch().count()) * 86400.0 + h * 3600.0 +
                       mi * 60.0 + sec + frac;
  ParsedTimestamp out;
  out.utc_seconds = local - offset_minutes * 60.0;
  out.weekday = weekday{days}.c_encoding();
  out.hour = h;
  return out;
}

inline std::string_view weekday_abbrev(unsigned c_encoding) {
  static constexpr std::string_view kNames[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
  return kNames[c_encoding % 7];
}

/// morning [6,12), afternoon [12,18), evening [18,24), night [0,6).
inline std::string_view part_of_day(int hour) {
  if (hour >= 6 && hour < 12) return "morning";
  if (hour >= 12 && hour < 18) return "afternoon";
  if (hour >= 18) return "evening";
  return "night";
}

// ---------------------------------------------------------------------------
// CSV

/// RFC 4180 records. Quoted fields may hold separators, newlines and "".
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError("csv: stray quote on line " + std::to_string(line), i);
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("csv: unterminated quoted field", text.size());
  if (field_started || !record.empty()) end_record();
  return records;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// ---------------------------------------------------------------------------
// Table

struct Column {
  std::string name;
  ColumnType type = ColumnType::kCategorical;
  std::vector<double> numbers;      // numeric and timestamp (in time units); NaN = missing
  std::vector<std::string> labels;  // categorical; "" = missing

  bool missing(std::size_t row) const {
    return type == ColumnType::kCategorical ? labels[row].empty() : std::isnan(numbers[row]);
  }
};

class Table {
 public:
  std::size_t rows() const { return rows_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::string& primary_timestamp() const { return primary_timestamp_; }
  TimeUnit time_unit() const { return time_unit_; }

  const Column* find(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &columns_[it->second];
  }

  const Column& column(std::string_view name) const {
    if (const Column* c = find(name)) return *c;
    throw InputError("unknown column '" + std::string(name) + "'");
  }

  /// Builds a table from already-split records (header first).
  static Table from_records(const std::vector<std::vector<std::string>>& records,
                            const IngestConfig& config);

 private:
  void add_column(Column col) {
    if (index_.count(col.name)) throw InputError("duplicate column name '" + col.name + "'");
    index_.emplace(col.name, columns_.size());
    columns_.push_back(std::move(col));
  }

  std::vector<Column> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t rows_ = 0;
  std::string primary_timestamp_;
  TimeUnit time_unit_ = TimeUnit::kHours;
};

namespace detail {

inline bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

}  // namespace detail

inline Table Table::from_records(const std::vector<std::vector<std::string>>& records,
                                 const IngestConfig& config) {
  if (records.empty()) throw InputError("csv: missing header row");
  const auto& header = records.front();
  Table table;
  table.rows_ = records.size() - 1;
  table.time_unit_ = config.time_unit;
  const double unit = seconds_per(config.time_unit);

  for (const auto& [name, type] : config.column_types) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw InputError("declared column '" + name + "' not in header");
    }
  }

  std::vector<Column> derived;
  for (std::size_t c = 0; c < header.size(); ++c) {
    Column col;
    col.name = header[c];
    if (const auto it = config.column_types.find(col.name); it != config.column_types.end()) {
      col.type = it->second;
    }
    Column weekday{col.name + "_weekday", ColumnType::kCategorical, {}, {}};
    Column hour{col.name + "_hour", ColumnType::kNumeric, {}, {}};
    Column pod{col.name + "_part_of_day", ColumnType::kCategorical, {}, {}};
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].size() != header.size()) {
        throw InputError("csv: row " + std::to_string(r) + " has " +
                         std::to_string(records[r].size()) + " fields, header has " +
                         std::to_string(header.size()));
      }
      const std::string& cell = records[r][c];
      auto cell_error = [&] {
        return InputError("unparseable cell at row " + std::to_string(r) + ", column \"" +
                          col.name + "\": '" + cell + "'");
      };
      switch (col.type) {
        case ColumnType::kCategorical:
          col.labels.push_back(detail::is_missing_token(cell) ? std::string() : cell);
          break;
        case ColumnType::kNumeric: {
          if (detail::is_missing_token(cell)) {
            col.numbers.push_back(std::numeric_limits<double>::quiet_NaN());
            break;
          }
          double v = 0.0;
          const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
          if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
            throw cell_error();
          }
          col.numbers.push_back(v);
          break;
        }
        case ColumnType::kTimestamp: {
          if (detail::is_missing_token(cell)) {
            col.numbers.push_back(std::numeric_limits<double>::quiet_NaN());
            weekday.labels.emplace_back();
            hour.numbers.push_back(std::numeric_limits<double>::quiet_NaN());
            pod.labels.emplace_back();
            break;
          }
          const auto ts = parse_timestamp(cell);
          if (!ts) throw cell_error();
          col.numbers.push_back(ts->utc_seconds / unit);
          weekday.labels.emplace_back(weekday_abbrev(ts->weekday));
          hour.numbers.push_back(ts->hour);
          pod.labels.emplace_back(part_of_day(ts->hour));
          break;
        }
      }
    }
    if (col.type == ColumnType::kTimestamp) {
      derived.push_back(std::move(weekday));
      derived.push_back(std::move(hour));
      derived.push_back(std::move(pod));
    }
    table.add_column(std::move(col));
  }
  for (auto& col : derived) table.add_column(std::move(col));

  if (!config.primary_timestamp.empty()) {
    const Column& ts = table.column(config.primary_timestamp);
    if (ts.type != ColumnType::kTimestamp) {
      throw InputError("primary timestamp '" + config.primary_timestamp + "' is not a timestamp column");
    }
    table.primary_timestamp_ = config.primary_timestamp;
  }
  return table;
}

inline Table parse_table(std::string_view csv_text, const IngestConfig& config) {
  return Table::from_records(parse_csv(csv_text), config);
}

inline Table load_table(const std::string& path, const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str(), config);
}

// ---------------------------------------------------------------------------
// filter evaluation

class BoundFilter {
 public:
  bool matches(std::size_t row) const {
    for (const auto& p : predicates_) {
      if (!p.matches(row)) return false;
    }
    return true;
  }

 private:
  friend BoundFilter bind_filter(const Table&, const FilterExpr&);

  struct Bound {
    const Column* column;
    CompareOp op;
    std::vector<double> numbers;
    std::vector<std::string> labels;

    bool matches(std::size_t row) const {
      if (column->missing(row)) return false;
      if (column->type == ColumnType::kCategorical) {
        const std::string& v = column->labels[row];
        switch (op) {
          case CompareOp::kEq: return v == labels.front();
          case CompareOp::kNe: return v != labels.front();
          case CompareOp::kIn: return std::find(labels.begin(), labels.end(), v) != labels.end();
          default: return false;
        }
      }
      const double v = column->numbers[row];
      switch (op) {
        case CompareOp::kEq: return v == numbers.front();
        case CompareOp::kNe: return v != numbers.front();
        case CompareOp::kLt: return v < numbers.front();
        case CompareOp::kLe: return v <= numbers.front();
        case CompareOp::kGt: return v > numbers.front();
        case CompareOp::kGe: return v >= numbers.front();
        case CompareOp::kIn: return std::find(numbers.begin(), numbers.end(), v) != numbers.end();
      }
      return false;
    }
  };

  std::vector<Bound> predicates_;
};

/// Resolve columns and check literal types. Throws InputError on mismatch.
inline BoundFilter bind_filter(const Table& table, const FilterExpr& filter) {
  BoundFilter bound;
  const double unit = seconds_per(table.time_unit());
  for (const auto& pred : filter.predicates) {
    const Column* col = table.find(pred.column);
    if (!col) {
      throw InputError("filter '" + filter.source + "' references unknown column '" + pred.column + "'");
    }
    BoundFilter::Bound b{col, pred.op, {}, {}};
    auto mismatch = [&](std::string_view expected) {
      return InputError("filter '" + filter.source + "': column '" + pred.column + "' is " +
                        std::string(to_string(col->type)) + ", expected " + std::string(expected) +
                        " literal");
    };
    for (const auto& lit : pred.values) {
      switch (col->type) {
        case ColumnType::kCategorical:
          if (!std::holds_alternative<std::string>(lit)) throw mismatch("string");
          b.labels.push_back(std::get<std::string>(lit));
          break;
        case ColumnType::kNumeric:
          if (!std::holds_alternative<double>(lit)) throw mismatch("numeric");
          b.numbers.push_back(std::get<double>(lit));
          break;
        case ColumnType::kTimestamp:
          if (std::holds_alternative<double>(lit)) {
            b.numbers.push_back(std::get<double>(lit));
          } else {
            const auto ts = parse_timestamp(std::get<std::string>(lit));
            if (!ts) throw mismatch("ISO-8601 timestamp");
            b.numbers.push_back(ts->utc_seconds / unit);
          }
          break;
      }
    }
    if (col->type == ColumnType::kCategorical && pred.op != CompareOp::kEq &&
        pred.op != CompareOp::kNe && pred.op != CompareOp::kIn) {
      throw InputError("filter '" + filter.source + "': operator " + std::string(to_string(pred.op)) +
                       " not defined for categorical column '" + pred.column + "'");
    }
    bound.predicates_.push_back(std::move(b));
  }
  return bound;
}

/// Row indices (ascending) matching every predicate.
inline std::vector<std::size_t> match_rows(const Table& table, const FilterExpr& filter) {
  const BoundFilter bound = bind_filter(table, filter);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (bound.matches(r)) rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// samples

/// Measurement values of one context. `mean` is 0 when there are no values.
struct SampleSet {
  std::vector<double> values;
  std::size_t n_rec = 0;
  double time_span = 0.0;  // T, in the table's time unit
  double mean = 0.0;
};

/// Samples from precomputed matching rows. Missing measurement values are
/// dropped; T spans every matched row's primary timestamp.
inline SampleSet extract_samples(const Table& table, std::span<const std::size_t> rows,
                                 std::string_view measurement_column) {
  const Column* col = table.find(measurement_column);
  if (!col) throw InputError("measurement column '" + std::string(measurement_column) + "' missing");
  if (col->type != ColumnType::kNumeric) {
    throw InputError("measurement column '" + std::string(measurement_column) + "' is not numeric");
  }
  const Column* ts = table.primary_timestamp().empty() ? nullptr : table.find(table.primary_timestamp());

  SampleSet out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t stamped = 0;
  double sum = 0.0;
  for (const std::size_t r : rows) {
    if (ts && !std::isnan(ts->numbers[r])) {
      lo = std::min(lo, ts->numbers[r]);
      hi = std::max(hi, ts->numbers[r]);
      ++stamped;
    }
    const double v = col->numbers[r];
    if (std::isnan(v)) continue;
    out.values.push_back(v);
    sum += v;
  }
  out.n_rec = out.values.size();
  out.mean = out.n_rec > 0 ? sum / static_cast<double>(out.n_rec) : 0.0;
  out.time_span = stamped >= 2 ? hi - lo : 0.0;
  return out;
}

inline SampleSet extract_samples(const Table& table, const FilterExpr& filter,
                                 std::string_view measurement_column) {
  const auto rows = match_rows(table, filter);
  return extract_samples(table, rows, measurement_column);
}

}  // namespace insightgen
