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

// Five-level usefulness ratings and the append-only JSON Lines feedback log.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/dataset.hpp"
#include "insightgen/error.hpp"

namespace insightgen {

enum class Rating { kNotUsefulAtAll, kNotUseful, kNeutral, kUseful, kVeryUseful };

inline std::string_view to_string(Rating r) {
  switch (r) {
    case Rating::kNotUsefulAtAll: return "not_useful_at_all";
    case Rating::kNotUseful: return "not_useful";
    case Rating::kNeutral: return "neutral";
    case Rating::kUseful: return "useful";
    case Rating::kVeryUseful: return "very_useful";
  }
  return "?";
}

inline Rating rating_from_string(std::string_view s) {
  if (s == "not_useful_at_all") return Rating::kNotUsefulAtAll;
  if (s == "not_useful") return Rating::kNotUseful;
  if (s == "neutral") return Rating::kNeutral;
  if (s == "useful") return Rating::kUseful;
  if (s == "very_useful") return Rating::kVeryUseful;
  throw InputError("unknown rating '" + std::string(s) + "'");
}

/// Linear map onto {0, 0.25, 0.5, 0.75, 1}.
inline double rating_label(Rating r) { return static_cast<int>(r) * 0.25; }

struct FeedbackRecord {
  std::string candidate_id;
  Rating rating = Rating::kNeutral;
  std::string timestamp;  // ISO-8601

  bool operator==(const FeedbackRecord&) const = default;

  nlohmann::json to_json() const {
    return {{"candidate_id", candidate_id},
            {"rating", to_string(rating)},
            {"label", rating_label(rating)},
            {"timestamp", timestamp}};
  }

  static FeedbackRecord from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("feedback record must be a JSON object");
    FeedbackRecord r;
    try {
      r.candidate_id = j.at("candidate_id").get<std::string>();
      r.rating = rating_from_string(j.at("rating").get<std::string>());
      r.timestamp = j.value("timestamp", std::string());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("feedback record: ") + e.what());
    }
    if (!r.timestamp.empty() && !parse_timestamp(r.timestamp)) {
      throw InputError("feedback record: bad timestamp '" + r.timestamp + "'");
    }
    return r;
  }
};

inline std::string utc_now_iso() {
  const auto now = std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
  const auto days = std::chrono::floor<std::chrono::days>(now);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{now - days};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()), static_cast<long>(hms.subseconds().count()));
  return buf;
}

inline std::vector<FeedbackRecord> parse_feedback_lines(std::string_view text) {
  std::vector<FeedbackRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      out.push_back(FeedbackRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("feedback line " + std::to_string(line_no) + ": " + e.what(), e.byte);
    } catch (const InputError& e) {
      throw InputError("feedback line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// A missing file reads as an empty log.
inline std::vector<FeedbackRecord> read_feedback_log(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open feedback log '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_feedback_lines(text);
}

inline void append_feedback(const std::filesystem::path& path, const FeedbackRecord& record) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw RuntimeError("cannot open feedback log '" + path.string() + "' for append");
  out << record.to_json().dump() << '\n';
  out.flush();
  if (!out) throw RuntimeError("append to feedback log failed");
}

/// Latest record per candidate (by timestamp, later lines win ties).
inline std::map<std::string, FeedbackRecord> latest_feedback(const std::vector<FeedbackRecord>& records) {
  std::map<std::string, FeedbackRecord> latest;
  std::map<std::string, double> when;
  for (const auto& r : records) {
    const auto ts = parse_timestamp(r.timestamp);
    const double t = ts ? ts->utc_seconds : -1e300;
    const auto it = when.find(r.candidate_id);
    if (it == when.end() || t >= it->second) {
      when[r.candidate_id] = t;
      latest[r.candidate_id] = r;
    }
  }
  return latest;
}

}  // namespace insightgen
