// Copyright 2026 The fairrank Authors
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

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "fairrank/core.hpp"
#include "fairrank/csv.hpp"

namespace fairrank {

struct ProjectDataset {
  std::string name;
  std::vector<Reviewer> roster;
  /// Ascending by (timestamp, review_id).
  std::vector<ReviewRecord> records;
  double unknown_name_rate = 0.0;
};

struct SplitDataset {
  std::vector<ReviewRecord> train;
  std::vector<ReviewRecord> test;
};

enum class RosterFormat { csv, json };

inline const std::vector<std::string> kReviewersHeader = {"id", "name", "gender",
                                                          "gender_source"};
inline const std::vector<std::string> kReviewsHeader = {"review_id", "timestamp", "file_paths",
                                                        "subject", "actual_reviewers"};

namespace detail {

inline Reviewer make_reviewer(std::string id, std::string name, std::string_view gender,
                              std::string_view source, const std::string& where) {
  if (id.empty()) throw InputError(where + ": empty reviewer id");
  auto g = parse_gender(gender);
  if (!g) throw InputError(where + ": unrecognized gender '" + std::string(gender) + "'");
  Reviewer r{std::move(id), std::move(name), *g, GenderSource::unresolved};
  if (source.empty()) {
    r.gender_source = *g == Gender::unknown ? GenderSource::unresolved : GenderSource::dataset;
  } else {
    auto s = parse_gender_source(source);
    if (!s) throw InputError(where + ": unrecognized gender_source '" + std::string(source) + "'");
    r.gender_source = *s;
  }
  if (r.gender_source == GenderSource::inferred_api && r.gender == Gender::unknown) {
    throw InputError(where + ": gender_source inferred_api requires a known gender");
  }
  return r;
}

}  // namespace detail

/// Reads a reviewer roster. CSV needs the `id,name,gender,gender_source`
/// header; JSON is an array of objects with the same keys.
inline std::vector<Reviewer> parse_reviewers(std::istream& in, RosterFormat format) {
  std::vector<Reviewer> out;
  std::unordered_set<std::string> seen;
  auto add = [&](Reviewer r) {
    if (!seen.insert(r.id).second) throw InputError("duplicate reviewer id " + r.id);
    out.push_back(std::move(r));
  };
  if (format == RosterFormat::csv) {
    for (auto& row : csv::read(in, kReviewersHeader, "reviewers")) {
      add(detail::make_reviewer(std::move(row.fields[0]), std::move(row.fields[1]),
                                row.fields[2], row.fields[3],
                                "reviewers: row " + std::to_string(row.line)));
    }
    return out;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("reviewers: invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("reviewers: expected a JSON array");
  std::size_t row = 0;
  for (const auto& obj : doc) {
    ++row;
    const std::string where = "reviewers: row " + std::to_string(row);
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) {
      throw InputError(where + ": expected an object with a string id");
    }
    auto str = [&](const char* key) -> std::string {
      if (!obj.contains(key) || obj[key].is_null()) return {};
      if (!obj[key].is_string()) throw InputError(where + ": field " + key + " must be a string");
      return obj[key].get<std::string>();
    };
    add(detail::make_reviewer(obj["id"].get<std::string>(), str("name"), str("gender"),
                              str("gender_source"), where));
  }
  return out;
}

/// Reads review records; `file_paths` and `actual_reviewers` are
/// `;`-separated.
inline std::vector<ReviewRecord> parse_reviews(std::istream& in) {
  std::vector<ReviewRecord> out;
  std::unordered_set<std::string> seen;
  for (auto& row : csv::read(in, kReviewsHeader, "reviews")) {
    const std::string where = "reviews: row " + std::to_string(row.line);
    ReviewRecord r;
    r.review_id = std::move(row.fields[0]);
    if (r.review_id.empty()) throw InputError(where + ": empty review_id");
    if (!seen.insert(r.review_id).second) {
      throw InputError(where + ": duplicate review_id " + r.review_id);
    }
    if (!csv::parse_number(row.fields[1], r.timestamp)) {
      throw InputError(where + ": timestamp '" + row.fields[1] + "' is not an integer");
    }
    r.file_paths = csv::split_list(row.fields[2], ';');
    if (r.file_paths.empty()) throw InputError(where + ": no file paths");
    r.subject = std::move(row.fields[3]);
    r.actual_reviewers = csv::split_list(row.fields[4], ';');
    std::sort(r.actual_reviewers.begin(), r.actual_reviewers.end());
    r.actual_reviewers.erase(std::unique(r.actual_reviewers.begin(), r.actual_reviewers.end()),
                             r.actual_reviewers.end());
    if (r.actual_reviewers.empty()) throw InputError(where + ": no actual reviewers");
    out.push_back(std::move(r));
  }
  return out;
}

/// Characters tolerated in real names besides letters and whitespace.
struct NicknamePolicy {
  std::u32string extra_allowed = U"-'.";
};

/// A name is treated as a nickname (and so carries no usable gender signal)
/// when it contains a digit, or any character that is not a letter,
/// whitespace, or one of the policy's punctuation marks. Blank names count
/// as nicknames.
inline bool is_nickname(std::string_view name, const NicknamePolicy& policy = {}) {
  const auto* p = reinterpret_cast<const uint8_t*>(name.data());
  const auto len = static_cast<int32_t>(name.size());
  bool any_letter = false;
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) return true;
    if (u_isdigit(c)) return true;
    if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC)) {
      any_letter = true;
      continue;
    }
    if (u_isUWhiteSpace(c)) continue;
    if (policy.extra_allowed.find(static_cast<char32_t>(c)) != std::u32string::npos) continue;
    return true;
  }
  return !any_letter;
}

/// A reviewer is "unknown" if their name is blank or a nickname, or their
/// gender is unresolved.
inline bool is_unknown_reviewer(const Reviewer& r, const NicknamePolicy& policy = {}) {
  return r.gender == Gender::unknown || is_nickname(r.display_name, policy);
}

inline double compute_unknown_rate(std::span<const Reviewer> roster,
                                   const NicknamePolicy& policy = {}) {
  if (roster.empty()) throw InputError("cannot compute unknown rate of an empty roster");
  const auto unknown = std::count_if(roster.begin(), roster.end(), [&](const Reviewer& r) {
    return is_unknown_reviewer(r, policy);
  });
  return static_cast<double>(unknown) / static_cast<double>(roster.size());
}

inline void sort_records(std::vector<ReviewRecord>& records) {
  std::sort(records.begin(), records.end(), [](const ReviewRecord& a, const ReviewRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.review_id < b.review_id;
  });
}

/// Builds a dataset with sorted records and the unknown rate of `roster`.
inline ProjectDataset make_project(std::string name, std::vector<Reviewer> roster,
                                   std::vector<ReviewRecord> records,
                                   const NicknamePolicy& policy = {}) {
  ProjectDataset p;
  p.name = std::move(name);
  p.unknown_name_rate = roster.empty() ? 1.0 : compute_unknown_rate(roster, policy);
  p.roster = std::move(roster);
  p.records = std::move(records);
  sort_records(p.records);
  return p;
}

struct FilterEvent {
  std::string project;
  std::string subject;  // project, reviewer, or record id
  std::string reason;
};

struct FilterOutcome {
  std::vector<ProjectDataset> projects;
  std::vector<FilterEvent> log;
};

inline std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Why a project fails the acceptance rules, or nullopt if it passes.
inline std::optional<std::string> rejection_reason(const ProjectDataset& p, double max_unknown,
                                                   std::size_t min_protected,
                                                   Gender protected_group = Gender::female) {
  if (p.unknown_name_rate > max_unknown) {
    return "unknown rate " + format_fraction(p.unknown_name_rate) + " > " +
           format_fraction(max_unknown);
  }
  for (Gender g : {protected_group, other_group(protected_group)}) {
    const auto n = std::count_if(p.roster.begin(), p.roster.end(),
                                 [g](const Reviewer& r) { return r.gender == g; });
    if (static_cast<std::size_t>(n) < min_protected) {
      return std::to_string(n) + " " + std::string(to_string(g)) + " reviewer(s) < minimum " +
             std::to_string(min_protected);
    }
  }
  return std::nullopt;
}

/// Applies the project acceptance rules, then strips unknown-gender
/// reviewers from surviving rosters and drops records left without a
/// known reviewer.
inline FilterOutcome filter_projects(std::vector<ProjectDataset> projects, double max_unknown,
                                     std::size_t min_protected,
                                     Gender protected_group = Gender::female) {
  if (!(max_unknown >= 0.0 && max_unknown <= 1.0)) {
    throw InputError("max_unknown must lie in [0, 1]");
  }
  if (min_protected < 1) throw InputError("min_protected must be at least 1");
  FilterOutcome out;
  for (auto& p : projects) {
    if (auto why = rejection_reason(p, max_unknown, min_protected, protected_group)) {
      out.log.push_back({p.name, p.name, "project rejected: " + *why});
      continue;
    }
    std::unordered_set<std::string> known;
    std::vector<Reviewer> kept;
    for (auto& r : p.roster) {
      if (r.gender == Gender::unknown) {
        out.log.push_back({p.name, r.id, "reviewer dropped: unknown gender"});
      } else {
        known.insert(r.id);
        kept.push_back(std::move(r));
      }
    }
    p.roster = std::move(kept);
    std::vector<ReviewRecord> records;
    for (auto& rec : p.records) {
      std::vector<std::string> reviewers;
      for (auto& id : rec.actual_reviewers) {
        if (known.contains(id)) reviewers.push_back(std::move(id));
      }
      if (reviewers.empty()) {
        out.log.push_back({p.name, rec.review_id, "record dropped: no reviewer of known gender"});
        continue;
      }
      rec.actual_reviewers = std::move(reviewers);
      records.push_back(std::move(rec));
    }
    p.records = std::move(records);
    out.projects.push_back(std::move(p));
  }
  return out;
}

/// Splits sorted records: the first round(train_fraction * N) (half rounds
/// up) train, the rest test. Each side keeps at least one record.
inline SplitDataset chronological_split(const ProjectDataset& dataset, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train_fraction must lie strictly between 0 and 1");
  }
  const auto n = dataset.records.size();
  if (n < 2) throw InputError("chronological split needs at least 2 records");
  auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitDataset s;
  s.train.assign(dataset.records.begin(), dataset.records.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(dataset.records.begin() + static_cast<std::ptrdiff_t>(n_train), dataset.records.end());
  return s;
}

/// Group shares of the roster's known-gender reviewers.
inline GroupDistribution desired_distribution(std::span<const Reviewer> roster) {
  std::size_t f = 0, m = 0;
  for (const auto& r : roster) {
    if (r.gender == Gender::female) ++f;
    if (r.gender == Gender::male) ++m;
  }
  if (f == 0 || m == 0) {
    throw InputError("desired distribution needs at least one female and one male reviewer");
  }
  const double n = static_cast<double>(f + m);
  return GroupDistribution(static_cast<double>(f) / n, static_cast<double>(m) / n);
}

// ---- canonical JSON ----

inline nlohmann::ordered_json to_json(const Reviewer& r) {
  return {{"id", r.id},
          {"name", r.display_name},
          {"gender", to_string(r.gender)},
          {"gender_source", to_string(r.gender_source)}};
}

inline nlohmann::ordered_json to_json(const ReviewRecord& r) {
  return {{"review_id", r.review_id},
          {"timestamp", r.timestamp},
          {"file_paths", r.file_paths},
          {"subject", r.subject},
          {"actual_reviewers", r.actual_reviewers}};
}

inline nlohmann::ordered_json to_json(const ProjectDataset& p) {
  nlohmann::ordered_json roster = nlohmann::ordered_json::array();
  for (const auto& r : p.roster) roster.push_back(to_json(r));
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& r : p.records) records.push_back(to_json(r));
  return {{"name", p.name},
          {"unknown_name_rate", p.unknown_name_rate},
          {"roster", std::move(roster)},
          {"records", std::move(records)}};
}

/// Parses a dataset document and checks the dataset invariants.
inline ProjectDataset dataset_from_json(const nlohmann::json& doc) {
  try {
    ProjectDataset p;
    p.name = doc.at("name").get<std::string>();
    p.unknown_name_rate = doc.at("unknown_name_rate").get<double>();
    for (const auto& r : doc.at("roster")) {
      p.roster.push_back(detail::make_reviewer(
          r.at("id").get<std::string>(), r.value("name", std::string{}),
          r.value("gender", std::string{}), r.value("gender_source", std::string{}),
          "dataset roster"));
    }
    Roster index(p.roster);  // rejects duplicate ids
    for (const auto& j : doc.at("records")) {
      ReviewRecord r;
      r.review_id = j.at("review_id").get<std::string>();
      r.timestamp = j.at("timestamp").get<std::int64_t>();
      r.file_paths = j.at("file_paths").get<std::vector<std::string>>();
      r.subject = j.value("subject", std::string{});
      r.actual_reviewers = j.at("actual_reviewers").get<std::vector<std::string>>();
      std::sort(r.actual_reviewers.begin(), r.actual_reviewers.end());
      if (r.file_paths.empty()) throw InputError("record " + r.review_id + " has no file paths");
      if (r.actual_reviewers.empty()) {
        throw InputError("record " + r.review_id + " has no actual reviewers");
      }
      for (const auto& id : r.actual_reviewers) {
        if (!index.contains(id)) {
          throw InputError("record " + r.review_id + " names reviewer " + id +
                           " missing from the roster");
        }
      }
      p.records.push_back(std::move(r));
    }
    sort_records(p.records);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed dataset JSON: ") + e.what());
  }
}

}  // namespace fairrank
