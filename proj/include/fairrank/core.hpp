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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fairrank {

/// Rejected input: malformed files, violated preconditions, failed
/// validation. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Gender { male, female, unknown };
enum class GenderSource { dataset, manual, inferred_api, unresolved };

/// The two groups fairness is measured over, in report order.
inline constexpr std::array<Gender, 2> kGroups = {Gender::female, Gender::male};

inline Gender other_group(Gender g) {
  if (g == Gender::female) return Gender::male;
  if (g == Gender::male) return Gender::female;
  throw InputError("unknown gender has no complementary group");
}

inline std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

inline std::string_view to_string(GenderSource s) {
  switch (s) {
    case GenderSource::dataset: return "dataset";
    case GenderSource::manual: return "manual";
    case GenderSource::inferred_api: return "inferred_api";
    case GenderSource::unresolved: return "unresolved";
  }
  return "unresolved";
}

/// Blank maps to unknown.
inline std::optional<Gender> parse_gender(std::string_view s) {
  if (s.empty() || s == "unknown") return Gender::unknown;
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  return std::nullopt;
}

inline std::optional<GenderSource> parse_gender_source(std::string_view s) {
  if (s == "dataset") return GenderSource::dataset;
  if (s == "manual") return GenderSource::manual;
  if (s == "inferred_api") return GenderSource::inferred_api;
  if (s == "unresolved") return GenderSource::unresolved;
  return std::nullopt;
}

struct Reviewer {
  std::string id;
  std::string display_name;
  Gender gender = Gender::unknown;
  GenderSource gender_source = GenderSource::unresolved;

  friend bool operator==(const Reviewer&, const Reviewer&) = default;
};

struct ReviewRecord {
  std::string review_id;
  std::int64_t timestamp = 0;
  std::vector<std::string> file_paths;
  std::string subject;
  /// Sorted, unique.
  std::vector<std::string> actual_reviewers;

  friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

struct ScoredCandidate {
  std::string reviewer_id;
  double score = 0.0;

  friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

/// Score descending, reviewer id ascending among ties.
inline bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.reviewer_id < b.reviewer_id;
}

struct RankedList {
  std::string record_id;
  std::vector<ScoredCandidate> candidates;

  std::size_t size() const { return candidates.size(); }

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

inline void sort_candidates(std::vector<ScoredCandidate>& c) {
  std::sort(c.begin(), c.end(), ranks_before);
}

/// Immutable reviewer roster with O(1) group lookup.
class Roster {
 public:
  Roster() = default;

  explicit Roster(std::vector<Reviewer> members) : members_(std::move(members)) {
    index_.reserve(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (!index_.emplace(members_[i].id, i).second) {
        throw InputError("duplicate reviewer id " + members_[i].id);
      }
      switch (members_[i].gender) {
        case Gender::female: ++female_; break;
        case Gender::male: ++male_; break;
        case Gender::unknown: break;
      }
    }
  }

  std::span<const Reviewer> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(std::string_view id) const { return index_.contains(std::string(id)); }

  /// Unknown for ids outside the roster.
  Gender group_of(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? Gender::unknown : members_[it->second].gender;
  }

  std::size_t count(Gender g) const {
    if (g == Gender::female) return female_;
    if (g == Gender::male) return male_;
    return members_.size() - female_ - male_;
  }

  bool has_both_groups() const { return female_ > 0 && male_ > 0; }

 private:
  std::vector<Reviewer> members_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t female_ = 0;
  std::size_t male_ = 0;
};

/// Desired share of each group in a ranking. Both shares lie strictly
/// inside (0, 1) and sum to one.
class GroupDistribution {
 public:
  GroupDistribution(double female, double male) : female_(female), male_(male) {
    if (!(female > 0.0 && female < 1.0) || !(male > 0.0 && male < 1.0)) {
      throw InputError("group proportions must lie strictly between 0 and 1");
    }
    if (std::abs(female + male - 1.0) > 1e-12) {
      throw InputError("group proportions must sum to 1");
    }
  }

  double at(Gender g) const {
    if (g == Gender::female) return female_;
    if (g == Gender::male) return male_;
    throw InputError("no desired proportion for the unknown group");
  }

 private:
  double female_;
  double male_;
};

/// Number of candidates of `group` among the first `k` (clipped to the list).
inline std::size_t count_in_prefix(const RankedList& list, std::size_t k, Gender group,
                                   const Roster& roster) {
  const std::size_t n = std::min(k, list.size());
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (roster.group_of(list.candidates[i].reviewer_id) == group) ++c;
  }
  return c;
}

}  // namespace fairrank
