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
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairrank/core.hpp"
#include "fairrank/csv.hpp"

namespace fairrank {

// File-path similarity recommender in the style of RevFinder: a candidate
// earns credit from every past review they took part in, weighted by how
// closely that review's file paths resemble the paths under review.
// Four string comparisons over path components are scored independently
// and fused by Borda count.

enum class SimilarityKind { prefix, suffix, substring, subsequence };

inline constexpr std::array<SimilarityKind, 4> kSimilarityKinds = {
    SimilarityKind::prefix, SimilarityKind::suffix, SimilarityKind::substring,
    SimilarityKind::subsequence};

/// Which component count divides a raw path similarity.
enum class Normalizer { longer_path, shorter_path };

using PathComponents = std::vector<std::string_view>;

/// Components of a `/`-separated path; empty components are skipped.
inline PathComponents split_path(std::string_view path) {
  PathComponents out;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) out.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  if (out.empty()) throw InputError("empty file path '" + std::string(path) + "'");
  return out;
}

namespace detail {

inline std::size_t common_prefix(const PathComponents& a, const PathComponents& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

inline std::size_t common_suffix(const PathComponents& a, const PathComponents& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[a.size() - 1 - n] == b[b.size() - 1 - n]) ++n;
  return n;
}

inline std::size_t common_substring(const PathComponents& a, const PathComponents& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

inline std::size_t common_subsequence(const PathComponents& a, const PathComponents& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

inline std::size_t path_similarity(const PathComponents& a, const PathComponents& b,
                                   SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::prefix: return detail::common_prefix(a, b);
    case SimilarityKind::suffix: return detail::common_suffix(a, b);
    case SimilarityKind::substring: return detail::common_substring(a, b);
    case SimilarityKind::subsequence: return detail::common_subsequence(a, b);
  }
  return 0;
}

/// Length, in path components, of the longest common prefix, suffix,
/// contiguous run, or subsequence of two paths.
inline std::size_t path_similarity(std::string_view p1, std::string_view p2, SimilarityKind kind) {
  return path_similarity(split_path(p1), split_path(p2), kind);
}

namespace detail {

inline std::vector<PathComponents> split_all(const ReviewRecord& r) {
  std::vector<PathComponents> out;
  out.reserve(r.file_paths.size());
  for (const auto& p : r.file_paths) out.push_back(split_path(p));
  return out;
}

/// Mean normalized similarity over all file pairs of two reviews.
inline double review_similarity(const std::vector<PathComponents>& target,
                                const std::vector<PathComponents>& past, SimilarityKind kind,
                                Normalizer norm) {
  double sum = 0.0;
  for (const auto& a : target) {
    for (const auto& b : past) {
      const auto len = norm == Normalizer::longer_path ? std::max(a.size(), b.size())
                                                       : std::min(a.size(), b.size());
      sum += static_cast<double>(path_similarity(a, b, kind)) / static_cast<double>(len);
    }
  }
  return sum / static_cast<double>(target.size() * past.size());
}

inline RankedList to_ranked_list(std::string record_id, std::span<const Reviewer> roster,
                                 const std::unordered_map<std::string, double>& scores) {
  RankedList out{std::move(record_id), {}};
  out.candidates.reserve(roster.size());
  for (const auto& r : roster) {
    auto it = scores.find(r.id);
    out.candidates.push_back({r.id, it == scores.end() ? 0.0 : it->second});
  }
  sort_candidates(out.candidates);
  return out;
}

}  // namespace detail

/// Ranks every roster reviewer for `target` by accumulated path similarity
/// of the past reviews they took part in. Reviewers outside the roster earn
/// nothing.
inline RankedList score_record(const ReviewRecord& target, std::span<const ReviewRecord> history,
                               std::span<const Reviewer> roster, SimilarityKind kind,
                               Normalizer norm = Normalizer::longer_path) {
  if (history.empty()) throw InputError("score_record needs a non-empty review history");
  const auto target_paths = detail::split_all(target);
  std::unordered_map<std::string, double> scores;
  for (const auto& past : history) {
    const double sim = detail::review_similarity(target_paths, detail::split_all(past), kind, norm);
    for (const auto& id : past.actual_reviewers) scores[id] += sim;
  }
  return detail::to_ranked_list(target.review_id, roster, scores);
}

/// Borda fusion: a candidate at 1-based rank r of an n-long list earns
/// n - r points; points are summed across lists.
inline RankedList combine_rankings(std::span<const RankedList> per_kind) {
  if (per_kind.empty()) throw InputError("combine_rankings needs at least one ranking");
  std::set<std::string> universe;
  for (const auto& c : per_kind.front().candidates) universe.insert(c.reviewer_id);
  std::map<std::string, double> points;
  for (const auto& list : per_kind) {
    std::set<std::string> ids;
    for (const auto& c : list.candidates) ids.insert(c.reviewer_id);
    if (ids != universe || ids.size() != list.size()) {
      throw InputError("combine_rankings: input lists cover different reviewer sets");
    }
    const auto n = list.size();
    for (std::size_t i = 0; i < n; ++i) {
      points[list.candidates[i].reviewer_id] += static_cast<double>(n - (i + 1));
    }
  }
  RankedList out{per_kind.front().record_id, {}};
  for (const auto& [id, p] : points) out.candidates.push_back({id, p});
  sort_candidates(out.candidates);
  return out;
}

/// The full four-comparison recommender.
inline RankedList revfinder_rank(const ReviewRecord& target, std::span<const ReviewRecord> history,
                                 std::span<const Reviewer> roster,
                                 Normalizer norm = Normalizer::longer_path) {
  std::vector<RankedList> lists;
  lists.reserve(kSimilarityKinds.size());
  for (auto kind : kSimilarityKinds) lists.push_back(score_record(target, history, roster, kind, norm));
  return combine_rankings(lists);
}

inline const std::vector<std::string> kScoresHeader = {"record_id", "reviewer_id", "score"};

/// Reads `record_id,reviewer_id,score` rows into one ranked list per record,
/// ordered by record id.
inline std::vector<RankedList> load_external_scores(std::istream& in) {
  std::map<std::string, RankedList> by_record;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& row : csv::read(in, kScoresHeader, "scores")) {
    const std::string where = "scores: row " + std::to_string(row.line);
    double score = 0.0;
    if (!csv::parse_number(row.fields[2], score) || !std::isfinite(score)) {
      throw InputError(where + ": score '" + row.fields[2] + "' is not a finite number");
    }
    if (score < 0.0) throw InputError(where + ": negative score");
    if (row.fields[0].empty() || row.fields[1].empty()) throw InputError(where + ": empty id");
    if (!seen.emplace(row.fields[0], row.fields[1]).second) {
      throw InputError(where + ": duplicate pair (" + row.fields[0] + ", " + row.fields[1] + ")");
    }
    auto& list = by_record[row.fields[0]];
    list.record_id = row.fields[0];
    list.candidates.push_back({std::move(row.fields[1]), score});
  }
  std::vector<RankedList> out;
  out.reserve(by_record.size());
  for (auto& [id, list] : by_record) {
    sort_candidates(list.candidates);
    out.push_back(std::move(list));
  }
  return out;
}

}  // namespace fairrank
