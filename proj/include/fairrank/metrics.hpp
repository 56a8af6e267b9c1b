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
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank {

/// Ground-truth reviewers per record id.
using TruthMap = std::unordered_map<std::string, std::vector<std::string>>;

/// Substitute for an empty top-k share so the log stays finite.
inline constexpr double kSkewClamp = 1e-6;

/// Slack for comparing fractions built from different integer ratios.
inline constexpr double kFractionTolerance = 1e-12;

struct SkewResult {
  double value = 0.0;
  bool clamped = false;    // the group was absent from the prefix
  bool truncated = false;  // k exceeded the list length
};

/// ln(share of `group` in the top k / desired share). Negative values mean
/// the group is under-represented.
inline SkewResult skew_at_k(const RankedList& list, std::size_t k, Gender group,
                            const GroupDistribution& desired, const Roster& roster) {
  if (k == 0) throw InputError("skew_at_k: k must be at least 1");
  if (list.size() == 0) throw InputError("skew_at_k: empty ranked list");
  SkewResult r;
  const std::size_t n = std::min(k, list.size());
  r.truncated = n < k;
  double share = static_cast<double>(count_in_prefix(list, n, group, roster)) / static_cast<double>(n);
  if (share == 0.0) {
    share = kSkewClamp;
    r.clamped = true;
  }
  r.value = std::log(share / desired.at(group));
  return r;
}

/// |#female - #male| / roster size over the known-gender reviewers.
inline double spd_threshold(const Roster& roster) {
  if (!roster.has_both_groups()) {
    throw InputError("SPD threshold needs both female and male reviewers");
  }
  const double f = static_cast<double>(roster.count(Gender::female));
  const double m = static_cast<double>(roster.count(Gender::male));
  return std::abs(f / (f + m) - m / (f + m));
}

/// Difference between the fractions of each group's roster members that
/// appear in the top k.
inline double spd_at_k(const RankedList& list, std::size_t k, const Roster& roster) {
  if (!roster.has_both_groups()) throw InputError("SPD@K needs both female and male reviewers");
  const double f_in = static_cast<double>(count_in_prefix(list, k, Gender::female, roster));
  const double m_in = static_cast<double>(count_in_prefix(list, k, Gender::male, roster));
  return std::abs(f_in / static_cast<double>(roster.count(Gender::female)) -
                  m_in / static_cast<double>(roster.count(Gender::male)));
}

/// Unfair means strictly above the threshold.
inline bool is_unfair_spd(double value, double threshold) {
  return value > threshold + kFractionTolerance;
}

/// How Z, the normalizer, is summed.
enum class NdklMode {
  full_list,  // Z sums the discount over every position of the list
  standard,  // Z sums the discount over the evaluated cutoffs only
};

struct NdklResult {
  double value = 0.0;
  bool truncated = false;  // some cutoff exceeded the list length
};

/// KL divergence of the group shares of the first `n` candidates from
/// `desired`, with 0 * ln 0 = 0.
inline double prefix_kl(const RankedList& list, std::size_t n, const GroupDistribution& desired,
                        const Roster& roster) {
  double kl = 0.0;
  for (Gender g : kGroups) {
    const double share =
        static_cast<double>(count_in_prefix(list, n, g, roster)) / static_cast<double>(n);
    if (share > 0.0) kl += share * std::log(share / desired.at(g));
  }
  // Rounding can leave a hair below zero when the shares match exactly.
  return std::max(0.0, kl);
}

/// Discount-weighted KL divergence of prefix group shares at each cutoff
/// in `ks`, normalized by Z.
inline NdklResult ndkl(const RankedList& list, const GroupDistribution& desired,
                       std::span<const std::size_t> ks, const Roster& roster,
                       NdklMode mode = NdklMode::full_list) {
  if (list.size() == 0) throw InputError("ndkl: empty ranked list");
  if (ks.empty()) throw InputError("ndkl: no cutoffs given");
  NdklResult r;
  double weighted = 0.0;
  double z = 0.0;
  for (std::size_t i : ks) {
    if (i == 0) throw InputError("ndkl: cutoffs must be positive");
    const std::size_t n = std::min(i, list.size());
    r.truncated |= n < i;
    const double discount = 1.0 / std::log2(static_cast<double>(i) + 1.0);
    weighted += discount * prefix_kl(list, n, desired, roster);
    if (mode == NdklMode::standard) z += discount;
  }
  if (mode == NdklMode::full_list) {
    for (std::size_t i = 1; i <= list.size(); ++i) z += 1.0 / std::log2(static_cast<double>(i) + 1.0);
  }
  r.value = weighted / z;
  return r;
}

namespace detail {

inline const std::vector<std::string>& truth_for(const RankedList& list, const TruthMap& truths) {
  auto it = truths.find(list.record_id);
  if (it == truths.end()) throw InputError("no ground truth for record " + list.record_id);
  return it->second;
}

}  // namespace detail

/// 1-based rank of the first true reviewer within the top k, or 0.
inline std::size_t first_hit_rank(const RankedList& list, const std::vector<std::string>& truth,
                                  std::size_t k) {
  const std::size_t n = std::min(k, list.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(truth.begin(), truth.end(), list.candidates[i].reviewer_id) != truth.end()) {
      return i + 1;
    }
  }
  return 0;
}

inline double aggregate(std::span<const double> per_record) {
  if (per_record.empty()) throw InputError("cannot aggregate an empty set of values");
  return std::accumulate(per_record.begin(), per_record.end(), 0.0) /
         static_cast<double>(per_record.size());
}

/// Share of records with at least one true reviewer in the top k.
inline double topk_accuracy(std::span<const RankedList> lists, const TruthMap& truths,
                            std::size_t k) {
  if (lists.empty()) throw InputError("topk_accuracy: no ranked lists");
  std::vector<double> hits;
  hits.reserve(lists.size());
  for (const auto& l : lists) {
    hits.push_back(first_hit_rank(l, detail::truth_for(l, truths), k) > 0 ? 1.0 : 0.0);
  }
  return aggregate(hits);
}

/// Mean reciprocal rank with ranks beyond k counted as zero.
inline double mrr_at_k(std::span<const RankedList> lists, const TruthMap& truths, std::size_t k) {
  if (lists.empty()) throw InputError("mrr_at_k: no ranked lists");
  std::vector<double> rr;
  rr.reserve(lists.size());
  for (const auto& l : lists) {
    const auto rank = first_hit_rank(l, detail::truth_for(l, truths), k);
    rr.push_back(rank == 0 ? 0.0 : 1.0 / static_cast<double>(rank));
  }
  return aggregate(rr);
}

}  // namespace fairrank
