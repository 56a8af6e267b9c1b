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
#include <optional>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fairrank/core.hpp"
#include "fairrank/metrics.hpp"

namespace fairrank {

enum class StopReason { fair_reached, metric_stalled, exhausted, constraints_satisfied };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::fair_reached: return "fair_reached";
    case StopReason::metric_stalled: return "metric_stalled";
    case StopReason::exhausted: return "exhausted";
    case StopReason::constraints_satisfied: return "constraints_satisfied";
  }
  return "exhausted";
}

struct MitigationOutcome {
  /// The re-ranked head followed by every other input candidate in input
  /// order, so cutoffs beyond the mitigated one still see a full list.
  RankedList reranked;
  /// Swaps performed. For igrr this includes a final swap that was undone
  /// because it did not help (see `reverted`).
  std::size_t substitutions = 0;
  StopReason stopped_reason = StopReason::constraints_satisfied;
  /// A group quota could not be met because the group ran out of candidates.
  bool infeasible = false;
  /// igrr only: the last swap was rolled back.
  bool reverted = false;
};

/// Floor/ceiling group quotas for the position being filled.
struct ConstraintState {
  std::size_t k = 0;
  std::array<std::size_t, 2> counts{};  // indexed like kGroups
  const GroupDistribution* desired = nullptr;

  static constexpr std::size_t slot(Gender g) { return g == Gender::female ? 0 : 1; }

  std::size_t count(Gender g) const { return counts[slot(g)]; }

  // The slack keeps p*k from landing a hair off an integer.
  std::size_t min_quota(Gender g) const {
    return static_cast<std::size_t>(std::floor(desired->at(g) * static_cast<double>(k) + 1e-9));
  }
  std::size_t max_quota(Gender g) const {
    return static_cast<std::size_t>(std::ceil(desired->at(g) * static_cast<double>(k) - 1e-9));
  }

  /// ⌈⌈p·k⌉ / p⌉: the earliest position at which the group's next
  /// ceiling increment falls due.
  double relaxed_term(Gender g) const {
    const double p = desired->at(g);
    return std::ceil(static_cast<double>(max_quota(g)) / p - 1e-9);
  }
};

namespace detail {

/// Remaining candidates of one group in rank order.
struct GroupQueue {
  std::vector<ScoredCandidate> members;
  std::size_t next = 0;

  bool empty() const { return next >= members.size(); }
  const ScoredCandidate& front() const { return members[next]; }
};

/// The group among `eligible` whose next candidate ranks highest.
inline std::optional<Gender> best_front(const std::array<GroupQueue, 2>& queues,
                                        std::span<const Gender> eligible) {
  std::optional<Gender> best;
  for (Gender g : eligible) {
    const auto& q = queues[ConstraintState::slot(g)];
    if (q.empty()) continue;
    if (!best || ranks_before(q.front(), queues[ConstraintState::slot(*best)].front())) best = g;
  }
  return best;
}

inline RankedList sorted_copy(const RankedList& list) {
  RankedList out = list;
  sort_candidates(out.candidates);
  return out;
}

/// Sequential quota-constrained selection shared by detgreedy and
/// detrelaxed. A group below its floor is served first; otherwise
/// `choose` picks among the groups still below their ceiling.
template <class Choose>
MitigationOutcome constrained_rerank(const RankedList& input, const GroupDistribution& desired,
                                     std::size_t k_max, const Roster& roster, Choose choose) {
  const RankedList list = sorted_copy(input);
  std::array<GroupQueue, 2> queues;
  for (const auto& c : list.candidates) {
    const Gender g = roster.group_of(c.reviewer_id);
    if (g == Gender::unknown) {
      throw InputError("candidate " + c.reviewer_id + " has no group");
    }
    queues[ConstraintState::slot(g)].members.push_back(c);
  }

  MitigationOutcome out;
  out.reranked.record_id = list.record_id;
  ConstraintState state{0, {}, &desired};
  const std::size_t n = std::min(k_max, list.size());
  std::unordered_set<std::string> placed;
  for (std::size_t k = 1; k <= n; ++k) {
    state.k = k;
    std::vector<Gender> below_min, below_max;
    for (Gender g : kGroups) {
      if (state.count(g) < state.min_quota(g)) {
        if (queues[ConstraintState::slot(g)].empty()) {
          out.infeasible = true;
        } else {
          below_min.push_back(g);
        }
      }
      if (state.count(g) < state.max_quota(g) && !queues[ConstraintState::slot(g)].empty()) {
        below_max.push_back(g);
      }
    }
    std::optional<Gender> pick;
    if (!below_min.empty()) {
      pick = best_front(queues, below_min);
    } else if (!below_max.empty()) {
      pick = choose(queues, state, std::span<const Gender>(below_max));
    } else {
      // Only a group at its ceiling has candidates left.
      pick = best_front(queues, kGroups);
      out.infeasible = true;
    }
    auto& q = queues[ConstraintState::slot(*pick)];
    out.reranked.candidates.push_back(q.front());
    placed.insert(q.front().reviewer_id);
    ++q.next;
    ++state.counts[ConstraintState::slot(*pick)];
  }
  for (const auto& c : list.candidates) {
    if (!placed.contains(c.reviewer_id)) out.reranked.candidates.push_back(c);
  }
  out.stopped_reason = out.infeasible ? StopReason::exhausted : StopReason::constraints_satisfied;
  return out;
}

}  // namespace detail

/// Greedy re-ranking under per-prefix floor/ceiling group quotas
/// ⌊p·k⌋ ≤ count_k ≤ ⌈p·k⌉ for positions 1..k_max. Among the groups with
/// ceiling room, the highest-scored next candidate wins.
inline MitigationOutcome detgreedy(const RankedList& list, const GroupDistribution& desired,
                                   std::size_t k_max, const Roster& roster) {
  return detail::constrained_rerank(
      list, desired, k_max, roster,
      [](const auto& queues, const ConstraintState&, std::span<const Gender> eligible) {
        return detail::best_front(queues, eligible);
      });
}

/// Like detgreedy, but when no floor binds, only the groups minimizing
/// ⌈⌈p·k⌉/p⌉ are eligible; the highest-scored next candidate among them
/// wins.
inline MitigationOutcome detrelaxed(const RankedList& list, const GroupDistribution& desired,
                                    std::size_t k_max, const Roster& roster) {
  return detail::constrained_rerank(
      list, desired, k_max, roster,
      [](const auto& queues, const ConstraintState& state, std::span<const Gender> eligible) {
        double best = 0.0;
        std::vector<Gender> tie_class;
        for (Gender g : eligible) {
          const double t = state.relaxed_term(g);
          if (tie_class.empty() || t < best) {
            best = t;
            tie_class = {g};
          } else if (t == best) {
            tie_class.push_back(g);
          }
        }
        return detail::best_front(queues, tie_class);
      });
}

/// Iterative swap re-ranking that drives SPD@K toward `spd_threshold`.
///
/// While the top k is unfair, the lowest-ranked member of the
/// over-included group is swapped for the best-ranked candidate of the
/// under-included group from outside the original top k. Progress is
/// measured as max(0, SPD@K - threshold); a swap that does not strictly
/// reduce it is rolled back and the algorithm stops. Candidates swapped
/// out never re-enter. The result holds the top k re-sorted by score,
/// followed by every other input candidate in input order.
inline MitigationOutcome igrr(const RankedList& input, double spd_threshold, std::size_t k,
                              const Roster& roster) {
  if (!roster.has_both_groups()) throw InputError("igrr needs both female and male reviewers");
  if (k == 0 || k > input.size()) {
    throw InputError("igrr: k must lie in [1, list length]");
  }
  const RankedList list = detail::sorted_copy(input);
  const double total_f = static_cast<double>(roster.count(Gender::female));
  const double total_m = static_cast<double>(roster.count(Gender::male));

  std::vector<ScoredCandidate> top(list.candidates.begin(),
                                   list.candidates.begin() + static_cast<std::ptrdiff_t>(k));
  // Outside pools per group, best first; consumed from the front.
  std::array<detail::GroupQueue, 2> pools;
  for (std::size_t i = k; i < list.size(); ++i) {
    const Gender g = roster.group_of(list.candidates[i].reviewer_id);
    if (g != Gender::unknown) pools[ConstraintState::slot(g)].members.push_back(list.candidates[i]);
  }

  auto spd_of = [&](const std::vector<ScoredCandidate>& t) {
    std::size_t f = 0, m = 0;
    for (const auto& c : t) {
      const Gender g = roster.group_of(c.reviewer_id);
      if (g == Gender::female) ++f;
      if (g == Gender::male) ++m;
    }
    return std::pair{static_cast<double>(f) / total_f, static_cast<double>(m) / total_m};
  };
  auto gap = [&](double spd) { return std::max(0.0, spd - spd_threshold); };

  MitigationOutcome out;
  out.stopped_reason = StopReason::fair_reached;
  std::optional<Gender> last_direction;
  for (;;) {
    const auto [f_frac, m_frac] = spd_of(top);
    const double spd = std::abs(f_frac - m_frac);
    if (!is_unfair_spd(spd, spd_threshold)) {
      out.stopped_reason = StopReason::fair_reached;
      break;
    }
    const Gender disadvantaged = f_frac < m_frac ? Gender::female : Gender::male;
    const Gender advantaged = other_group(disadvantaged);
    if (last_direction && *last_direction != disadvantaged) {
      // The previous swap overshot. A swap in the other direction moves SPD
      // back by the same step, never strictly improves, and would be
      // rolled back at once; stop without performing it.
      out.stopped_reason = StopReason::metric_stalled;
      break;
    }
    auto& pool = pools[ConstraintState::slot(disadvantaged)];
    auto victim = std::find_if(top.rbegin(), top.rend(), [&](const ScoredCandidate& c) {
      return roster.group_of(c.reviewer_id) == advantaged;
    });
    if (pool.empty() || victim == top.rend()) {
      out.stopped_reason = StopReason::exhausted;
      break;
    }
    const auto before = top;
    const double gap_before = gap(spd);
    *victim = pool.front();
    ++pool.next;
    sort_candidates(top);
    ++out.substitutions;
    last_direction = disadvantaged;
    const auto [f_after, m_after] = spd_of(top);
    if (gap(std::abs(f_after - m_after)) >= gap_before) {
      top = before;
      out.reverted = true;
      out.stopped_reason = StopReason::metric_stalled;
      break;
    }
  }

  out.reranked.record_id = list.record_id;
  out.reranked.candidates = top;
  std::unordered_set<std::string> in_top;
  for (const auto& c : top) in_top.insert(c.reviewer_id);
  for (const auto& c : list.candidates) {
    if (!in_top.contains(c.reviewer_id)) out.reranked.candidates.push_back(c);
  }
  return out;
}

}  // namespace fairrank
