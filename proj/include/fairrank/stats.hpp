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
#include <string_view>
#include <utility>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank {

enum class Alternative { two_sided, greater, less };

inline std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::two_sided: return "two_sided";
    case Alternative::greater: return "greater";
    case Alternative::less: return "less";
  }
  return "two_sided";
}

struct PairedSample {
  std::vector<std::pair<double, double>> pairs;  // (baseline, treatment)
};

/// Below this many non-zero differences the test has too little power to
/// reach 0.05 two-sided; the p-value is still reported.
inline constexpr std::size_t kWilcoxonMinPairs = 6;

/// Above this many non-zero differences the normal approximation is used.
inline constexpr std::size_t kWilcoxonExactMax = 25;

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-) for two_sided, W+ otherwise
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;  // non-zero differences
  bool exact = true;
  bool sufficient = false;  // n >= kWilcoxonMinPairs
};

namespace detail {

inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& values,
                                         std::vector<std::size_t>* tie_sizes = nullptr) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && nearly_equal(values[order[j]], values[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    if (tie_sizes) tie_sizes->push_back(j - i);
    i = j;
  }
  return ranks;
}

/// Null distribution of 2·W+ given the ranks: entry s counts the sign
/// assignments whose doubled positive-rank sum is s. Doubling keeps
/// half-integer tied ranks integral.
inline std::vector<double> doubled_rank_sum_counts(const std::vector<double>& ranks) {
  std::size_t total = 0;
  std::vector<std::size_t> doubled;
  for (double r : ranks) {
    doubled.push_back(static_cast<std::size_t>(std::lround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<double> counts(total + 1, 0.0);
  counts[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t d : doubled) {
    for (std::size_t s = reach + 1; s-- > 0;) counts[s + d] += counts[s];
    reach += d;
  }
  return counts;
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

/// Wilcoxon signed-rank test on treatment - baseline. Zero differences are
/// dropped; tied magnitudes share average ranks. For up to 25 non-zero
/// differences p is exact (enumerating the conditional null over the
/// observed ranks); beyond that a tie-corrected normal approximation is
/// used. `greater` tests treatment > baseline.
inline WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample, Alternative alternative) {
  std::vector<double> diffs;
  for (const auto& [base, treat] : sample.pairs) {
    const double d = treat - base;
    if (d != 0.0 && !detail::nearly_equal(treat, base)) diffs.push_back(d);
  }
  if (diffs.empty()) throw InputError("degenerate sample: all differences are zero");

  std::vector<double> magnitudes;
  for (double d : diffs) magnitudes.push_back(std::abs(d));
  std::vector<std::size_t> ties;
  const auto ranks = detail::average_ranks(magnitudes, &ties);

  WilcoxonResult r;
  r.n = diffs.size();
  r.sufficient = r.n >= kWilcoxonMinPairs;
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = alternative == Alternative::two_sided ? std::min(r.w_plus, r.w_minus) : r.w_plus;

  double p_upper = 0.0;  // P(W+ >= observed)
  double p_lower = 0.0;  // P(W+ <= observed)
  if (r.n <= kWilcoxonExactMax) {
    r.exact = true;
    const auto counts = detail::doubled_rank_sum_counts(ranks);
    const auto observed = static_cast<std::size_t>(std::lround(2.0 * r.w_plus));
    const double total = std::ldexp(1.0, static_cast<int>(r.n));
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (s >= observed) p_upper += counts[s];
      if (s <= observed) p_lower += counts[s];
    }
    p_upper /= total;
    p_lower /= total;
  } else {
    r.exact = false;
    const double n = static_cast<double>(r.n);
    const double mean = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    for (std::size_t t : ties) {
      const double tt = static_cast<double>(t);
      var -= (tt * tt * tt - tt) / 48.0;
    }
    const double z = (r.w_plus - mean) / std::sqrt(var);
    p_upper = detail::normal_sf(z);
    p_lower = detail::normal_sf(-z);
  }
  switch (alternative) {
    case Alternative::greater: r.p_value = p_upper; break;
    case Alternative::less: r.p_value = p_lower; break;
    case Alternative::two_sided: r.p_value = std::min(1.0, 2.0 * std::min(p_upper, p_lower)); break;
  }
  return r;
}

}  // namespace fairrank
