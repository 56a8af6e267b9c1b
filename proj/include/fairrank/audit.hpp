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
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "fairrank/core.hpp"
#include "fairrank/dataset.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/mitigation.hpp"
#include "fairrank/recommender.hpp"
#include "fairrank/stats.hpp"

#ifndef FAIRRANK_VERSION
#define FAIRRANK_VERSION "0.1.0"
#endif

namespace fairrank {

inline constexpr std::string_view kToolVersion = "fairrank " FAIRRANK_VERSION;

enum class Strategy { none, detgreedy, detrelaxed, igrr };
enum class RecommenderKind { revfinder, external };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::detgreedy: return "detgreedy";
    case Strategy::detrelaxed: return "detrelaxed";
    case Strategy::igrr: return "igrr";
  }
  return "none";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto v : {Strategy::none, Strategy::detgreedy, Strategy::detrelaxed, Strategy::igrr}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

inline std::string_view to_string(RecommenderKind r) {
  return r == RecommenderKind::revfinder ? "revfinder" : "external";
}

inline std::string_view to_string(NdklMode m) { return m == NdklMode::full_list ? "full_list" : "standard"; }

struct AuditConfig {
  std::vector<std::size_t> k_set{4, 6, 10};
  Gender protected_group = Gender::female;
  std::vector<Strategy> strategies{Strategy::none};
  RecommenderKind recommender = RecommenderKind::revfinder;
  double train_fraction = 0.8;
  NdklMode ndkl_mode = NdklMode::full_list;
  Normalizer normalizer = Normalizer::longer_path;

  void validate() const {
    if (k_set.empty()) throw InputError("K set must not be empty");
    for (std::size_t i = 0; i < k_set.size(); ++i) {
      if (k_set[i] == 0) throw InputError("K values must be positive");
      if (i > 0 && k_set[i] <= k_set[i - 1]) throw InputError("K set must be strictly increasing");
    }
    if (strategies.empty()) throw InputError("at least one mitigation strategy is required");
    if (protected_group == Gender::unknown) throw InputError("protected group must be female or male");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw InputError("train fraction must lie strictly between 0 and 1");
    }
  }
};

/// Measures of one strategy at one cutoff, each averaged over test records.
struct MeasureCell {
  std::size_t k = 0;
  double skew = 0.0;  // of the protected group
  double spd = 0.0;
  double top_k_accuracy = 0.0;
  double mrr = 0.0;
  bool unfair_spd = false;   // spd above the threshold
  bool unfair_skew = false;  // skew below zero
  std::size_t skew_clamped_records = 0;
  std::size_t truncated_records = 0;
  std::size_t substitutions = 0;
  std::map<std::string, std::size_t> stop_reasons;
};

struct StrategyReport {
  Strategy strategy = Strategy::none;
  std::vector<MeasureCell> cells;
  double ndkl = 0.0;
  std::size_t ndkl_truncated_records = 0;
  std::size_t infeasible_records = 0;
};

struct DatasetSummary {
  std::size_t roster_female = 0;
  std::size_t roster_male = 0;
  double female_ratio = 0.0;
  double spd_threshold = 0.0;
  double unknown_name_rate = 0.0;
  std::size_t records_total = 0;
  std::size_t train_records = 0;
  std::size_t test_records = 0;
  std::size_t dropped_external_candidates = 0;
};

struct AuditReport {
  std::string tool_version{kToolVersion};
  std::string project;
  AuditConfig config;
  DatasetSummary dataset;
  std::vector<StrategyReport> strategies;
};

/// Base ranked lists for the test split, one per test record in order.
struct Recommendations {
  std::vector<RankedList> lists;
  std::size_t dropped_candidates = 0;
};

inline Recommendations recommend_revfinder(const SplitDataset& split, const Roster& roster,
                                           Normalizer norm) {
  Recommendations r;
  r.lists.reserve(split.test.size());
  for (const auto& rec : split.test) {
    r.lists.push_back(revfinder_rank(rec, split.train, roster.members(), norm));
  }
  return r;
}

/// Selects the external lists of the test records. Candidates outside the
/// roster (for instance reviewers of unknown gender) are dropped.
inline Recommendations recommend_external(const SplitDataset& split, const Roster& roster,
                                          const std::vector<RankedList>& external) {
  std::unordered_map<std::string, const RankedList*> by_id;
  for (const auto& l : external) by_id[l.record_id] = &l;
  std::vector<std::string> missing;
  Recommendations r;
  for (const auto& rec : split.test) {
    auto it = by_id.find(rec.review_id);
    if (it == by_id.end()) {
      missing.push_back(rec.review_id);
      continue;
    }
    RankedList list{rec.review_id, {}};
    for (const auto& c : it->second->candidates) {
      if (roster.contains(c.reviewer_id)) {
        list.candidates.push_back(c);
      } else {
        ++r.dropped_candidates;
      }
    }
    if (list.candidates.empty()) {
      throw InputError("external scores for record " + rec.review_id +
                       " name no roster reviewer");
    }
    sort_candidates(list.candidates);
    r.lists.push_back(std::move(list));
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw InputError("missing external scores for test record(s): " + ids);
  }
  return r;
}

namespace detail {

inline MeasureCell measure_cell(std::span<const RankedList> lists, std::size_t k,
                                const AuditConfig& config, const GroupDistribution& desired,
                                const Roster& roster, const TruthMap& truths, double threshold) {
  MeasureCell cell;
  cell.k = k;
  std::vector<double> skews, spds;
  for (const auto& l : lists) {
    const auto s = skew_at_k(l, k, config.protected_group, desired, roster);
    skews.push_back(s.value);
    cell.skew_clamped_records += s.clamped;
    cell.truncated_records += s.truncated;
    spds.push_back(spd_at_k(l, k, roster));
  }
  cell.skew = aggregate(skews);
  cell.spd = aggregate(spds);
  cell.top_k_accuracy = topk_accuracy(lists, truths, k);
  cell.mrr = mrr_at_k(lists, truths, k);
  cell.unfair_spd = is_unfair_spd(cell.spd, threshold);
  cell.unfair_skew = cell.skew < 0.0;
  return cell;
}

}  // namespace detail

/// Splits, recommends, mitigates, and measures one project. `external`
/// must be supplied when the config selects the external recommender.
inline AuditReport run_audit(const ProjectDataset& dataset, const AuditConfig& config,
                             const std::vector<RankedList>* external = nullptr) {
  config.validate();
  const Roster roster(dataset.roster);
  if (!roster.has_both_groups()) {
    throw InputError("dataset roster needs both female and male reviewers");
  }
  const auto desired = desired_distribution(roster.members());
  const double threshold = spd_threshold(roster);
  const auto split = chronological_split(dataset, config.train_fraction);

  Recommendations recs;
  if (config.recommender == RecommenderKind::external) {
    if (external == nullptr) throw InputError("the external recommender needs a score file");
    recs = recommend_external(split, roster, *external);
  } else {
    recs = recommend_revfinder(split, roster, config.normalizer);
  }

  TruthMap truths;
  for (const auto& rec : split.test) truths[rec.review_id] = rec.actual_reviewers;

  AuditReport report;
  report.project = dataset.name;
  report.config = config;
  auto& ds = report.dataset;
  ds.roster_female = roster.count(Gender::female);
  ds.roster_male = roster.count(Gender::male);
  ds.female_ratio = desired.at(Gender::female);
  ds.spd_threshold = threshold;
  ds.unknown_name_rate = dataset.unknown_name_rate;
  ds.records_total = dataset.records.size();
  ds.train_records = split.train.size();
  ds.test_records = split.test.size();
  ds.dropped_external_candidates = recs.dropped_candidates;

  const std::size_t k_max = config.k_set.back();
  for (Strategy strategy : config.strategies) {
    StrategyReport sr;
    sr.strategy = strategy;
    // Lists at the largest cutoff feed NDKL.
    std::vector<RankedList> widest;
    switch (strategy) {
      case Strategy::none:
        widest = recs.lists;
        break;
      case Strategy::detgreedy:
      case Strategy::detrelaxed:
        for (const auto& l : recs.lists) {
          auto out = strategy == Strategy::detgreedy ? detgreedy(l, desired, k_max, roster)
                                                     : detrelaxed(l, desired, k_max, roster);
          sr.infeasible_records += out.infeasible;
          widest.push_back(std::move(out.reranked));
        }
        break;
      case Strategy::igrr:
        break;
    }
    for (std::size_t k : config.k_set) {
      if (strategy != Strategy::igrr) {
        sr.cells.push_back(
            detail::measure_cell(widest, k, config, desired, roster, truths, threshold));
        continue;
      }
      std::vector<RankedList> lists;
      std::size_t substitutions = 0;
      std::map<std::string, std::size_t> reasons;
      for (const auto& l : recs.lists) {
        auto out = igrr(l, threshold, std::min(k, l.size()), roster);
        substitutions += out.substitutions;
        ++reasons[std::string(to_string(out.stopped_reason))];
        lists.push_back(std::move(out.reranked));
      }
      auto cell = detail::measure_cell(lists, k, config, desired, roster, truths, threshold);
      cell.substitutions = substitutions;
      cell.stop_reasons = std::move(reasons);
      sr.cells.push_back(std::move(cell));
      if (k == k_max) widest = std::move(lists);
    }
    std::vector<double> ndkls;
    for (const auto& l : widest) {
      const auto r = ndkl(l, desired, config.k_set, roster, config.ndkl_mode);
      ndkls.push_back(r.value);
      sr.ndkl_truncated_records += r.truncated;
    }
    sr.ndkl = aggregate(ndkls);
    report.strategies.push_back(std::move(sr));
  }
  return report;
}

// ---- rendering ----

/// Two-decimal rendering, truncated toward zero as in published fairness
/// tables. Full precision is kept everywhere else.
inline std::string render_2dp(double v) {
  const double nudge = v >= 0.0 ? 1e-9 : -1e-9;
  double t = std::trunc(v * 100.0 + nudge) / 100.0;
  if (t == 0.0) t = 0.0;  // no "-0.00"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

inline nlohmann::ordered_json to_json(const AuditReport& r) {
  using json = nlohmann::ordered_json;
  json strategies = json::array();
  for (const auto& s : r.strategies) {
    json cells = json::array();
    for (const auto& c : s.cells) {
      json cell = {{"k", c.k},
                   {"skew", c.skew},
                   {"spd", c.spd},
                   {"top_k_accuracy", c.top_k_accuracy},
                   {"mrr", c.mrr},
                   {"unfair_spd", c.unfair_spd},
                   {"unfair_skew", c.unfair_skew},
                   {"skew_clamped_records", c.skew_clamped_records},
                   {"truncated_records", c.truncated_records}};
      if (s.strategy == Strategy::igrr) {
        cell["substitutions"] = c.substitutions;
        cell["stop_reasons"] = c.stop_reasons;
      }
      cells.push_back(std::move(cell));
    }
    strategies.push_back({{"strategy", to_string(s.strategy)},
                          {"ndkl", s.ndkl},
                          {"ndkl_truncated_records", s.ndkl_truncated_records},
                          {"infeasible_records", s.infeasible_records},
                          {"cells", std::move(cells)}});
  }
  json strategy_names = json::array();
  for (auto s : r.config.strategies) strategy_names.push_back(to_string(s));
  const auto& d = r.dataset;
  return {{"tool_version", r.tool_version},
          {"project", r.project},
          {"config",
           {{"k_set", r.config.k_set},
            {"protected_group", to_string(r.config.protected_group)},
            {"strategies", strategy_names},
            {"recommender", to_string(r.config.recommender)},
            {"train_fraction", r.config.train_fraction},
            {"ndkl_mode", to_string(r.config.ndkl_mode)},
            {"normalizer",
             r.config.normalizer == Normalizer::longer_path ? "longer_path" : "shorter_path"},
            {"seedless", true}}},
          {"dataset",
           {{"roster_female", d.roster_female},
            {"roster_male", d.roster_male},
            {"female_ratio", d.female_ratio},
            {"spd_threshold", d.spd_threshold},
            {"unknown_name_rate", d.unknown_name_rate},
            {"records_total", d.records_total},
            {"train_records", d.train_records},
            {"test_records", d.test_records},
            {"dropped_external_candidates", d.dropped_external_candidates}}},
          {"strategies", std::move(strategies)}};
}

/// Parses a report written by to_json.
inline AuditReport report_from_json(const nlohmann::json& j) {
  try {
    AuditReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.project = j.at("project").get<std::string>();
    const auto& cfg = j.at("config");
    r.config.k_set = cfg.at("k_set").get<std::vector<std::size_t>>();
    r.config.protected_group =
        parse_gender(cfg.at("protected_group").get<std::string>()).value_or(Gender::female);
    r.config.recommender = cfg.at("recommender").get<std::string>() == "external"
                               ? RecommenderKind::external
                               : RecommenderKind::revfinder;
    r.config.train_fraction = cfg.at("train_fraction").get<double>();
    r.config.ndkl_mode =
        cfg.at("ndkl_mode").get<std::string>() == "standard" ? NdklMode::standard : NdklMode::full_list;
    r.config.strategies.clear();
    const auto& d = j.at("dataset");
    r.dataset.roster_female = d.at("roster_female").get<std::size_t>();
    r.dataset.roster_male = d.at("roster_male").get<std::size_t>();
    r.dataset.female_ratio = d.at("female_ratio").get<double>();
    r.dataset.spd_threshold = d.at("spd_threshold").get<double>();
    r.dataset.unknown_name_rate = d.at("unknown_name_rate").get<double>();
    r.dataset.records_total = d.at("records_total").get<std::size_t>();
    r.dataset.train_records = d.at("train_records").get<std::size_t>();
    r.dataset.test_records = d.at("test_records").get<std::size_t>();
    r.dataset.dropped_external_candidates = d.value("dropped_external_candidates", std::size_t{0});
    for (const auto& sj : j.at("strategies")) {
      StrategyReport s;
      const auto name = sj.at("strategy").get<std::string>();
      auto strategy = parse_strategy(name);
      if (!strategy) throw InputError("report names unknown strategy " + name);
      s.strategy = *strategy;
      r.config.strategies.push_back(s.strategy);
      s.ndkl = sj.at("ndkl").get<double>();
      s.ndkl_truncated_records = sj.value("ndkl_truncated_records", std::size_t{0});
      s.infeasible_records = sj.value("infeasible_records", std::size_t{0});
      for (const auto& cj : sj.at("cells")) {
        MeasureCell c;
        c.k = cj.at("k").get<std::size_t>();
        c.skew = cj.at("skew").get<double>();
        c.spd = cj.at("spd").get<double>();
        c.top_k_accuracy = cj.at("top_k_accuracy").get<double>();
        c.mrr = cj.at("mrr").get<double>();
        c.unfair_spd = cj.at("unfair_spd").get<bool>();
        c.unfair_skew = cj.at("unfair_skew").get<bool>();
        c.skew_clamped_records = cj.value("skew_clamped_records", std::size_t{0});
        c.truncated_records = cj.value("truncated_records", std::size_t{0});
        c.substitutions = cj.value("substitutions", std::size_t{0});
        if (cj.contains("stop_reasons")) {
          c.stop_reasons = cj["stop_reasons"].get<std::map<std::string, std::size_t>>();
        }
        s.cells.push_back(std::move(c));
      }
      r.strategies.push_back(std::move(s));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
}

/// Markdown table in the layout of the usual fairness summary: one row per
/// (strategy, measure), one column per K. Unfair SPD@K cells carry
/// `[unfair]`, negative Skew@K cells `[neg]`, clamped skew averages `[clamped]`.
inline std::string render_markdown(const AuditReport& r) {
  std::ostringstream out;
  const auto& d = r.dataset;
  out << "# Fairness audit: " << r.project << "\n\n";
  out << "- tool: " << r.tool_version << "\n";
  out << "- recommender: " << to_string(r.config.recommender) << "\n";
  out << "- protected group: " << to_string(r.config.protected_group) << "\n";
  out << "- NDKL normalization: " << to_string(r.config.ndkl_mode) << "\n\n";
  out << "## Dataset\n\n";
  out << "| Female | Male | F. ratio | SPD threshold | Unknown rate | Records | Train | Test |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  out << "| " << d.roster_female << " | " << d.roster_male << " | " << render_2dp(d.female_ratio)
      << " | " << render_2dp(d.spd_threshold) << " | " << render_2dp(d.unknown_name_rate) << " | "
      << d.records_total << " | " << d.train_records << " | " << d.test_records << " |\n\n";
  out << "## Results\n\n| Strategy | Measure |";
  for (auto k : r.config.k_set) out << " K=" << k << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < r.config.k_set.size(); ++i) out << "---|";
  out << "\n";
  for (const auto& s : r.strategies) {
    auto row = [&](std::string_view measure, auto value_of) {
      out << "| " << to_string(s.strategy) << " | " << measure << " |";
      for (const auto& c : s.cells) out << " " << value_of(c) << " |";
      out << "\n";
    };
    row("Skew@K", [](const MeasureCell& c) {
      std::string v = render_2dp(c.skew);
      if (c.unfair_skew) v += " [neg]";
      if (c.skew_clamped_records > 0) v += " [clamped]";
      return v;
    });
    row("SPD@K", [](const MeasureCell& c) {
      return render_2dp(c.spd) + (c.unfair_spd ? " [unfair]" : "");
    });
    row("Top-K ACC", [](const MeasureCell& c) { return render_2dp(c.top_k_accuracy); });
    row("MRR@K", [](const MeasureCell& c) { return render_2dp(c.mrr); });
    out << "| " << to_string(s.strategy) << " | NDKL | " << render_2dp(s.ndkl) << " |";
    for (std::size_t i = 1; i < s.cells.size(); ++i) out << " |";
    out << "\n";
  }
  bool any_infeasible = false;
  for (const auto& s : r.strategies) any_infeasible |= s.infeasible_records > 0;
  if (any_infeasible) {
    out << "\n";
    for (const auto& s : r.strategies) {
      if (s.infeasible_records > 0) {
        out << "- " << to_string(s.strategy) << ": quota infeasible on " << s.infeasible_records
            << " record(s)\n";
      }
    }
  }
  return out.str();
}

// ---- comparison ----

struct CompareOptions {
  Alternative alternative = Alternative::two_sided;
  std::optional<Strategy> baseline_strategy;
  std::optional<Strategy> treatment_strategy;
  std::vector<std::string> measures{"skew", "spd", "ndkl"};
};

struct CompareResult {
  WilcoxonResult test;
  std::vector<std::string> keys;
  PairedSample sample;
  Strategy baseline_strategy = Strategy::none;
  Strategy treatment_strategy = Strategy::none;
  bool significant = false;  // p < 0.05
};

namespace detail {

inline const StrategyReport* find_strategy(const AuditReport& r, Strategy s) {
  for (const auto& sr : r.strategies) {
    if (sr.strategy == s) return &sr;
  }
  return nullptr;
}

/// The explicit choice, else the report's only non-`none` strategy, else
/// `none` when it is the only one.
inline Strategy pick_strategy(const AuditReport& r, std::optional<Strategy> wanted,
                              std::string_view side) {
  if (wanted) {
    if (!find_strategy(r, *wanted)) {
      throw InputError(std::string(side) + " report for " + r.project + " has no strategy " +
                       std::string(to_string(*wanted)));
    }
    return *wanted;
  }
  std::vector<Strategy> mitigations;
  for (const auto& s : r.strategies) {
    if (s.strategy != Strategy::none) mitigations.push_back(s.strategy);
  }
  if (mitigations.size() == 1) return mitigations.front();
  if (mitigations.empty() && !r.strategies.empty()) return Strategy::none;
  throw InputError(std::string(side) + " report for " + r.project +
                   " holds several strategies; choose one explicitly");
}

/// Distance from the fair state: 0 is ideal.
inline double unfairness(std::string_view measure, const MeasureCell* cell, const StrategyReport& s) {
  if (measure == "skew") return std::abs(cell->skew);
  if (measure == "spd") return cell->spd;
  return s.ndkl;
}

/// Fairness improvement per (project, recommender, K, measure): the drop in
/// unfairness versus the report's own `none` strategy, or the negated
/// unfairness when the report has no `none` baseline.
inline std::map<std::string, double> improvements(std::span<const AuditReport> reports,
                                                  std::optional<Strategy> wanted,
                                                  const std::vector<std::string>& measures,
                                                  std::string_view side, Strategy& chosen) {
  std::map<std::string, double> out;
  for (const auto& r : reports) {
    chosen = pick_strategy(r, wanted, side);
    const auto* s = find_strategy(r, chosen);
    const auto* base = find_strategy(r, Strategy::none);
    const std::string prefix = r.project + "|" + std::string(to_string(r.config.recommender)) + "|";
    for (const auto& measure : measures) {
      if (measure != "skew" && measure != "spd" && measure != "ndkl") {
        throw InputError("unknown comparison measure " + measure);
      }
      if (measure == "ndkl") {
        const double v = -unfairness(measure, nullptr, *s);
        out[prefix + "ndkl"] = base ? unfairness(measure, nullptr, *base) + v : v;
        continue;
      }
      for (std::size_t i = 0; i < s->cells.size(); ++i) {
        const auto& c = s->cells[i];
        double v = -unfairness(measure, &c, *s);
        if (base) v += unfairness(measure, &base->cells.at(i), *base);
        out[prefix + "K=" + std::to_string(c.k) + "|" + measure] = v;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Wilcoxon signed-rank comparison of fairness improvements between two
/// sets of reports sharing (project, recommender, K, measure) keys.
inline CompareResult compare_reports(std::span<const AuditReport> baseline,
                                     std::span<const AuditReport> treatment,
                                     const CompareOptions& options) {
  if (baseline.empty() || treatment.empty()) throw InputError("compare needs reports on both sides");
  CompareResult result;
  const auto a = detail::improvements(baseline, options.baseline_strategy, options.measures,
                                      "baseline", result.baseline_strategy);
  const auto b = detail::improvements(treatment, options.treatment_strategy, options.measures,
                                      "treatment", result.treatment_strategy);
  std::vector<std::string> missing;
  for (const auto& [key, v] : a) {
    if (!b.contains(key)) missing.push_back(key + " (absent from treatment)");
  }
  for (const auto& [key, v] : b) {
    if (!a.contains(key)) missing.push_back(key + " (absent from baseline)");
  }
  if (!missing.empty()) {
    std::string msg = "reports do not share keys: ";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    throw InputError(msg);
  }
  for (const auto& [key, v] : a) {
    result.keys.push_back(key);
    result.sample.pairs.emplace_back(v, b.at(key));
  }
  result.test = wilcoxon_signed_rank(result.sample, options.alternative);
  result.significant = result.test.p_value < 0.05;
  return result;
}

}  // namespace fairrank
