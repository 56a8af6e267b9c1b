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

// fairrank: ingest review data, audit reviewer recommendations for group
// fairness, and compare mitigation outcomes.
//
// Exit codes: 0 success, 1 internal error, 2 rejected input.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairrank/fairrank.hpp"

namespace fs = std::filesystem;
using namespace fairrank;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitRejected = 2;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

struct IngestArgs {
  std::string reviews;
  std::string reviewers;
  std::string out;
  std::string name;
  std::string reviewers_format = "auto";
  double max_unknown = 0.10;
  std::size_t min_protected = 2;
  std::string protected_group = "female";
};

int run_ingest(const IngestArgs& a) {
  const auto protected_group = parse_gender(a.protected_group).value_or(Gender::unknown);
  if (protected_group == Gender::unknown) throw InputError("--protected must be female or male");

  RosterFormat format = RosterFormat::csv;
  if (a.reviewers_format == "json" ||
      (a.reviewers_format == "auto" && fs::path(a.reviewers).extension() == ".json")) {
    format = RosterFormat::json;
  }
  auto roster_in = open_input(a.reviewers);
  auto roster = parse_reviewers(roster_in, format);
  auto reviews_in = open_input(a.reviews);
  auto records = parse_reviews(reviews_in);

  std::size_t inferred = 0;
  if (auto client = gender_client_from_env()) {
    GenderInference inference(*client);
    inferred = annotate_roster(roster, inference);
  }

  const std::string name = a.name.empty() ? fs::path(a.reviews).stem().string() : a.name;
  std::vector<ProjectDataset> projects;
  projects.push_back(make_project(name, std::move(roster), std::move(records)));
  auto outcome = filter_projects(std::move(projects), a.max_unknown, a.min_protected,
                                 protected_group);

  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const auto& e : outcome.log) log.push_back({{"subject", e.subject}, {"reason", e.reason}});
  if (outcome.projects.empty()) {
    std::cerr << outcome.log.front().reason << "\n";
    return kExitRejected;
  }
  const auto& project = outcome.projects.front();
  if (project.records.size() < 2) {
    throw InputError("project " + name + " keeps fewer than 2 records after filtering");
  }
  auto doc = to_json(project);
  doc["inferred_genders"] = inferred;
  doc["filter_log"] = std::move(log);
  write_output(a.out, doc.dump(2) + "\n");
  std::cerr << "ingested " << project.name << ": " << project.roster.size() << " reviewers, "
            << project.records.size() << " records, unknown rate "
            << format_fraction(project.unknown_name_rate) << ", " << outcome.log.size()
            << " filter event(s)\n";
  return 0;
}

// Fills options the command line left unset from a key=value file, so
// flags win. Keys are long option names, optionally under [audit].
void apply_config_file(CLI::App& cmd, const std::string& path) {
  auto in = open_input(path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw InputError(path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{cmd.get_name()}) {
      throw InputError(path + ": unexpected section " + item.parents.front());
    }
    auto* opt = cmd.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw InputError(path + ": unknown key " + item.name);
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw InputError(path + ": " + item.name + ": " + e.what());
    }
  }
}

struct AuditArgs {
  std::string config;
  std::string dataset;
  std::string scores;
  std::string recommender = "revfinder";
  std::vector<std::string> mitigation{"none"};
  std::vector<std::size_t> k{4, 6, 10};
  std::string protected_group = "female";
  std::string format = "json";
  std::string out;
  double train_fraction = 0.8;
  std::string ndkl_mode = "full_list";
  std::string normalizer = "longer_path";
};

int run_audit_cmd(const AuditArgs& a) {
  AuditConfig config;
  config.k_set = a.k;
  config.protected_group = parse_gender(a.protected_group).value_or(Gender::unknown);
  config.strategies.clear();
  for (const auto& m : a.mitigation) {
    auto s = parse_strategy(m);
    if (!s) throw InputError("unknown mitigation strategy " + m);
    config.strategies.push_back(*s);
  }
  config.recommender = a.recommender == "external" ? RecommenderKind::external
                                                   : RecommenderKind::revfinder;
  config.train_fraction = a.train_fraction;
  config.ndkl_mode = a.ndkl_mode == "standard" ? NdklMode::standard : NdklMode::full_list;
  config.normalizer =
      a.normalizer == "shorter_path" ? Normalizer::shorter_path : Normalizer::longer_path;

  const auto dataset = dataset_from_json(read_json(a.dataset));
  std::vector<RankedList> external;
  if (config.recommender == RecommenderKind::external) {
    if (a.scores.empty()) throw InputError("--recommender external requires --scores");
    auto in = open_input(a.scores);
    external = load_external_scores(in);
  }
  const auto report = run_audit(dataset, config,
                                config.recommender == RecommenderKind::external ? &external : nullptr);
  write_output(a.out, a.format == "markdown" ? render_markdown(report)
                                             : to_json(report).dump(2) + "\n");
  return 0;
}

struct CompareArgs {
  std::vector<std::string> baseline;
  std::vector<std::string> treatment;
  std::string alternative = "two_sided";
  std::string baseline_strategy;
  std::string treatment_strategy;
  std::vector<std::string> measures{"skew", "spd", "ndkl"};
};

int run_compare(const CompareArgs& a) {
  CompareOptions options;
  options.alternative = a.alternative == "greater" ? Alternative::greater
                        : a.alternative == "less"  ? Alternative::less
                                                   : Alternative::two_sided;
  auto strategy = [](const std::string& s) -> std::optional<Strategy> {
    if (s.empty()) return std::nullopt;
    auto v = parse_strategy(s);
    if (!v) throw InputError("unknown strategy " + s);
    return v;
  };
  options.baseline_strategy = strategy(a.baseline_strategy);
  options.treatment_strategy = strategy(a.treatment_strategy);
  options.measures = a.measures;

  auto load = [](const std::vector<std::string>& paths) {
    std::vector<AuditReport> out;
    for (const auto& p : paths) out.push_back(report_from_json(read_json(p)));
    return out;
  };
  const auto result = compare_reports(load(a.baseline), load(a.treatment), options);
  const auto& t = result.test;
  std::cout << std::setprecision(10);
  std::cout << "baseline strategy: " << to_string(result.baseline_strategy) << "\n"
            << "treatment strategy: " << to_string(result.treatment_strategy) << "\n"
            << "alternative: " << to_string(options.alternative) << "\n"
            << "n: " << t.n << "\n"
            << "statistic: " << t.statistic << "\n"
            << "w_plus: " << t.w_plus << "\n"
            << "w_minus: " << t.w_minus << "\n"
            << "p_value: " << t.p_value << (t.exact ? " (exact)" : " (normal approximation)")
            << "\n";
  if (!t.sufficient) {
    std::cout << "verdict: insufficient sample (fewer than " << kWilcoxonMinPairs
              << " non-zero differences)\n";
  } else {
    std::cout << "verdict: " << (result.significant ? "significant" : "not significant")
              << " at 0.05\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness auditing and mitigation for top-K code reviewer recommendation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a filtered project dataset");
  ingest_cmd->add_option("--reviews", ingest.reviews, "Review records CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--reviewers", ingest.reviewers, "Reviewer roster (CSV or JSON)")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest.out, "Dataset JSON output (default stdout)");
  ingest_cmd->add_option("--name", ingest.name, "Project name (default: reviews file stem)");
  ingest_cmd->add_option("--reviewers-format", ingest.reviewers_format, "csv, json, or auto")
      ->check(CLI::IsMember({"auto", "csv", "json"}));
  ingest_cmd->add_option("--max-unknown", ingest.max_unknown, "Largest accepted unknown-name rate")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ingest_cmd->add_option("--min-protected", ingest.min_protected, "Minimum reviewers per group")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ingest_cmd->add_option("--protected", ingest.protected_group, "Protected group")
      ->check(CLI::IsMember({"female", "male"}))->capture_default_str();

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Measure fairness and accuracy of recommendations");
  audit_cmd->add_option("--config", audit.config, "key=value configuration file (flags win)")
      ->check(CLI::ExistingFile);
  audit_cmd->add_option("--dataset", audit.dataset, "Dataset JSON from ingest")->required()->check(CLI::ExistingFile);
  audit_cmd->add_option("--scores", audit.scores, "External score CSV (record_id,reviewer_id,score)")
      ->check(CLI::ExistingFile);
  audit_cmd->add_option("--recommender", audit.recommender, "revfinder or external")
      ->check(CLI::IsMember({"revfinder", "external"}))->capture_default_str();
  audit_cmd->add_option("--mitigation", audit.mitigation, "Comma-separated strategies")
      ->delimiter(',')->check(CLI::IsMember({"none", "detgreedy", "detrelaxed", "igrr"}));
  audit_cmd->add_option("--k", audit.k, "Comma-separated cutoffs")->delimiter(',')->check(CLI::PositiveNumber);
  audit_cmd->add_option("--protected", audit.protected_group, "Protected group")
      ->check(CLI::IsMember({"female", "male"}))->capture_default_str();
  audit_cmd->add_option("--format", audit.format, "json or markdown")
      ->check(CLI::IsMember({"json", "markdown"}))->capture_default_str();
  audit_cmd->add_option("--out", audit.out, "Report output (default stdout)");
  audit_cmd->add_option("--train-fraction", audit.train_fraction, "Chronological training share")
      ->capture_default_str();
  audit_cmd->add_option("--ndkl-mode", audit.ndkl_mode, "full_list or standard normalization")
      ->check(CLI::IsMember({"full_list", "standard"}))->capture_default_str();
  audit_cmd->add_option("--normalizer", audit.normalizer, "Path similarity normalizer")
      ->check(CLI::IsMember({"longer_path", "shorter_path"}))->capture_default_str();

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon signed-rank comparison of two reports");
  compare_cmd->add_option("--baseline", compare.baseline, "Baseline report(s)")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--treatment", compare.treatment, "Treatment report(s)")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--alternative", compare.alternative, "two_sided, greater, or less")
      ->check(CLI::IsMember({"two_sided", "greater", "less"}))->capture_default_str();
  compare_cmd->add_option("--baseline-strategy", compare.baseline_strategy, "Strategy taken from baseline reports");
  compare_cmd->add_option("--treatment-strategy", compare.treatment_strategy, "Strategy taken from treatment reports");
  compare_cmd->add_option("--measures", compare.measures, "Comma-separated subset of skew,spd,ndkl")
      ->delimiter(',')->check(CLI::IsMember({"skew", "spd", "ndkl"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitRejected;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*audit_cmd) {
      if (!audit.config.empty()) apply_config_file(*audit_cmd, audit.config);
      return run_audit_cmd(audit);
    }
    if (*compare_cmd) return run_compare(compare);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRejected;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
