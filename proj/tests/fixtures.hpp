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

#include <string>
#include <utility>
#include <vector>

#include "fairrank/dataset.hpp"

namespace fixtures {

/// Roster of `f` female and `m` male reviewers with real names.
inline std::vector<fairrank::Reviewer> roster(std::size_t f, std::size_t m,
                                              const std::string& prefix = "") {
  std::vector<fairrank::Reviewer> out;
  for (std::size_t i = 0; i < f; ++i) {
    out.push_back({prefix + "f" + std::to_string(i), "Ada Lovelace", fairrank::Gender::female,
                   fairrank::GenderSource::manual});
  }
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back({prefix + "m" + std::to_string(i), "Alan Turing", fairrank::Gender::male,
                   fairrank::GenderSource::manual});
  }
  return out;
}

struct MissingRate {
  const char* project;
  double percent;
};

/// Missing-name-and-gender percentages of the 34 candidate projects.
inline const std::vector<MissingRate> kMissingRates = {
    {"nodejs", 2.7},        {"openstack", 36.1},      {"bssw", 5.2},
    {"unlegacy", 68.7},     {"oranse", 60.8},         {"opendaylight", 19},
    {"pixel", 55.8},        {"joyent", 0},            {"eclipse", 37},
    {"openbmc", 64.9},      {"android", 63},          {"nixcommunity", 7.1},
    {"software factory", 16.3}, {"FDio", 13.3},       {"chromium", 62.1},
    {"h5bp", 12.5},         {"onap", 21.1},           {"getsentry", 4.1},
    {"libreoffice", 64},    {"fullstorydev", 13.7},   {"shopify", 2.8},
    {"facebook", 14.2},     {"qt", 60.5},             {"freeCodeCamp", 0},
    {"tensorflow", 14.9},   {"renovatebot", 16.6},    {"gerrit", 51.6},
    {"opencord", 53.4},     {"mano", 68.5},           {"twbs", 23},
    {"go", 34.4},           {"EbookFoundation", 25},  {"lineageOS", 32.8},
    {"cloudera", 13},
};

/// Female/male counts of the four studied projects.
inline const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> kStudiedRosters = {
    {"nodejs", {5, 28}}, {"bssw", {9, 9}}, {"getsentry", {6, 64}}, {"shopify", {17, 148}}};

/// The 34 projects with their missing rates. Studied projects get their
/// published rosters; the other three low-missing-rate projects have a
/// single female reviewer (their counts are unpublished; one protected
/// reviewer is what excludes a project); the rest get a generic roster.
inline std::vector<fairrank::ProjectDataset> figure1_projects() {
  std::vector<fairrank::ProjectDataset> out;
  for (const auto& [name, pct] : kMissingRates) {
    fairrank::ProjectDataset p;
    p.name = name;
    p.unknown_name_rate = pct / 100.0;
    std::pair<std::size_t, std::size_t> counts{3, 20};
    for (const auto& [studied, c] : kStudiedRosters) {
      if (studied == name) counts = c;
    }
    const std::string n = name;
    if (n == "joyent" || n == "nixcommunity" || n == "freeCodeCamp") counts = {1, 10};
    p.roster = roster(counts.first, counts.second, n + ":");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace fixtures
