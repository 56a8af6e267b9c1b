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
#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "fairrank/dataset.hpp"
#include "fixtures.hpp"

namespace fairrank {
namespace {

std::vector<Reviewer> reviewers_from(const std::string& text, RosterFormat f = RosterFormat::csv) {
  std::istringstream in(text);
  return parse_reviewers(in, f);
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseReviewers, MapsFieldsDirectly) {
  auto r = reviewers_from("id,name,gender,gender_source\nr1,Alice Chen,female,manual\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, "r1");
  EXPECT_EQ(r[0].display_name, "Alice Chen");
  EXPECT_EQ(r[0].gender, Gender::female);
  EXPECT_EQ(r[0].gender_source, GenderSource::manual);
}

TEST(ParseReviewers, BlankFieldsDefaultToUnresolved) {
  auto r = reviewers_from("id,name,gender,gender_source\nr2,,,\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].gender, Gender::unknown);
  EXPECT_EQ(r[0].gender_source, GenderSource::unresolved);
}

TEST(ParseReviewers, GenderWithoutSourceComesFromDataset) {
  auto r = reviewers_from("id,name,gender,gender_source\nr3,Bo Li,male,\n");
  EXPECT_EQ(r[0].gender_source, GenderSource::dataset);
}

TEST(ParseReviewers, DuplicateIdIsRejected) {
  const auto msg = error_of([] {
    reviewers_from("id,name,gender,gender_source\nr1,A,female,manual\nr1,B,male,manual\n");
  });
  EXPECT_EQ(msg, "duplicate reviewer id r1");
}

TEST(ParseReviewers, MalformedRowNamesRowNumber) {
  const auto msg = error_of([] {
    reviewers_from("id,name,gender,gender_source\nr1,A,female,manual\nr2,B,male\n");
  });
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
}

TEST(ParseReviewers, RejectsBadValuesAndHeaders) {
  EXPECT_THROW(reviewers_from("id,name,gender,gender_source\nr1,A,robot,manual\n"), InputError);
  EXPECT_THROW(reviewers_from("id,name,gender,gender_source\nr1,A,,inferred_api\n"), InputError);
  EXPECT_THROW(reviewers_from("name,id,gender,gender_source\n"), InputError);
  EXPECT_THROW(reviewers_from(""), InputError);
  EXPECT_THROW(reviewers_from("id,name,gender,gender_source\nr1,\xff\xfe,male,manual\n"), InputError);
}

TEST(ParseReviewers, JsonUsesTheSameFields) {
  auto r = reviewers_from(
      R"([{"id":"r1","name":"Alice Chen","gender":"female","gender_source":"manual"},
          {"id":"r2","name":"","gender":null}])",
      RosterFormat::json);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].gender, Gender::female);
  EXPECT_EQ(r[1].gender_source, GenderSource::unresolved);
  EXPECT_THROW(reviewers_from(R"([{"id":"a"},{"id":"a"}])", RosterFormat::json), InputError);
  EXPECT_THROW(reviewers_from("{", RosterFormat::json), InputError);
}

TEST(ParseReviews, SplitsListsAndKeepsQuotedCommas) {
  std::istringstream in(
      "review_id,timestamp,file_paths,subject,actual_reviewers\n"
      "c1,100,src/a.c;src/b.c,\"Fix a, b\",r2;r1\n");
  auto recs = parse_reviews(in);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].file_paths, (std::vector<std::string>{"src/a.c", "src/b.c"}));
  EXPECT_EQ(recs[0].subject, "Fix a, b");
  EXPECT_EQ(recs[0].actual_reviewers, (std::vector<std::string>{"r1", "r2"}));
}

TEST(ParseReviews, RejectsInvalidRows) {
  auto parse = [](const std::string& row) {
    std::istringstream in("review_id,timestamp,file_paths,subject,actual_reviewers\n" + row);
    return parse_reviews(in);
  };
  EXPECT_THROW(parse("c1,soon,a.c,s,r1\n"), InputError);
  EXPECT_THROW(parse("c1,1,,s,r1\n"), InputError);
  EXPECT_THROW(parse("c1,1,a.c,s,\n"), InputError);
  EXPECT_THROW(parse("c1,1,a.c,s,r1\nc1,2,b.c,s,r1\n"), InputError);
}

TEST(Nickname, DetectsDigitsAndSymbols) {
  EXPECT_TRUE(is_nickname("jD91mZM2"));
  EXPECT_TRUE(is_nickname("bob_smith"));
  EXPECT_TRUE(is_nickname("@alice"));
  EXPECT_FALSE(is_nickname("Mary-Jane O'Neil"));
  EXPECT_FALSE(is_nickname("Dr. Ana Souza"));
}

TEST(Nickname, BlankNamesCountAsMissing) {
  EXPECT_TRUE(is_nickname(""));
  EXPECT_TRUE(is_nickname("   "));
}

TEST(Nickname, AcceptsLettersOfAnyScript) {
  EXPECT_FALSE(is_nickname("José Álvarez"));
  EXPECT_FALSE(is_nickname("李小龙"));
  EXPECT_FALSE(is_nickname("Зоя Космодемьянская"));
  EXPECT_TRUE(is_nickname("Zoë٣"));  // Arabic-Indic digit
}

TEST(Nickname, PolicyControlsPunctuation) {
  NicknamePolicy strict{U""};
  EXPECT_TRUE(is_nickname("Mary-Jane", strict));
  EXPECT_FALSE(is_nickname("Mary Jane", strict));
}

TEST(UnknownRate, CountsBlankNicknameAndUnresolved) {
  std::vector<Reviewer> r = fixtures::roster(5, 31);
  r.push_back({"x", "jD91mZM2", Gender::male, GenderSource::manual});
  ASSERT_EQ(r.size(), 37u);
  EXPECT_NEAR(compute_unknown_rate(r), 0.027, 5e-4);
  EXPECT_DOUBLE_EQ(compute_unknown_rate(fixtures::roster(3, 3)), 0.0);

  auto ten = fixtures::roster(4, 4);
  ten.push_back({"b", "", Gender::female, GenderSource::manual});
  ten.push_back({"u", "Sam Lee", Gender::unknown, GenderSource::unresolved});
  EXPECT_DOUBLE_EQ(compute_unknown_rate(ten), 0.2);
  EXPECT_THROW(compute_unknown_rate(std::vector<Reviewer>{}), InputError);
}

std::set<std::string> names(const std::vector<ProjectDataset>& ps) {
  std::set<std::string> out;
  for (const auto& p : ps) out.insert(p.name);
  return out;
}

TEST(FilterProjects, MissingRateThresholdKeepsSevenProjects) {
  auto kept = filter_projects(fixtures::figure1_projects(), 0.10, 1).projects;
  EXPECT_EQ(names(kept), (std::set<std::string>{"nodejs", "bssw", "joyent", "nixcommunity",
                                                "getsentry", "shopify", "freeCodeCamp"}));
}

TEST(FilterProjects, ProtectedMinimumKeepsFourProjects) {
  auto seven = filter_projects(fixtures::figure1_projects(), 0.10, 1).projects;
  auto four = filter_projects(seven, 0.10, 2).projects;
  EXPECT_EQ(names(four), (std::set<std::string>{"nodejs", "bssw", "getsentry", "shopify"}));
}

TEST(FilterProjects, SingleFemaleReviewerExcludes) {
  ProjectDataset p = make_project("solo", fixtures::roster(1, 12), {});
  auto out = filter_projects({p}, 0.10, 2);
  EXPECT_TRUE(out.projects.empty());
  ASSERT_EQ(out.log.size(), 1u);
  EXPECT_NE(out.log[0].reason.find("1 female reviewer(s) < minimum 2"), std::string::npos);
}

TEST(FilterProjects, StripsUnknownReviewersAndOrphanedRecords) {
  auto roster = fixtures::roster(2, 2);
  roster.push_back({"u1", "Kim Park", Gender::unknown, GenderSource::unresolved});
  std::vector<ReviewRecord> records = {
      {"a", 1, {"x/y.c"}, "", {"f0", "u1"}},
      {"b", 2, {"x/y.c"}, "", {"u1"}},
      {"c", 3, {"x/y.c"}, "", {"ghost"}},
  };
  auto p = make_project("p", roster, records);
  auto out = filter_projects({p}, 0.25, 2);
  ASSERT_EQ(out.projects.size(), 1u);
  const auto& kept = out.projects[0];
  EXPECT_EQ(kept.roster.size(), 4u);
  ASSERT_EQ(kept.records.size(), 1u);
  EXPECT_EQ(kept.records[0].actual_reviewers, std::vector<std::string>{"f0"});
  EXPECT_EQ(out.log.size(), 3u);
}

TEST(FilterProjects, IsIdempotentAndSurvivorsSatisfyInvariants) {
  auto once = filter_projects(fixtures::figure1_projects(), 0.10, 2).projects;
  auto twice = filter_projects(once, 0.10, 2).projects;
  EXPECT_EQ(names(once), names(twice));
  for (const auto& p : twice) {
    EXPECT_LE(p.unknown_name_rate, 0.10);
    Roster r(p.roster);
    EXPECT_GE(r.count(Gender::female), 2u);
    EXPECT_GE(r.count(Gender::male), 2u);
    EXPECT_EQ(r.count(Gender::unknown), 0u);
  }
}

TEST(FilterProjects, ValidatesArguments) {
  EXPECT_THROW(filter_projects({}, 1.5, 2), InputError);
  EXPECT_THROW(filter_projects({}, 0.1, 0), InputError);
  EXPECT_TRUE(filter_projects({}, 0.1, 2).projects.empty());
}

ProjectDataset with_records(std::size_t n) {
  std::vector<ReviewRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    recs.push_back({"r" + std::to_string(1000 + i), static_cast<std::int64_t>(i), {"a/b"}, "", {"f0"}});
  }
  return make_project("p", fixtures::roster(2, 2), recs);
}

TEST(ChronologicalSplit, SplitsByRoundedFraction) {
  for (auto [n, train] : std::vector<std::pair<std::size_t, std::size_t>>{{10, 8}, {110, 88}, {5, 4}}) {
    auto s = chronological_split(with_records(n), 0.8);
    EXPECT_EQ(s.train.size(), train) << n;
    EXPECT_EQ(s.test.size(), n - train) << n;
  }
  auto s = chronological_split(with_records(10), 0.8);
  EXPECT_EQ(s.train.back().review_id, "r1007");
  EXPECT_EQ(s.test.front().review_id, "r1008");
}

TEST(ChronologicalSplit, RejectsTinyDatasetsAndBadFractions) {
  EXPECT_THROW(chronological_split(with_records(1), 0.8), InputError);
  EXPECT_THROW(chronological_split(with_records(10), 1.0), InputError);
  EXPECT_THROW(chronological_split(with_records(10), 0.0), InputError);
  auto s = chronological_split(with_records(2), 0.8);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(ChronologicalSplit, TiesBreakByReviewIdAndRecordsArePreserved) {
  std::mt19937 rng(3);
  std::vector<ReviewRecord> recs;
  for (int i = 0; i < 40; ++i) {
    recs.push_back({"id" + std::to_string(rng() % 1000) + "_" + std::to_string(i),
                    static_cast<std::int64_t>(rng() % 5), {"a"}, "", {"f0"}});
  }
  std::shuffle(recs.begin(), recs.end(), rng);
  auto p = make_project("p", fixtures::roster(2, 2), recs);
  auto s = chronological_split(p, 0.8);
  std::vector<ReviewRecord> joined = s.train;
  joined.insert(joined.end(), s.test.begin(), s.test.end());
  EXPECT_EQ(joined, p.records);
  for (std::size_t i = 1; i < joined.size(); ++i) {
    const auto& a = joined[i - 1];
    const auto& b = joined[i];
    EXPECT_TRUE(a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.review_id < b.review_id));
  }
  for (const auto& tr : s.train) {
    for (const auto& te : s.test) EXPECT_LE(tr.timestamp, te.timestamp);
  }
}

TEST(DesiredDistribution, UsesRosterShares) {
  auto bssw = desired_distribution(fixtures::roster(9, 9));
  EXPECT_DOUBLE_EQ(bssw.at(Gender::female), 0.5);
  EXPECT_DOUBLE_EQ(bssw.at(Gender::male), 0.5);
  auto nodejs = desired_distribution(fixtures::roster(5, 28));
  EXPECT_NEAR(nodejs.at(Gender::female), 5.0 / 33.0, 1e-15);
  EXPECT_NEAR(nodejs.at(Gender::male), 28.0 / 33.0, 1e-15);
  EXPECT_THROW(desired_distribution(fixtures::roster(0, 4)), InputError);
}

TEST(DesiredDistribution, SharesSumToOneAndStayInside) {
  for (std::size_t f = 1; f < 40; f += 3) {
    for (std::size_t m = 1; m < 200; m += 7) {
      auto d = desired_distribution(fixtures::roster(f, m));
      EXPECT_NEAR(d.at(Gender::female) + d.at(Gender::male), 1.0, 1e-12);
      EXPECT_GT(d.at(Gender::female), 0.0);
      EXPECT_LT(d.at(Gender::female), 1.0);
    }
  }
}

TEST(GroupDistribution, RejectsDegenerateShares) {
  EXPECT_THROW(GroupDistribution(1.0, 0.0), InputError);
  EXPECT_THROW(GroupDistribution(0.3, 0.3), InputError);
}

TEST(DatasetJson, RoundTripsAndValidatesReferences) {
  auto p = with_records(5);
  auto back = dataset_from_json(nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(back.roster, p.roster);
  EXPECT_EQ(back.records, p.records);
  auto doc = nlohmann::json::parse(to_json(p).dump());
  doc["records"][0]["actual_reviewers"] = {"nobody"};
  EXPECT_THROW(dataset_from_json(doc), InputError);
}

}  // namespace
}  // namespace fairrank
