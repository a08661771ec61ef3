// Copyright 2026 The cricwin Authors
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

#include <filesystem>
#include <string>

#include "cricwin/ingest.hpp"
#include "cricwin/synthetic.hpp"

namespace cw = cricwin;

namespace {

const std::filesystem::path kFixtures = CRICWIN_FIXTURE_DIR;

cw::MatchRecord fixture(const std::string& name) { return cw::parse_match_path(kFixtures / (name + ".csv")); }

cw::ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const cw::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cricwin::Error thrown";
  return cw::ErrorCode::IoError;
}

}  // namespace

TEST(Parse, FirstInningsRunsSumOverFourRows) {
  const auto m = fixture("basic");
  EXPECT_EQ(m.innings(1).size(), 4u);
  EXPECT_EQ(m.first_innings_runs, 7);
  EXPECT_EQ(m.first_innings_wickets, 1);
  EXPECT_EQ(m.teams[0], "India");
  EXPECT_EQ(m.teams[1], "Australia");
  EXPECT_EQ(m.winner, "India");
  EXPECT_EQ(m.city, "Ahmedabad");
  EXPECT_EQ(m.outcome_kind, cw::OutcomeKind::Normal);
}

TEST(Parse, ExtrasAndWicketsAreRead) {
  const auto m = fixture("basic");
  const auto inn2 = m.innings(2);
  ASSERT_EQ(inn2.size(), 8u);
  EXPECT_EQ(inn2[2].extras_kind, cw::ExtrasKind::Wide);
  EXPECT_EQ(inn2[2].extras, 1);
  EXPECT_FALSE(cw::is_legal(inn2[2].extras_kind));
  EXPECT_TRUE(inn2[5].wicket);
  EXPECT_EQ(m.innings(1)[3].extras_kind, cw::ExtrasKind::LegBye);
}

TEST(Parse, NoDeliveriesIsEmptyInnings) {
  EXPECT_EQ(code_of([] { fixture("no_deliveries"); }), cw::ErrorCode::EmptyInnings);
}

TEST(Parse, OverBallField) {
  const std::string csv =
      "info,teams,A\ninfo,teams,B\ninfo,winner,A\n"
      "ball,1,49.6,A,x,y,z,0,0,,\n";
  const auto m = cw::parse_match_file(csv, "m");
  ASSERT_EQ(m.deliveries.size(), 1u);
  EXPECT_EQ(m.deliveries[0].over, 49);
  EXPECT_EQ(m.deliveries[0].ball_in_over, 6);
}

TEST(Parse, WrongColumnCountIsMalformed) {
  try {
    fixture("bad_columns");
    FAIL();
  } catch (const cw::Error& e) {
    EXPECT_EQ(e.code(), cw::ErrorCode::MalformedRow);
    EXPECT_NE(std::string(e.what()).find("line 8"), std::string::npos) << e.what();
  }
}

TEST(Parse, UnparsableNumberIsMalformed) {
  const std::string csv = "info,teams,A\ninfo,teams,B\ninfo,winner,A\nball,1,0.1,A,x,y,z,four,0,,\n";
  EXPECT_EQ(code_of([&] { cw::parse_match_file(csv, "m"); }), cw::ErrorCode::MalformedRow);
}

TEST(Parse, MissingTeamsOrOutcome) {
  EXPECT_EQ(code_of([] { cw::parse_match_file("info,teams,A\ninfo,winner,A\nball,1,0.1,A,x,y,z,0,0,,\n", "m"); }),
            cw::ErrorCode::MissingMetadata);
  EXPECT_EQ(code_of([] { cw::parse_match_file("info,teams,A\ninfo,teams,B\nball,1,0.1,A,x,y,z,0,0,,\n", "m"); }),
            cw::ErrorCode::MissingMetadata);
}

TEST(Parse, UnknownKeysIgnoredAndQuotedValues) {
  const auto m = fixture("tie");
  EXPECT_EQ(m.venue, "M Chinnaswamy Stadium, Bangalore");
  EXPECT_EQ(m.outcome_kind, cw::OutcomeKind::Tie);
  EXPECT_EQ(fixture("no_result").outcome_kind, cw::OutcomeKind::NoResult);
  EXPECT_EQ(fixture("dl").outcome_kind, cw::OutcomeKind::DlAdjusted);
}

TEST(Validate, WellFormedFixtureHasNoViolations) {
  for (const char* name : {"basic", "tie", "dl"}) EXPECT_TRUE(cw::validate_match(fixture(name)).empty()) << name;
}

TEST(Validate, ForeignWinner) {
  auto m = fixture("basic");
  m.winner = "Mars";
  const auto v = cw::validate_match(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "winner");
}

TEST(Validate, OutOfOrderDeliveries) {
  auto m = fixture("basic");
  std::swap(m.deliveries[0], m.deliveries[1]);
  const auto v = cw::validate_match(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "deliveries");
  EXPECT_NE(v[0].rule.find("non-decreasing"), std::string::npos);
}

TEST(Validate, StaleDerivedTotal) {
  auto m = fixture("basic");
  m.first_innings_runs += 1;
  const auto v = cw::validate_match(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "first_innings_runs");
}

TEST(Filter, DefaultKeepsOnlyNormal) {
  const std::vector<cw::MatchRecord> corpus{fixture("basic"), fixture("tie"), fixture("no_result")};
  const auto kept = cw::filter_corpus(corpus);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].match_id, "basic");
}

TEST(Filter, PolicyRetainingTies) {
  cw::FilterPolicy policy;
  policy.retain.insert(cw::OutcomeKind::Tie);
  const auto kept = cw::filter_corpus({fixture("basic"), fixture("tie"), fixture("dl")}, policy);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1].match_id, "tie");
}

TEST(Filter, ShortChaseDropped) {
  auto m = fixture("basic");
  m.deliveries.resize(m.innings(1).size() + 4);
  ASSERT_EQ(m.innings(2).size(), 4u);
  cw::FilterPolicy policy;
  EXPECT_TRUE(cw::filter_corpus({m}, policy).empty());
  policy.min_second_innings_deliveries = 4;
  EXPECT_EQ(cw::filter_corpus({m}, policy).size(), 1u);
}

TEST(Filter, OutputHasDefiniteWinners) {
  cw::SyntheticOptions opt;
  opt.matches = 30;
  auto corpus = cw::generate_synthetic_corpus(opt, 3);
  corpus[4].outcome_kind = cw::OutcomeKind::Tie;
  corpus[9].outcome_kind = cw::OutcomeKind::DlAdjusted;
  const auto kept = cw::filter_corpus(corpus);
  EXPECT_EQ(kept.size(), 28u);
  for (const auto& m : kept) {
    EXPECT_EQ(m.outcome_kind, cw::OutcomeKind::Normal);
    EXPECT_TRUE(m.winner.has_value());
  }
}

namespace {
std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("m" + std::to_string(1000 + i));
  return out;
}
}  // namespace

TEST(Split, CardinalityAndDisjointness) {
  const auto s = cw::split_corpus(ids(10), 0.8, 7);
  EXPECT_EQ(s.train_ids.size(), 8u);
  EXPECT_EQ(s.test_ids.size(), 2u);
  for (const auto& id : s.test_ids)
    EXPECT_FALSE(std::binary_search(s.train_ids.begin(), s.train_ids.end(), id));
}

TEST(Split, Deterministic) { EXPECT_EQ(cw::split_corpus(ids(10), 0.8, 7), cw::split_corpus(ids(10), 0.8, 7)); }

TEST(Split, InputOrderDoesNotMatter) {
  auto shuffled = ids(40);
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(cw::split_corpus(shuffled, 0.75, 11), cw::split_corpus(ids(40), 0.75, 11));
}

TEST(Split, SeedsDiffer) {
  const auto a = cw::split_corpus(ids(100), 0.8, 7);
  const auto b = cw::split_corpus(ids(100), 0.8, 8);
  EXPECT_NE(a.train_ids, b.train_ids);
}

TEST(Split, RoundedTrainSize) {
  for (int n : {2, 3, 7, 33, 101}) {
    const auto s = cw::split_corpus(ids(n), 0.8, 1);
    const long expected = std::clamp(std::lround(0.8 * n), 1L, static_cast<long>(n - 1));
    EXPECT_EQ(static_cast<long>(s.train_ids.size()), expected);
    EXPECT_EQ(s.train_ids.size() + s.test_ids.size(), static_cast<std::size_t>(n));
  }
}

TEST(Split, Errors) {
  EXPECT_EQ(code_of([] { cw::split_corpus(ids(1), 0.8, 1); }), cw::ErrorCode::TooFewMatches);
  EXPECT_EQ(code_of([] { cw::split_corpus(ids(5), 1.0, 1); }), cw::ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { cw::split_corpus(ids(5), 0.0, 1); }), cw::ErrorCode::InvalidArgument);
}

TEST(Json, MatchRoundTrip) {
  for (const char* name : {"basic", "tie", "no_result", "dl"}) {
    const auto m = fixture(name);
    const nlohmann::json j = m;
    EXPECT_EQ(nlohmann::json::parse(j.dump()).get<cw::MatchRecord>(), m) << name;
  }
}

TEST(Json, ManifestRoundTrip) {
  cw::SyntheticOptions opt;
  opt.matches = 12;
  opt.illegal_rate = 0.05;
  cw::Manifest man;
  man.matches = cw::generate_synthetic_corpus(opt, 5);
  man.split = cw::split_corpus(man.matches, 0.8, 7);
  const auto back = cw::manifest_from_json(nlohmann::json::parse(cw::manifest_to_json(man).dump()));
  EXPECT_EQ(back.matches, man.matches);
  EXPECT_EQ(back.split, man.split);
  EXPECT_EQ(back.train().size() + back.test().size(), man.matches.size());
}

TEST(Json, ManifestVersionChecked) {
  cw::Manifest man;
  auto j = cw::manifest_to_json(man);
  j["format_version"] = 99;
  EXPECT_EQ(code_of([&] { cw::manifest_from_json(j); }), cw::ErrorCode::VersionMismatch);
}

TEST(Property, ConservationAndCsvRoundTrip) {
  cw::SyntheticOptions opt;
  opt.matches = 25;
  opt.illegal_rate = 0.04;
  for (const auto& m : cw::generate_synthetic_corpus(opt, 17)) {
    int runs = 0;
    for (const auto& d : m.deliveries)
      if (d.innings_no == 1) runs += d.runs_off_bat + d.extras;
    EXPECT_EQ(m.first_innings_runs, runs);
    EXPECT_TRUE(cw::validate_match(m).empty());
    EXPECT_EQ(cw::parse_match_file(cw::to_csv(m), m.match_id), m);
  }
}

TEST(Corpus, DirectoryLoadReportsFailures) {
  const auto load = cw::load_corpus_dir(kFixtures);
  EXPECT_EQ(load.matches.size(), 4u);
  EXPECT_EQ(load.failures.size(), 2u);
  EXPECT_EQ(load.matches[0].match_id, "basic");
}
