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

// Synthetic ODI corpus with a constructible ground truth: both innings run
// the full 300 legal balls and the chasing side wins iff its total reaches
// first-innings runs + 1. Per-ball scoring depends on a per-innings strength
// drawn around a fixed per-team base, so early balls carry signal too.

#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "cricwin/ingest.hpp"
#include "cricwin/rng.hpp"

namespace cricwin {

struct SyntheticOptions {
  int matches = 250;
  int teams = 8;
  int players_per_team = 14;
  int venues = 6;
  double min_strength = 0.3;
  double max_strength = 2.5;
  double strength_jitter = 0.35;  // per-innings deviation from the team base
  double home_advantage = 0.0;    // added when team t plays at ground t % venues
  double wicket_rate = 0.025;
  double legbye_rate = 0.01;
  double illegal_rate = 0.0;  // wides / no-balls inserted before legal balls
};

namespace detail {

inline std::string synthetic_team(int t) { return "Team " + std::string(1, static_cast<char>('A' + t)); }

inline std::string synthetic_player(int t, int p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%c%02d", 'A' + t, p);
  return buf;
}

inline int synthetic_runs(Rng& rng, double strength) {
  const double u = rng.uniform();
  const double p4 = 0.08 * strength;
  const double p6 = 0.02 * strength;
  double acc = 0.32;
  if (u < acc) return 1;
  if (u < (acc += 0.07)) return 2;
  if (u < (acc += 0.01)) return 3;
  if (u < (acc += p4)) return 4;
  if (u < (acc += p6)) return 6;
  return 0;
}

inline void synthetic_innings(MatchRecord& m, int innings_no, int batting, int fielding, double strength,
                              const SyntheticOptions& opt, Rng& rng) {
  const std::string team = synthetic_team(batting);
  int striker = 0, non_striker = 1, next_in = 2, wickets = 0;
  for (int over = 0; over < 50; ++over) {
    const std::string bowler = synthetic_player(fielding, opt.players_per_team - 1 - over % 5);
    for (int ball = 1; ball <= 6; ++ball) {
      DeliveryRecord d;
      d.innings_no = innings_no;
      d.over = over;
      d.ball_in_over = ball;
      d.batting_team = team;
      d.batsman = synthetic_player(batting, striker);
      d.non_striker = synthetic_player(batting, non_striker);
      d.bowler = bowler;
      if (opt.illegal_rate > 0.0 && rng.bernoulli(opt.illegal_rate)) {
        DeliveryRecord extra = d;
        const bool wide = rng.bernoulli(0.6);
        extra.extras_kind = wide ? ExtrasKind::Wide : ExtrasKind::NoBall;
        extra.extras = 1;
        extra.runs_off_bat = wide ? 0 : synthetic_runs(rng, strength);
        m.deliveries.push_back(extra);
      }
      d.runs_off_bat = synthetic_runs(rng, strength);
      if (d.runs_off_bat == 0 && rng.bernoulli(opt.legbye_rate)) {
        d.extras = 1;
        d.extras_kind = ExtrasKind::LegBye;
      }
      if (wickets < 10 && rng.bernoulli(opt.wicket_rate)) {
        d.wicket = true;
        ++wickets;
        striker = next_in < opt.players_per_team ? next_in++ : striker;
      }
      if ((d.runs_off_bat + d.extras) % 2 == 1) std::swap(striker, non_striker);
      m.deliveries.push_back(std::move(d));
    }
    std::swap(striker, non_striker);
  }
}

}  // namespace detail

inline std::vector<MatchRecord> generate_synthetic_corpus(const SyntheticOptions& opt, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> base(static_cast<std::size_t>(opt.teams));
  for (auto& b : base) b = rng.uniform(opt.min_strength + 0.2, opt.max_strength - 0.2);

  std::vector<MatchRecord> out;
  out.reserve(static_cast<std::size_t>(opt.matches));
  for (int i = 0; i < opt.matches; ++i) {
    MatchRecord m;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%04d", i);
    m.match_id = id;
    const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.teams)));
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.teams - 1)));
    if (b >= a) ++b;
    m.teams = {detail::synthetic_team(a), detail::synthetic_team(b)};
    const int year = 2005 + i % 15;
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", year, 1 + i % 12, 1 + i % 28);
    m.date = date;
    m.season = std::to_string(year);
    const int venue = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.venues)));
    m.venue = "Ground " + std::to_string(venue);
    m.city = "City " + std::to_string(venue);
    m.gender = "male";
    const bool a_wins_toss = rng.bernoulli(0.5);
    m.toss_winner = a_wins_toss ? m.teams[0] : m.teams[1];
    m.toss_decision = rng.bernoulli(0.5) ? "bat" : "field";
    const bool a_bats_first = a_wins_toss == (m.toss_decision == "bat");
    const int first = a_bats_first ? a : b;
    const int second = a_bats_first ? b : a;

    auto strength = [&](int team) {
      const double home = venue == team % opt.venues ? opt.home_advantage : 0.0;
      return std::clamp(base[static_cast<std::size_t>(team)] + home + rng.uniform(-opt.strength_jitter, opt.strength_jitter),
                        opt.min_strength, opt.max_strength);
    };
    const double s1 = strength(first);
    const double s2 = strength(second);
    detail::synthetic_innings(m, 1, first, second, s1, opt, rng);
    detail::synthetic_innings(m, 2, second, first, s2, opt, rng);
    derive_totals(m);

    int chase = 0;
    for (const auto& d : m.deliveries)
      if (d.innings_no == 2) chase += d.runs_off_bat + d.extras;
    m.winner = chase >= m.first_innings_runs + 1 ? detail::synthetic_team(second) : detail::synthetic_team(first);
    m.outcome_kind = OutcomeKind::Normal;
    out.push_back(std::move(m));
  }
  return out;
}

/// Writes a match back out in the CSV dialect accepted by parse_match_file.
inline std::string to_csv(const MatchRecord& m) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out = "version,1.6.0\n";
  out += "info,teams," + quote(m.teams[0]) + "\n";
  out += "info,teams," + quote(m.teams[1]) + "\n";
  out += "info,gender," + m.gender + "\n";
  out += "info,season," + quote(m.season) + "\n";
  out += "info,date," + m.date + "\n";
  out += "info,venue," + quote(m.venue) + "\n";
  if (m.city) out += "info,city," + quote(*m.city) + "\n";
  out += "info,toss_winner," + quote(m.toss_winner) + "\n";
  out += "info,toss_decision," + m.toss_decision + "\n";
  switch (m.outcome_kind) {
    case OutcomeKind::Tie: out += "info,outcome,tie\n"; break;
    case OutcomeKind::NoResult: out += "info,outcome,no result\n"; break;
    case OutcomeKind::DlAdjusted: out += "info,method,D/L\n"; break;
    case OutcomeKind::Normal: break;
  }
  if (m.winner) out += "info,winner," + quote(*m.winner) + "\n";
  for (const auto& d : m.deliveries) {
    std::string kind = d.extras_kind == ExtrasKind::None ? "" : std::string(to_string(d.extras_kind));
    out += "ball," + std::to_string(d.innings_no) + "," + std::to_string(d.over) + "." +
           std::to_string(d.ball_in_over) + "," + quote(d.batting_team) + "," + quote(d.batsman) + "," +
           quote(d.non_striker) + "," + quote(d.bowler) + "," + std::to_string(d.runs_off_bat) + "," +
           std::to_string(d.extras) + "," + kind + "," + (d.wicket ? "caught" : "") + "\n";
  }
  return out;
}

}  // namespace cricwin
