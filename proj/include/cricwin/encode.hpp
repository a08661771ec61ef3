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

// Innings encoding: vocabularies, the feature layout, legal-ball merging and
// the fixed 300-step sequences consumed by the recurrent model.
//
// Layout (layout_version 1), in column order:
//
//   [0, 6)   continuous: ball_index t/300, over/49, ball_in_over/6,
//            runs_off_bat/6, extras/6, wicket
//   team     one-hot batting team (size = team vocabulary incl. UNK)
//   batsman, non_striker, bowler
//            one-hot blocks over one shared player vocabulary
//   aug      prematch_prob (row 1 only), target/350, fi_wickets/10
//
// Rows are stored sparsely; padded rows past valid_length are implicit zeros.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cricwin/error.hpp"
#include "cricwin/format.hpp"
#include "cricwin/ingest.hpp"
#include "cricwin/rng.hpp"

namespace cricwin {

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

enum class VocabKind { Team, Player, Venue };

constexpr std::string_view to_string(VocabKind kind) {
  switch (kind) {
    case VocabKind::Team: return "team";
    case VocabKind::Player: return "player";
    case VocabKind::Venue: return "venue";
  }
  return "team";
}

struct Vocabulary {
  VocabKind kind = VocabKind::Team;
  std::map<std::string, int> token_to_index;
  int min_count = 1;
  int cap = 0;
  int unk_index = 0;

  int size() const { return unk_index + 1; }

  int index_of(const std::string& token) const {
    const auto it = token_to_index.find(token);
    return it == token_to_index.end() ? unk_index : it->second;
  }

  std::optional<int> find(const std::string& token) const {
    const auto it = token_to_index.find(token);
    if (it == token_to_index.end()) return std::nullopt;
    return it->second;
  }

  /// Tokens in index order (UNK excluded).
  std::vector<std::string> tokens() const {
    std::vector<std::string> out(token_to_index.size());
    for (const auto& [token, index] : token_to_index) out[static_cast<std::size_t>(index)] = token;
    return out;
  }

  bool operator==(const Vocabulary&) const = default;
};

/// Number of matches each token appears in, per kind.
inline std::map<std::string, int> token_match_counts(const std::vector<MatchRecord>& matches, VocabKind kind) {
  std::map<std::string, int> counts;
  for (const auto& m : matches) {
    std::set<std::string> seen;
    switch (kind) {
      case VocabKind::Team:
        seen.insert(m.teams.begin(), m.teams.end());
        break;
      case VocabKind::Venue:
        seen.insert(m.venue);
        break;
      case VocabKind::Player:
        for (const auto& d : m.deliveries) {
          seen.insert(d.batsman);
          seen.insert(d.non_striker);
          seen.insert(d.bowler);
        }
        break;
    }
    for (const auto& token : seen)
      if (!token.empty()) ++counts[token];
  }
  return counts;
}

/// Keeps tokens seen in at least `min_count` matches, the `cap` most frequent
/// of them (ties broken lexicographically); everything else maps to UNK.
/// Call with training matches only.
inline Vocabulary build_vocabulary(const std::vector<MatchRecord>& matches, VocabKind kind, int min_count,
                                   int cap) {
  if (matches.empty()) fail(ErrorCode::EmptyCorpus, "cannot build a vocabulary from zero matches");
  if (cap < 0) fail(ErrorCode::InvalidArgument, "vocabulary cap must be >= 0");

  std::vector<std::pair<std::string, int>> ranked;
  for (const auto& [token, count] : token_match_counts(matches, kind))
    if (count >= min_count) ranked.emplace_back(token, count);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(cap)) ranked.resize(static_cast<std::size_t>(cap));

  Vocabulary v;
  v.kind = kind;
  v.min_count = min_count;
  v.cap = cap;
  for (std::size_t i = 0; i < ranked.size(); ++i) v.token_to_index.emplace(ranked[i].first, static_cast<int>(i));
  v.unk_index = static_cast<int>(ranked.size());
  return v;
}

struct Vocabularies {
  Vocabulary team;
  Vocabulary player;

  bool operator==(const Vocabularies&) const = default;
};

struct EncodeSettings {
  int team_min_count = 2;
  int team_cap = 40;
  int player_min_count = 5;
  int player_cap = 500;
};

inline Vocabularies build_vocabularies(const std::vector<MatchRecord>& train, const EncodeSettings& s) {
  return {build_vocabulary(train, VocabKind::Team, s.team_min_count, s.team_cap),
          build_vocabulary(train, VocabKind::Player, s.player_min_count, s.player_cap)};
}

// ---------------------------------------------------------------------------
// Feature layout
// ---------------------------------------------------------------------------

struct SlotRange {
  int offset = 0;
  int size = 0;

  int end() const { return offset + size; }
  bool operator==(const SlotRange&) const = default;
};

// Column offsets inside the continuous block.
inline constexpr int kBallIndexSlot = 0;
inline constexpr int kOverSlot = 1;
inline constexpr int kBallInOverSlot = 2;
inline constexpr int kRunsSlot = 3;
inline constexpr int kExtrasSlot = 4;
inline constexpr int kWicketSlot = 5;
inline constexpr int kContinuousSlots = 6;

// Offsets inside the augmentation block.
inline constexpr int kPrematchSlot = 0;
inline constexpr int kTargetSlot = 1;
inline constexpr int kFiWicketsSlot = 2;
inline constexpr int kAugSlots = 3;

// Normalization constants.
inline constexpr double kBallsNorm = 300.0;
inline constexpr double kOverNorm = 49.0;
inline constexpr double kBallInOverNorm = 6.0;
inline constexpr double kPerBallRunsNorm = 6.0;
inline constexpr double kTargetNorm = 350.0;
inline constexpr double kCumRunsNorm = 350.0;
inline constexpr double kCumExtrasNorm = 75.0;
inline constexpr double kWicketsNorm = 10.0;

struct FeatureLayout {
  int layout_version = kLayoutVersion;
  SlotRange continuous;
  SlotRange team;
  SlotRange batsman;
  SlotRange non_striker;
  SlotRange bowler;
  SlotRange aug;
  int total_dim = 0;

  std::vector<std::pair<std::string, SlotRange>> blocks() const {
    return {{"continuous", continuous}, {"team", team},     {"batsman", batsman},
            {"non_striker", non_striker}, {"bowler", bowler}, {"aug", aug}};
  }

  bool operator==(const FeatureLayout&) const = default;
};

inline FeatureLayout make_layout(int team_size, int player_size) {
  if (team_size < 1 || player_size < 1) fail(ErrorCode::InvalidArgument, "vocabulary sizes must be >= 1");
  FeatureLayout l;
  int at = 0;
  auto take = [&at](int n) {
    SlotRange r{at, n};
    at += n;
    return r;
  };
  l.continuous = take(kContinuousSlots);
  l.team = take(team_size);
  l.batsman = take(player_size);
  l.non_striker = take(player_size);
  l.bowler = take(player_size);
  l.aug = take(kAugSlots);
  l.total_dim = at;
  return l;
}

inline FeatureLayout make_layout(const Vocabularies& v) { return make_layout(v.team.size(), v.player.size()); }

/// Ranges are contiguous, disjoint and cover [0, total_dim) in block order.
inline bool layout_is_consistent(const FeatureLayout& l) {
  int at = 0;
  for (const auto& [name, r] : l.blocks()) {
    if (r.offset != at || r.size < 1) return false;
    at = r.end();
  }
  return at == l.total_dim && l.continuous.size == kContinuousSlots && l.aug.size == kAugSlots &&
         l.batsman.size == l.non_striker.size && l.batsman.size == l.bowler.size;
}

inline void check_layout(const FeatureLayout& l, const Vocabularies& v) {
  if (l.layout_version != kLayoutVersion)
    fail(ErrorCode::VersionMismatch, "layout_version " + std::to_string(l.layout_version));
  if (!layout_is_consistent(l)) fail(ErrorCode::LayoutMismatch, "feature layout ranges are inconsistent");
  if (l.team.size != v.team.size() || l.batsman.size != v.player.size())
    fail(ErrorCode::LayoutMismatch, "vocabulary sizes disagree with the feature layout");
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

struct FeatureEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  bool operator==(const FeatureEntry&) const = default;
};

/// Sparse feature row: nonzero entries sorted by column.
using FeatureRow = std::vector<FeatureEntry>;

struct InningsSequence {
  std::string match_id;
  int total_dim = 0;
  int valid_length = 0;
  bool label = false;
  std::vector<FeatureRow> rows;         // valid_length rows
  std::vector<std::uint8_t> loss_mask;  // kMaxBalls flags

  /// Feature at 0-based step and column; zero past valid_length.
  double at(int step, int column) const {
    if (step < 0 || step >= valid_length) return 0.0;
    for (const auto& e : rows[static_cast<std::size_t>(step)])
      if (e.index == static_cast<std::uint32_t>(column)) return e.value;
    return 0.0;
  }

  std::vector<double> dense_row(int step) const {
    std::vector<double> out(static_cast<std::size_t>(total_dim), 0.0);
    if (step >= 0 && step < valid_length)
      for (const auto& e : rows[static_cast<std::size_t>(step)]) out[e.index] = e.value;
    return out;
  }

  /// Full kMaxBalls x total_dim row-major matrix.
  std::vector<double> dense() const {
    std::vector<double> out(static_cast<std::size_t>(kMaxBalls) * static_cast<std::size_t>(total_dim), 0.0);
    for (int t = 0; t < valid_length; ++t)
      for (const auto& e : rows[static_cast<std::size_t>(t)])
        out[static_cast<std::size_t>(t) * static_cast<std::size_t>(total_dim) + e.index] = e.value;
    return out;
  }

  bool operator==(const InningsSequence&) const = default;
};

inline std::vector<std::uint8_t> mask_for_length(int valid_length) {
  std::vector<std::uint8_t> mask(kMaxBalls, 0);
  std::fill_n(mask.begin(), std::clamp(valid_length, 0, kMaxBalls), std::uint8_t{1});
  return mask;
}

// ---------------------------------------------------------------------------
// Legal-ball merging
// ---------------------------------------------------------------------------

struct LegalBall {
  int over = 0;
  int ball_in_over = 1;
  std::string batting_team;
  std::string batsman;
  std::string non_striker;
  std::string bowler;
  int runs_off_bat = 0;
  int extras = 0;
  bool wicket = false;

  bool operator==(const LegalBall&) const = default;
};

struct LegalizeReport {
  int merged_backward = 0;  // illegal deliveries folded into the previous legal ball
  int merged_forward = 0;   // illegal deliveries opening an over, folded into the next one
  int truncated = 0;        // legal balls beyond kMaxBalls
  int dropped = 0;          // illegal deliveries with no legal ball to attach to
};

struct LegalInnings {
  std::vector<LegalBall> balls;
  LegalizeReport report;

  int valid_length() const { return static_cast<int>(balls.size()); }
};

inline LegalBall to_legal_ball(const DeliveryRecord& d) {
  return {d.over, d.ball_in_over, d.batting_team, d.batsman, d.non_striker,
          d.bowler, d.runs_off_bat, d.extras, d.wicket};
}

inline void absorb(LegalBall& into, const DeliveryRecord& d) {
  into.runs_off_bat += d.runs_off_bat;
  into.extras += d.extras;
  into.wicket = into.wicket || d.wicket;
}

/// Folds wides and no-balls into the preceding legal ball of the same over,
/// or into the next legal ball when they open the over, giving at most
/// kMaxBalls records. Input must be one innings in delivery order.
inline LegalInnings legalize_deliveries(const std::vector<DeliveryRecord>& deliveries) {
  LegalInnings out;
  std::vector<const DeliveryRecord*> pending;
  bool full = false;
  for (const auto& d : deliveries) {
    if (is_legal(d.extras_kind)) {
      if (full) {
        ++out.report.truncated;
        continue;
      }
      LegalBall ball = to_legal_ball(d);
      for (const auto* p : pending) absorb(ball, *p);
      out.report.merged_forward += static_cast<int>(pending.size());
      pending.clear();
      out.balls.push_back(std::move(ball));
      full = out.valid_length() == kMaxBalls;
      continue;
    }
    if (!out.balls.empty() && out.balls.back().over == d.over && pending.empty()) {
      if (full && out.report.truncated > 0) {
        ++out.report.dropped;
        continue;
      }
      absorb(out.balls.back(), d);
      ++out.report.merged_backward;
    } else if (full) {
      ++out.report.dropped;
    } else {
      pending.push_back(&d);
    }
  }
  // An innings ending on illegal deliveries with no legal ball in that over.
  if (!pending.empty()) {
    if (out.balls.empty() || full) {
      out.report.dropped += static_cast<int>(pending.size());
    } else {
      for (const auto* p : pending) absorb(out.balls.back(), *p);
      out.report.merged_backward += static_cast<int>(pending.size());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

struct AugmentationFlags {
  bool prematch = false;
  bool target = false;
  bool wickets = false;

  bool any() const { return prematch || target || wickets; }
  bool operator==(const AugmentationFlags&) const = default;
};

struct AugmentationInputs {
  AugmentationFlags enabled;
  std::optional<double> prematch_prob;
  std::optional<int> target_score;
  std::optional<int> fi_wickets;
};

/// Target (first-innings runs + 1) and first-innings wickets from the match.
inline AugmentationInputs augmentation_for(const MatchRecord& m, AugmentationFlags flags,
                                           std::optional<double> prematch_prob = std::nullopt) {
  AugmentationInputs aug;
  aug.enabled = flags;
  aug.prematch_prob = prematch_prob;
  aug.target_score = m.first_innings_runs + 1;
  aug.fi_wickets = m.first_innings_wickets;
  return aug;
}

inline void check_augmentation(const AugmentationInputs& aug) {
  if (aug.enabled.prematch && !aug.prematch_prob)
    fail(ErrorCode::MissingAugmentation, "prematch augmentation enabled without a probability");
  if (aug.enabled.target && !aug.target_score)
    fail(ErrorCode::MissingAugmentation, "target augmentation enabled without a target score");
  if (aug.enabled.wickets && !aug.fi_wickets)
    fail(ErrorCode::MissingAugmentation, "wickets augmentation enabled without first-innings wickets");
}

/// One encoded legal ball at 0-based `step`. Shared by offline encoding and
/// the streaming session so both produce identical rows.
inline FeatureRow encode_ball(const LegalBall& ball, int step, const Vocabularies& vocabs,
                              const FeatureLayout& layout, const AugmentationInputs& aug) {
  FeatureRow row;
  row.reserve(16);
  auto put = [&row](int column, double value) {
    if (value != 0.0) row.push_back({static_cast<std::uint32_t>(column), value});
  };
  const int c = layout.continuous.offset;
  put(c + kBallIndexSlot, (step + 1) / kBallsNorm);
  put(c + kOverSlot, ball.over / kOverNorm);
  put(c + kBallInOverSlot, ball.ball_in_over / kBallInOverNorm);
  put(c + kRunsSlot, ball.runs_off_bat / kPerBallRunsNorm);
  put(c + kExtrasSlot, ball.extras / kPerBallRunsNorm);
  put(c + kWicketSlot, ball.wicket ? 1.0 : 0.0);
  put(layout.team.offset + vocabs.team.index_of(ball.batting_team), 1.0);
  put(layout.batsman.offset + vocabs.player.index_of(ball.batsman), 1.0);
  put(layout.non_striker.offset + vocabs.player.index_of(ball.non_striker), 1.0);
  put(layout.bowler.offset + vocabs.player.index_of(ball.bowler), 1.0);
  const int a = layout.aug.offset;
  if (aug.enabled.prematch && step == 0) put(a + kPrematchSlot, *aug.prematch_prob);
  if (aug.enabled.target) put(a + kTargetSlot, *aug.target_score / kTargetNorm);
  if (aug.enabled.wickets) put(a + kFiWicketsSlot, *aug.fi_wickets / kWicketsNorm);
  return row;
}

inline InningsSequence encode_legal_innings(const LegalInnings& legal, const std::string& match_id, bool label,
                                            const Vocabularies& vocabs, const FeatureLayout& layout,
                                            const AugmentationInputs& aug) {
  check_layout(layout, vocabs);
  check_augmentation(aug);
  if (legal.balls.empty()) fail(ErrorCode::EmptyInnings, match_id + ": innings has no legal balls");
  InningsSequence seq;
  seq.match_id = match_id;
  seq.total_dim = layout.total_dim;
  seq.valid_length = legal.valid_length();
  seq.label = label;
  seq.loss_mask = mask_for_length(seq.valid_length);
  seq.rows.reserve(legal.balls.size());
  for (int t = 0; t < seq.valid_length; ++t)
    seq.rows.push_back(encode_ball(legal.balls[static_cast<std::size_t>(t)], t, vocabs, layout, aug));
  return seq;
}

inline InningsSequence encode_innings(const MatchRecord& m, int innings_no, const Vocabularies& vocabs,
                                      const FeatureLayout& layout, const AugmentationInputs& aug) {
  if (innings_no != 1 && innings_no != 2)
    fail(ErrorCode::UnknownInnings, m.match_id + ": innings " + std::to_string(innings_no));
  const auto deliveries = m.innings(innings_no);
  if (deliveries.empty())
    fail(ErrorCode::UnknownInnings, m.match_id + ": no deliveries in innings " + std::to_string(innings_no));
  const bool label = m.winner.has_value() && *m.winner == deliveries.front().batting_team;
  return encode_legal_innings(legalize_deliveries(deliveries), m.match_id, label, vocabs, layout, aug);
}

/// Replaces the per-ball runs/extras/wicket slots with running totals:
/// (bat + extras)/350, extras/75, wickets/10. Apply once to a plain encoding.
inline InningsSequence cumulative_transform(const InningsSequence& seq) {
  InningsSequence out = seq;
  long total = 0, extras = 0, wickets = 0;
  for (auto& row : out.rows) {
    long runs_here = 0, extras_here = 0;
    bool wicket_here = false;
    FeatureRow next;
    next.reserve(row.size());
    for (const auto& e : row) {
      if (e.index == kRunsSlot) runs_here = std::lround(e.value * kPerBallRunsNorm);
      else if (e.index == kExtrasSlot) extras_here = std::lround(e.value * kPerBallRunsNorm);
      else if (e.index == kWicketSlot) wicket_here = e.value > 0.5;
    }
    total += runs_here + extras_here;
    extras += extras_here;
    wickets += wicket_here ? 1 : 0;
    bool placed = false;
    auto place = [&] {
      if (total != 0) next.push_back({kRunsSlot, static_cast<double>(total) / kCumRunsNorm});
      if (extras != 0) next.push_back({kExtrasSlot, static_cast<double>(extras) / kCumExtrasNorm});
      if (wickets != 0) next.push_back({kWicketSlot, static_cast<double>(wickets) / kWicketsNorm});
      placed = true;
    };
    for (const auto& e : row) {
      if (e.index >= kRunsSlot && e.index <= kWicketSlot) continue;
      if (!placed && e.index > kWicketSlot) place();
      next.push_back(e);
    }
    if (!placed) place();
    row = std::move(next);
  }
  return out;
}

/// First `length` steps of a sequence; the prefix keeps the match label.
inline InningsSequence prefix(const InningsSequence& seq, int length) {
  if (length < 1 || length > seq.valid_length) fail(ErrorCode::InvalidArgument, "prefix length out of range");
  InningsSequence out;
  out.match_id = seq.match_id;
  out.total_dim = seq.total_dim;
  out.valid_length = length;
  out.label = seq.label;
  out.rows.assign(seq.rows.begin(), seq.rows.begin() + length);
  out.loss_mask = mask_for_length(length);
  return out;
}

/// `count` prefix lengths drawn uniformly from [1, valid_length].
inline std::vector<int> sample_prefixes(int valid_length, int count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "prefix count must be >= 1");
  if (valid_length < 1) fail(ErrorCode::InvalidArgument, "valid_length must be >= 1");
  Rng rng(seed);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (auto& len : out) len = static_cast<int>(rng.between(1, valid_length));
  return out;
}

inline std::vector<int> sample_prefixes(const InningsSequence& seq, int count, std::uint64_t seed) {
  return sample_prefixes(seq.valid_length, count, seed);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const Vocabulary& v) {
  j = nlohmann::json{{"kind", std::string(to_string(v.kind))},
                     {"min_count", v.min_count},
                     {"cap", v.cap},
                     {"unk_index", v.unk_index},
                     {"tokens", v.tokens()}};
}

inline void from_json(const nlohmann::json& j, Vocabulary& v) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "team") v.kind = VocabKind::Team;
  else if (kind == "player") v.kind = VocabKind::Player;
  else if (kind == "venue") v.kind = VocabKind::Venue;
  else fail(ErrorCode::CorruptCheckpoint, "unknown vocabulary kind " + kind);
  v.min_count = j.at("min_count").get<int>();
  v.cap = j.at("cap").get<int>();
  const auto tokens = j.at("tokens").get<std::vector<std::string>>();
  v.token_to_index.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) v.token_to_index.emplace(tokens[i], static_cast<int>(i));
  v.unk_index = j.at("unk_index").get<int>();
  if (v.unk_index != static_cast<int>(tokens.size()) || v.token_to_index.size() != tokens.size())
    fail(ErrorCode::CorruptCheckpoint, "vocabulary tokens are inconsistent with unk_index");
}

inline void to_json(nlohmann::json& j, const Vocabularies& v) {
  j = nlohmann::json{{"team", v.team}, {"player", v.player}};
}

inline void from_json(const nlohmann::json& j, Vocabularies& v) {
  v.team = j.at("team").get<Vocabulary>();
  v.player = j.at("player").get<Vocabulary>();
}

inline void to_json(nlohmann::json& j, const SlotRange& r) { j = nlohmann::json::array({r.offset, r.size}); }

inline void from_json(const nlohmann::json& j, SlotRange& r) {
  r.offset = j.at(0).get<int>();
  r.size = j.at(1).get<int>();
}

inline void to_json(nlohmann::json& j, const FeatureLayout& l) {
  j = nlohmann::json{{"layout_version", l.layout_version},
                     {"continuous", l.continuous},
                     {"continuous_slots",
                      {{"ball_index", kBallIndexSlot},
                       {"over", kOverSlot},
                       {"ball_in_over", kBallInOverSlot},
                       {"runs_off_bat", kRunsSlot},
                       {"extras", kExtrasSlot},
                       {"wicket", kWicketSlot}}},
                     {"team", l.team},
                     {"batsman", l.batsman},
                     {"non_striker", l.non_striker},
                     {"bowler", l.bowler},
                     {"aug", l.aug},
                     {"aug_slots", {{"prematch_prob", kPrematchSlot}, {"target_norm", kTargetSlot},
                                    {"fi_wickets_norm", kFiWicketsSlot}}},
                     {"total_dim", l.total_dim}};
}

inline void from_json(const nlohmann::json& j, FeatureLayout& l) {
  l.layout_version = j.at("layout_version").get<int>();
  if (l.layout_version != kLayoutVersion)
    fail(ErrorCode::VersionMismatch, "layout_version " + std::to_string(l.layout_version));
  l.continuous = j.at("continuous").get<SlotRange>();
  l.team = j.at("team").get<SlotRange>();
  l.batsman = j.at("batsman").get<SlotRange>();
  l.non_striker = j.at("non_striker").get<SlotRange>();
  l.bowler = j.at("bowler").get<SlotRange>();
  l.aug = j.at("aug").get<SlotRange>();
  l.total_dim = j.at("total_dim").get<int>();
  if (!layout_is_consistent(l)) fail(ErrorCode::CorruptCheckpoint, "feature layout ranges are inconsistent");
}

}  // namespace cricwin
