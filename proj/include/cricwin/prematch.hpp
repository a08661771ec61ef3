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

// Pre-match classifiers over match-level statistics. Both learners return
// a probability that the side batting second wins; that probability feeds
// the prematch augmentation slot of the sequence encoding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cricwin/encode.hpp"
#include "cricwin/error.hpp"
#include "cricwin/format.hpp"
#include "cricwin/hash.hpp"
#include "cricwin/ingest.hpp"

namespace cricwin {

// ---------------------------------------------------------------------------
// Match-level features
// ---------------------------------------------------------------------------

struct PrematchSettings {
  int team_min_count = 1;
  int team_cap = 40;
  int venue_min_count = 2;
  int venue_cap = 100;
};

/// Vocabularies for the match feature row. Unknown tokens encode as an
/// all-zero block, so blocks carry one column per known token.
struct PrematchEncoder {
  Vocabulary team;
  Vocabulary venue;

  int team_block() const { return team.unk_index; }
  int venue_block() const { return venue.unk_index; }
  int first_offset() const { return 0; }
  int second_offset() const { return team_block(); }
  int venue_offset() const { return 2 * team_block(); }
  int toss_winner_slot() const { return venue_offset() + venue_block(); }
  int toss_decision_slot() const { return toss_winner_slot() + 1; }
  int season_slot() const { return toss_winner_slot() + 2; }
  int gender_slot() const { return toss_winner_slot() + 3; }
  int dim() const { return toss_winner_slot() + 4; }

  bool operator==(const PrematchEncoder&) const = default;
};

inline PrematchEncoder build_prematch_encoder(const std::vector<MatchRecord>& train, const PrematchSettings& s = {}) {
  return {build_vocabulary(train, VocabKind::Team, s.team_min_count, s.team_cap),
          build_vocabulary(train, VocabKind::Venue, s.venue_min_count, s.venue_cap)};
}

struct MatchFeatureRow {
  std::vector<double> values;
  bool label = false;
};

/// Batting order as fixed by the toss: {first, second}.
inline std::array<std::string, 2> batting_order(const MatchRecord& m) {
  if (m.toss_winner != m.teams[0] && m.toss_winner != m.teams[1])
    fail(ErrorCode::MissingMetadata, m.match_id + ": toss winner is not one of the teams");
  const std::string& other = m.toss_winner == m.teams[0] ? m.teams[1] : m.teams[0];
  if (m.toss_decision == "bat") return {m.toss_winner, other};
  return {other, m.toss_winner};
}

/// Leading four-digit year of a season string such as "2007/08".
inline std::optional<int> season_year(const std::string& season) {
  if (season.size() < 4) return std::nullopt;
  int year = 0;
  for (int i = 0; i < 4; ++i) {
    const char c = season[static_cast<std::size_t>(i)];
    if (c < '0' || c > '9') return std::nullopt;
    year = year * 10 + (c - '0');
  }
  return year;
}

inline MatchFeatureRow encode_match_features(const MatchRecord& m, const PrematchEncoder& enc) {
  if (enc.team.kind != VocabKind::Team || enc.venue.kind != VocabKind::Venue)
    fail(ErrorCode::LayoutMismatch, "prematch encoder vocabularies have the wrong kind");
  MatchFeatureRow row;
  row.values.assign(static_cast<std::size_t>(enc.dim()), 0.0);
  auto hot = [&](const Vocabulary& v, int offset, const std::string& token) {
    if (const auto i = v.find(token)) row.values[static_cast<std::size_t>(offset + *i)] = 1.0;
  };
  const auto order = batting_order(m);
  hot(enc.team, enc.first_offset(), order[0]);
  hot(enc.team, enc.second_offset(), order[1]);
  hot(enc.venue, enc.venue_offset(), m.venue);
  row.values[static_cast<std::size_t>(enc.toss_winner_slot())] = m.toss_winner == order[1] ? 1.0 : 0.0;
  row.values[static_cast<std::size_t>(enc.toss_decision_slot())] = m.toss_decision == "bat" ? 1.0 : 0.0;
  if (const auto year = season_year(m.season.empty() ? m.date : m.season))
    row.values[static_cast<std::size_t>(enc.season_slot())] = (*year - 1970) / 60.0;
  row.values[static_cast<std::size_t>(enc.gender_slot())] = m.gender == "female" ? 1.0 : 0.0;
  row.label = m.winner && *m.winner == order[1];
  return row;
}

// ---------------------------------------------------------------------------
// Boosted models
// ---------------------------------------------------------------------------

enum class BoostKind { AdaBoost, Gbt };

constexpr std::string_view to_string(BoostKind k) { return k == BoostKind::AdaBoost ? "adaboost" : "gbt"; }

/// x[feature] <= threshold goes left.
struct Stump {
  int feature = 0;
  double threshold = 0.0;
  double left = 0.0;
  double right = 0.0;

  double operator()(std::span<const double> x) const {
    return x[static_cast<std::size_t>(feature)] <= threshold ? left : right;
  }
  bool operator==(const Stump&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double operator()(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
  int depth(int i = 0) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    return n.feature < 0 ? 0 : 1 + std::max(depth(n.left), depth(n.right));
  }
  bool operator==(const Tree&) const = default;
};

struct BoostedModel {
  int format_version = kBoostedModelFormatVersion;
  BoostKind kind = BoostKind::AdaBoost;
  int feature_count = 0;
  int rounds = 0;  // requested; learners may be fewer after an early stop
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  std::vector<Tree> trees;
  double learning_rate = 1.0;
  double base_score = 0.0;
  std::optional<PrematchEncoder> encoder;

  std::size_t learners() const { return kind == BoostKind::AdaBoost ? stumps.size() : trees.size(); }
};

namespace detail {

inline void check_training_rows(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels) {
  if (rows.size() != labels.size()) fail(ErrorCode::InvalidArgument, "rows and labels differ in length");
  if (rows.size() < 2) fail(ErrorCode::EmptyDataset, "boosting needs at least two rows");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) fail(ErrorCode::LayoutMismatch, "rows differ in length");
    for (double v : r)
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite feature value");
  }
  const auto wins = std::count(labels.begin(), labels.end(), true);
  if (wins == 0 || wins == static_cast<std::ptrdiff_t>(labels.size()))
    fail(ErrorCode::SingleClass, "training labels contain a single class");
}

/// Row indices sorted by one feature, ties by row index.
inline std::vector<std::size_t> sorted_by(const std::vector<std::vector<double>>& rows,
                                          const std::vector<std::size_t>& subset, int f) {
  std::vector<std::size_t> idx = subset;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return rows[a][static_cast<std::size_t>(f)] < rows[b][static_cast<std::size_t>(f)];
  });
  return idx;
}

}  // namespace detail

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double ensemble_score(const BoostedModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.feature_count)
    fail(ErrorCode::LayoutMismatch, "feature row has " + std::to_string(x.size()) + " values, model expects " +
                                        std::to_string(model.feature_count));
  double score = model.base_score;
  if (model.kind == BoostKind::AdaBoost) {
    for (std::size_t k = 0; k < model.stumps.size(); ++k) score += model.alphas[k] * model.stumps[k](x);
  } else {
    for (const auto& t : model.trees) score += model.learning_rate * t(x);
  }
  return score;
}

/// Logistic of the ensemble score, kept strictly inside (0, 1).
inline double predict_proba(const BoostedModel& model, std::span<const double> x) {
  constexpr double kFloor = 1e-12;
  return std::clamp(sigmoid(ensemble_score(model, x)), kFloor, 1.0 - kFloor);
}

// ---------------------------------------------------------------------------
// AdaBoost over decision stumps
// ---------------------------------------------------------------------------

struct StumpFit {
  Stump stump;
  double error = 1.0;
};

/// Lowest weighted-error stump. Candidates are midpoints between distinct
/// sorted values; ties go to the lowest feature, then the lowest threshold,
/// then the stump predicting +1 on the right.
inline StumpFit best_stump(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels,
                           const std::vector<double>& w) {
  StumpFit best;
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  double pos_total = 0.0, neg_total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) (labels[i] ? pos_total : neg_total) += w[i];

  const int d = static_cast<int>(rows.front().size());
  for (int f = 0; f < d; ++f) {
    const auto idx = detail::sorted_by(rows, all, f);
    double pos_left = 0.0, neg_left = 0.0;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      (labels[idx[k]] ? pos_left : neg_left) += w[idx[k]];
      const double a = rows[idx[k]][static_cast<std::size_t>(f)];
      const double b = rows[idx[k + 1]][static_cast<std::size_t>(f)];
      if (!(a < b)) continue;
      const double t = a + (b - a) / 2.0;
      // Right predicts +1: errors are positives on the left and negatives on the right.
      const double err_up = pos_left + (neg_total - neg_left);
      const double err_down = neg_left + (pos_total - pos_left);
      if (err_up < best.error) best = {{f, t, -1.0, 1.0}, err_up};
      if (err_down < best.error) best = {{f, t, 1.0, -1.0}, err_down};
    }
  }
  return best;
}

inline BoostedModel train_adaboost(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels,
                                   int rounds) {
  detail::check_training_rows(rows, labels);
  if (rounds < 1) fail(ErrorCode::InvalidArgument, "rounds must be >= 1");
  BoostedModel model;
  model.kind = BoostKind::AdaBoost;
  model.feature_count = static_cast<int>(rows.front().size());
  model.rounds = rounds;

  const std::size_t n = rows.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (int r = 0; r < rounds; ++r) {
    StumpFit fit = best_stump(rows, labels, w);
    if (fit.error >= 1.0) {
      // Every feature is constant: fall back to a constant majority vote.
      const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
      const double s = pos * 2.0 >= static_cast<double>(n) ? 1.0 : -1.0;
      fit = {{0, 0.0, s, s}, std::min(pos, static_cast<double>(n) - pos) / static_cast<double>(n)};
    }
    if (fit.error >= 0.5 && !model.stumps.empty()) break;
    const double e = std::clamp(fit.error, 1e-10, 1.0 - 1e-10);
    const double alpha = std::max(0.0, 0.5 * std::log((1.0 - e) / e));
    model.stumps.push_back(fit.stump);
    model.alphas.push_back(alpha);
    if (fit.error <= 0.0 || alpha == 0.0) break;

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = labels[i] ? 1.0 : -1.0;
      w[i] *= std::exp(-alpha * y * fit.stump(rows[i]));
      z += w[i];
    }
    for (auto& wi : w) wi /= z;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees, logistic loss
// ---------------------------------------------------------------------------

struct GbtConfig {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 1;
  double lambda = 1.0;
};

namespace detail {

struct GbtBuilder {
  const std::vector<std::vector<double>>& rows;
  const std::vector<double>& g;
  const std::vector<double>& h;
  const GbtConfig& cfg;
  Tree tree;

  double leaf_value(double G, double H) const { return -G / (H + cfg.lambda); }

  int build(const std::vector<std::size_t>& subset, int depth) {
    double G = 0.0, H = 0.0;
    for (std::size_t i : subset) {
      G += g[i];
      H += h[i];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({-1, 0.0, -1, -1, leaf_value(G, H)});
    if (depth >= cfg.max_depth || static_cast<int>(subset.size()) < 2 * cfg.min_leaf) return id;

    const double parent = G * G / (H + cfg.lambda);
    double best_gain = -1e-12;
    int best_f = -1;
    double best_t = 0.0;
    const int d = static_cast<int>(rows.front().size());
    for (int f = 0; f < d; ++f) {
      const auto idx = sorted_by(rows, subset, f);
      double GL = 0.0, HL = 0.0;
      for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        GL += g[idx[k]];
        HL += h[idx[k]];
        const double a = rows[idx[k]][static_cast<std::size_t>(f)];
        const double b = rows[idx[k + 1]][static_cast<std::size_t>(f)];
        const int n_left = static_cast<int>(k + 1);
        const int n_right = static_cast<int>(idx.size()) - n_left;
        if (!(a < b) || n_left < cfg.min_leaf || n_right < cfg.min_leaf) continue;
        const double GR = G - GL, HR = H - HL;
        const double gain = GL * GL / (HL + cfg.lambda) + GR * GR / (HR + cfg.lambda) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
          best_t = a + (b - a) / 2.0;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : subset)
      (rows[i][static_cast<std::size_t>(best_f)] <= best_t ? left : right).push_back(i);
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_f;
    node.threshold = best_t;
    node.left = l;
    node.right = r;
    node.value = 0.0;
    return id;
  }
};

}  // namespace detail

inline BoostedModel train_gbt(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels,
                              const GbtConfig& cfg = {}) {
  detail::check_training_rows(rows, labels);
  if (cfg.rounds < 1) fail(ErrorCode::InvalidArgument, "rounds must be >= 1");
  if (cfg.max_depth < 1 || cfg.max_depth > 3) fail(ErrorCode::InvalidArgument, "max_depth must be in [1, 3]");
  if (cfg.min_leaf < 1 || !(cfg.learning_rate > 0.0) || cfg.lambda < 0.0)
    fail(ErrorCode::InvalidArgument, "min_leaf, learning_rate or lambda out of range");

  BoostedModel model;
  model.kind = BoostKind::Gbt;
  model.feature_count = static_cast<int>(rows.front().size());
  model.rounds = cfg.rounds;
  model.learning_rate = cfg.learning_rate;
  const std::size_t n = rows.size();
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  model.base_score = std::log(pos / (static_cast<double>(n) - pos));

  std::vector<double> score(n, model.base_score), g(n), h(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int r = 0; r < cfg.rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      g[i] = p - (labels[i] ? 1.0 : 0.0);
      h[i] = std::max(p * (1.0 - p), 1e-16);
    }
    detail::GbtBuilder builder{rows, g, h, cfg, {}};
    builder.build(all, 0);
    for (std::size_t i = 0; i < n; ++i) score[i] += cfg.learning_rate * builder.tree(rows[i]);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

inline double boosted_accuracy(const BoostedModel& model, const std::vector<std::vector<double>>& rows,
                               const std::vector<bool>& labels) {
  if (rows.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) ok += (predict_proba(model, rows[i]) >= 0.5) == labels[i] ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

// ---------------------------------------------------------------------------
// Corpus-level helpers
// ---------------------------------------------------------------------------

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<bool> labels;
};

inline FeatureMatrix encode_match_matrix(const std::vector<MatchRecord>& matches, const PrematchEncoder& enc) {
  FeatureMatrix out;
  for (const auto& m : matches) {
    auto row = encode_match_features(m, enc);
    out.rows.push_back(std::move(row.values));
    out.labels.push_back(row.label);
  }
  return out;
}

/// Probability for a match from a model that carries its own encoder.
inline double prematch_probability(const BoostedModel& model, const MatchRecord& m) {
  if (!model.encoder) fail(ErrorCode::MissingAugmentation, "prematch model has no feature encoder");
  return predict_proba(model, encode_match_features(m, *model.encoder).values);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const PrematchEncoder& e) { j = {{"team", e.team}, {"venue", e.venue}}; }
inline void from_json(const nlohmann::json& j, PrematchEncoder& e) {
  e.team = j.at("team").get<Vocabulary>();
  e.venue = j.at("venue").get<Vocabulary>();
}

inline void to_json(nlohmann::json& j, const Stump& s) {
  j = {{"feature", s.feature}, {"threshold", s.threshold}, {"left", s.left}, {"right", s.right}};
}
inline void from_json(const nlohmann::json& j, Stump& s) {
  s.feature = j.at("feature").get<int>();
  s.threshold = j.at("threshold").get<double>();
  s.left = j.at("left").get<double>();
  s.right = j.at("right").get<double>();
}

inline void to_json(nlohmann::json& j, const TreeNode& n) {
  j = nlohmann::json::array({n.feature, n.threshold, n.left, n.right, n.value});
}
inline void from_json(const nlohmann::json& j, TreeNode& n) {
  if (!j.is_array() || j.size() != 5) fail(ErrorCode::CorruptCheckpoint, "tree node must have 5 fields");
  n = {j[0].get<int>(), j[1].get<double>(), j[2].get<int>(), j[3].get<int>(), j[4].get<double>()};
}

inline nlohmann::json boosted_model_to_json(const BoostedModel& m) {
  nlohmann::json j = {{"format_version", m.format_version},
                      {"kind", std::string(to_string(m.kind))},
                      {"feature_count", m.feature_count},
                      {"rounds", m.rounds},
                      {"learning_rate", m.learning_rate},
                      {"base_score", m.base_score},
                      {"stumps", m.stumps},
                      {"alphas", m.alphas}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(t.nodes);
  j["trees"] = std::move(trees);
  j["encoder"] = m.encoder ? nlohmann::json(*m.encoder) : nlohmann::json(nullptr);
  return j;
}

/// Content-derived id used by sequence checkpoints to reference the model.
inline std::string boosted_model_id(const BoostedModel& m) {
  return std::string(to_string(m.kind)) + "-" + hex_digest(boosted_model_to_json(m).dump());
}

inline BoostedModel boosted_model_from_json(const nlohmann::json& j) {
  try {
    BoostedModel m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kBoostedModelFormatVersion)
      fail(ErrorCode::VersionMismatch, "boosted model format_version " + std::to_string(m.format_version));
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "adaboost" && kind != "gbt") fail(ErrorCode::CorruptCheckpoint, "unknown model kind " + kind);
    m.kind = kind == "adaboost" ? BoostKind::AdaBoost : BoostKind::Gbt;
    m.feature_count = j.at("feature_count").get<int>();
    m.rounds = j.at("rounds").get<int>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.base_score = j.at("base_score").get<double>();
    m.stumps = j.at("stumps").get<std::vector<Stump>>();
    m.alphas = j.at("alphas").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) m.trees.push_back({t.get<std::vector<TreeNode>>()});
    if (!j.at("encoder").is_null()) m.encoder = j.at("encoder").get<PrematchEncoder>();
    if (m.stumps.size() != m.alphas.size() || m.learners() == 0)
      fail(ErrorCode::CorruptCheckpoint, "boosted model has no learners or mismatched weights");
    for (const auto& s : m.stumps)
      if (s.feature < 0 || s.feature >= m.feature_count) fail(ErrorCode::CorruptCheckpoint, "stump feature out of range");
    for (const auto& t : m.trees) {
      const int size = static_cast<int>(t.nodes.size());
      if (size == 0) fail(ErrorCode::CorruptCheckpoint, "empty tree");
      for (int i = 0; i < size; ++i) {
        const auto& n = t.nodes[static_cast<std::size_t>(i)];
        if (n.feature < 0) continue;
        if (n.feature >= m.feature_count || n.left <= i || n.right <= i || n.left >= size || n.right >= size)
          fail(ErrorCode::CorruptCheckpoint, "tree node links out of range");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, std::string("boosted model: ") + e.what());
  }
}

inline void save_boosted_model(const BoostedModel& m, const std::filesystem::path& path) {
  write_text_file(path, boosted_model_to_json(m).dump(1));
}

inline BoostedModel load_boosted_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::CorruptCheckpoint, path.string() + ": not valid JSON");
  return boosted_model_from_json(j);
}

}  // namespace cricwin
