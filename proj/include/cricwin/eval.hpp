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

// Accuracy after J balls, accuracy curves, variant comparison and the
// cumulative augmentation ablation.

#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cricwin/error.hpp"
#include "cricwin/hash.hpp"
#include "cricwin/model.hpp"

namespace cricwin {

/// Fraction of sequences whose prediction after ball J matches the label.
/// p == 0.5 counts as a predicted win.
inline double accuracy_at(const Checkpoint& ckpt, const std::vector<InningsSequence>& seqs, int J) {
  if (seqs.empty()) fail(ErrorCode::EmptyDataset, "accuracy over zero matches");
  if (J < 1 || J > kMaxBalls) fail(ErrorCode::InvalidArgument, "J must be in [1, 300]");
  std::size_t ok = 0;
  for (const auto& s : seqs) ok += predicts_win(predict_at_ball(ckpt, s, J)) == s.label ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(seqs.size());
}

/// Same as accuracy_at for each J, from a single forward pass per sequence.
/// The network and the cumulative transform are both causal, so the output
/// at ball J of the full pass equals the output of the J-ball prefix.
inline std::vector<double> accuracies_at(const Checkpoint& ckpt, const std::vector<InningsSequence>& seqs,
                                         const std::vector<int>& Js) {
  if (seqs.empty()) fail(ErrorCode::EmptyDataset, "accuracy over zero matches");
  std::vector<std::size_t> ok(Js.size(), 0);
  for (const auto& s : seqs) {
    const auto per_ball = ball_probabilities(ckpt, s);
    for (std::size_t k = 0; k < Js.size(); ++k) ok[k] += predicts_win(probability_at(per_ball, Js[k])) == s.label ? 1 : 0;
  }
  std::vector<double> out;
  for (auto c : ok) out.push_back(static_cast<double>(c) / static_cast<double>(seqs.size()));
  return out;
}

struct EvalRow {
  int J = 0;
  std::optional<double> train_accuracy;
  double test_accuracy = 0.0;
  int n_matches = 0;

  bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
  std::string checkpoint_id;
  std::string dataset_id;
  std::vector<EvalRow> rows;
  nlohmann::json metadata = nlohmann::json::object();
};

inline std::string checkpoint_id(const Checkpoint& ckpt) { return hex_digest(checkpoint_to_json(ckpt).dump()); }

inline std::string dataset_id(const std::vector<InningsSequence>& train, const std::vector<InningsSequence>& test) {
  std::string ids;
  for (const auto* set : {&train, &test}) {
    for (const auto& s : *set) ids += s.match_id + "\n";
    ids += "|";
  }
  return hex_digest(ids);
}

inline void check_j_list(const std::vector<int>& Js) {
  if (Js.empty()) fail(ErrorCode::InvalidArgument, "J list is empty");
  for (std::size_t k = 0; k < Js.size(); ++k) {
    if (Js[k] < 1 || Js[k] > kMaxBalls) fail(ErrorCode::InvalidArgument, "J must be in [1, 300]");
    if (k > 0 && Js[k] <= Js[k - 1]) fail(ErrorCode::InvalidArgument, "J list must be strictly increasing");
  }
}

/// One row per J. `train` may be empty, in which case train accuracy is
/// omitted; n_matches counts both splits.
inline EvalReport accuracy_curve(const Checkpoint& ckpt, const std::vector<InningsSequence>& train,
                                 const std::vector<InningsSequence>& test, const std::vector<int>& Js) {
  check_j_list(Js);
  if (test.empty()) fail(ErrorCode::EmptyDataset, "test set is empty");
  EvalReport report;
  report.checkpoint_id = checkpoint_id(ckpt);
  report.dataset_id = dataset_id(train, test);
  report.metadata["seed"] = ckpt.config.seed;
  report.metadata["variant"] = std::string(to_string(ckpt.config.variant));
  const auto test_acc = accuracies_at(ckpt, test, Js);
  const auto train_acc = train.empty() ? std::vector<double>{} : accuracies_at(ckpt, train, Js);
  for (std::size_t k = 0; k < Js.size(); ++k) {
    EvalRow row;
    row.J = Js[k];
    if (!train.empty()) row.train_accuracy = train_acc[k];
    row.test_accuracy = test_acc[k];
    row.n_matches = static_cast<int>(train.size() + test.size());
    report.rows.push_back(row);
  }
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"J", row.J},
                    {"train_accuracy", row.train_accuracy ? nlohmann::json(*row.train_accuracy) : nlohmann::json()},
                    {"test_accuracy", row.test_accuracy},
                    {"n_matches", row.n_matches}});
  return {{"checkpoint_id", r.checkpoint_id}, {"dataset_id", r.dataset_id}, {"rows", rows}, {"metadata", r.metadata}};
}

inline std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out.precision(6);
  out << "J,train_acc,test_acc,n\n";
  for (const auto& row : r.rows) {
    out << row.J << ',';
    if (row.train_accuracy) out << *row.train_accuracy;
    out << ',' << row.test_accuracy << ',' << row.n_matches << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Paired training runs
// ---------------------------------------------------------------------------

struct TableRow {
  std::string label;
  std::vector<double> test_accuracy;  // one per J

  bool operator==(const TableRow&) const = default;
};

struct ComparisonTable {
  std::vector<int> Js;
  std::vector<TableRow> rows;
  std::vector<Checkpoint> checkpoints;
};

/// Matches for one split pair; every run builds its own encoding from these
/// so configs with different augmentation flags stay comparable.
struct PairedData {
  std::vector<MatchRecord> train;
  std::vector<MatchRecord> test;
  EncodeSettings settings;
  PrematchLookup prematch;
};

inline TableRow run_and_score(const std::string& label, const ModelConfig& config, const PairedData& data,
                              const std::vector<int>& Js, const TrainOptions& options, ComparisonTable& table) {
  const auto td = make_training_data(data.train, data.test, data.settings, config, data.prematch);
  if (td.test.empty()) fail(ErrorCode::EmptyDataset, "test split is empty");
  if (config.variant != Variant::A) {
    auto ckpt = train(td, config, options);
    TableRow row{label, accuracies_at(ckpt, td.test, Js)};
    table.checkpoints.push_back(std::move(ckpt));
    return row;
  }
  // Variant A predicts at one ball only, so each J gets its own model.
  TableRow row{label, {}};
  for (int J : Js) {
    ModelConfig c = config;
    c.target_ball = J;
    auto ckpt = train(td, c, options);
    row.test_accuracy.push_back(accuracy_at(ckpt, td.test, J));
    table.checkpoints.push_back(std::move(ckpt));
  }
  return row;
}

inline nlohmann::json table_to_json(const ComparisonTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) rows.push_back({{"label", r.label}, {"test_accuracy", r.test_accuracy}});
  return {{"J", t.Js}, {"rows", rows}};
}

/// Trains each config on the same split and seed; rows are labelled by variant.
inline ComparisonTable compare_variants(const std::vector<ModelConfig>& configs, const PairedData& data,
                                        const std::vector<int>& Js = {200, 250, 300},
                                        const TrainOptions& options = {}) {
  check_j_list(Js);
  if (configs.empty()) fail(ErrorCode::InvalidArgument, "no configs to compare");
  ComparisonTable table;
  table.Js = Js;
  for (const auto& c : configs) {
    if (c.layout_version != configs.front().layout_version)
      fail(ErrorCode::LayoutMismatch, "compared configs use different layouts");
    table.rows.push_back(run_and_score(std::string(to_string(c.variant)), c, data, Js, options, table));
  }
  return table;
}

/// Baseline, then prematch, target and wickets switched on cumulatively.
inline ComparisonTable ablation(const ModelConfig& base, const PairedData& data,
                                const std::vector<int>& Js = {200, 250, 300}, const TrainOptions& options = {}) {
  check_j_list(Js);
  ComparisonTable table;
  table.Js = Js;
  ModelConfig c = base;
  c.aug = {};
  table.rows.push_back(run_and_score("baseline", c, data, Js, options, table));
  c.aug.prematch = true;
  table.rows.push_back(run_and_score("+prematch", c, data, Js, options, table));
  c.aug.target = true;
  table.rows.push_back(run_and_score("+target", c, data, Js, options, table));
  c.aug.wickets = true;
  table.rows.push_back(run_and_score("+wickets", c, data, Js, options, table));
  return table;
}

}  // namespace cricwin
