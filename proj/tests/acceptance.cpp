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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Set CRICWIN_CORPUS to a directory of match CSV files to include the
// real-data check; CRICWIN_EPOCHS overrides its epoch count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "cricwin/eval.hpp"
#include "cricwin/prematch.hpp"
#include "cricwin/serve.hpp"
#include "cricwin/synthetic.hpp"
#include "support.hpp"

namespace cw = cricwin;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = v.pass && in_time;
  if (!pass) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.1f s of %.0f s", secs, budget_s);
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " (" << timing
            << (in_time ? "" : ", over budget") << ")" << std::endl;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

Verdict gradient_exactness() {
  double worst = 0.0;
  std::size_t fewest = SIZE_MAX;
  for (auto v : {cw::Variant::A, cw::Variant::B, cw::Variant::C, cw::Variant::D})
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto r = cw::testing::grad_check_variant(v, seed);
      worst = std::max(worst, r.max_relative_error);
      fewest = std::min(fewest, r.coords_checked);
    }
  return {worst < 1e-6 && fewest >= 200,
          "max relative error " + fmt(worst) + " over A/B/C/D x 3 seeds, >= " + std::to_string(fewest) + " coords each"};
}

Verdict encoding_conservation() {
  std::vector<cw::MatchRecord> matches;
  for (const char* f : {"basic.csv", "tie.csv", "no_result.csv", "dl.csv"})
    matches.push_back(cw::parse_match_path(std::filesystem::path(CRICWIN_FIXTURE_DIR) / f));
  cw::SyntheticOptions opt;
  opt.matches = 50 - static_cast<int>(matches.size());
  opt.illegal_rate = 0.05;
  for (auto& m : cw::generate_synthetic_corpus(opt, 2024)) matches.push_back(std::move(m));

  const auto vocabs = cw::build_vocabularies(matches, {});
  const auto layout = cw::make_layout(vocabs);
  int innings = 0;
  for (const auto& m : matches) {
    for (int inn : {1, 2}) {
      if (m.innings(inn).empty()) continue;
      ++innings;
      const auto s = cw::encode_innings(m, inn, vocabs, layout, cw::augmentation_for(m, {false, true, true}));
      long total = 0, encoded = 0;
      for (const auto& d : m.innings(inn)) total += d.runs_off_bat + d.extras;
      for (int t = 0; t < s.valid_length; ++t)
        encoded += std::lround(s.at(t, cw::kRunsSlot) * 6.0) + std::lround(s.at(t, cw::kExtrasSlot) * 6.0);
      if (encoded != total) return {false, m.match_id + " innings " + std::to_string(inn) + " loses runs"};
      if (s.dense().size() != 300u * static_cast<std::size_t>(layout.total_dim))
        return {false, m.match_id + " dense shape is not 300 x D"};
      for (int t = 0; t < cw::kMaxBalls; ++t) {
        const double want = t < s.valid_length ? 1.0 : 0.0;
        for (auto r : {layout.team, layout.batsman, layout.non_striker, layout.bowler}) {
          double sum = 0.0;
          for (int c = r.offset; c < r.offset + r.size; ++c) sum += s.at(t, c);
          if (sum != want) return {false, m.match_id + " one-hot block sum " + fmt(sum) + " at ball " + std::to_string(t)};
        }
      }
      for (int len = 1; len <= s.valid_length; len += 7) {
        const auto p = cw::prefix(s, len);
        if (p.label != s.label || p.valid_length != len) return {false, m.match_id + " prefix label/length"};
      }
    }
  }
  return {true, std::to_string(matches.size()) + " matches, " + std::to_string(innings) +
                    " innings: runs conserved, one-hot sums exact, 300 x " + std::to_string(layout.total_dim) +
                    " rows, prefixes inherit labels"};
}

Verdict memorization() {
  cw::SyntheticOptions opt;
  opt.matches = 20;
  const auto corpus = cw::generate_synthetic_corpus(opt, 1);
  cw::ModelConfig c;
  c.variant = cw::Variant::B;
  c.it_dim = 24;
  c.hidden_dim = 24;
  c.lr = 1e-2;
  c.accumulate = 4;
  c.epochs = 100;
  const auto data = cw::make_training_data(corpus, {}, {}, c);
  cw::TrainOptions o;
  o.threads = 1;
  o.track_accuracy = false;
  const auto ckpt = cw::train(data, c, o);
  const double acc = cw::accuracy_at(ckpt, data.train, 300);
  return {acc >= 0.95, "train accuracy at J=300 " + fmt(acc) + " after 100 epochs on 20 matches"};
}

// Synthetic oracle set and the three paired runs that share it.
struct OracleRuns {
  cw::testing::SyntheticSplit split;
  cw::TrainingData with_target;
  cw::TrainingData baseline;
  std::optional<cw::Checkpoint> b_target;
  std::optional<cw::Checkpoint> b_base;
  std::optional<cw::Checkpoint> a_target;
};

cw::ModelConfig oracle_config(cw::Variant v, bool target) {
  cw::ModelConfig c;
  c.variant = v;
  c.it_dim = 8;
  c.hidden_dim = 8;
  c.lr = 2e-3;
  c.final_lr_fraction = 0.05;
  c.accumulate = 1;
  c.epochs = 150;
  c.aug.target = target;
  return c;
}

cw::Checkpoint train_quiet(const cw::TrainingData& data, const cw::ModelConfig& c) {
  cw::TrainOptions o;
  o.threads = 1;
  o.track_accuracy = false;
  return cw::train(data, c, o);
}

OracleRuns& oracle() {
  static OracleRuns runs = [] {
    OracleRuns r;
    r.split = cw::testing::split_matches(cw::generate_synthetic_corpus({}, 42), 0.8, 7);
    const auto settings = cw::testing::anonymous_encoding();
    r.with_target = cw::make_training_data(r.split.train, r.split.test, settings, oracle_config(cw::Variant::B, true));
    r.baseline = cw::make_training_data(r.split.train, r.split.test, settings, oracle_config(cw::Variant::B, false));
    return r;
  }();
  return runs;
}

Verdict table_v_analogue() {
  auto& r = oracle();
  r.b_target = train_quiet(r.with_target, oracle_config(cw::Variant::B, true));
  const std::vector<int> Js{60, 120, 180, 240, 300};
  const auto acc = cw::accuracies_at(*r.b_target, r.with_target.test, Js);
  bool trend = true;
  std::string curve;
  for (std::size_t k = 0; k < Js.size(); ++k) {
    if (k > 0 && acc[k] < acc[k - 1] - 0.02 - 1e-12) trend = false;
    curve += (k ? ", " : "") + std::to_string(Js[k]) + ":" + fmt(acc[k]);
  }
  return {acc.back() >= 0.98 && trend, std::to_string(r.split.train.size()) + "/" + std::to_string(r.split.test.size()) +
                                           " split, test accuracy " + curve};
}

Verdict ablation_direction() {
  auto& r = oracle();
  if (!r.b_target) return {false, "target run unavailable"};
  r.b_base = train_quiet(r.baseline, oracle_config(cw::Variant::B, false));
  const double base = cw::accuracy_at(*r.b_base, r.baseline.test, 200);
  const double target = cw::accuracy_at(*r.b_target, r.with_target.test, 200);
  return {target >= base + 0.05 - 1e-12,
          "J=200 test accuracy baseline " + fmt(base) + " -> +target " + fmt(target) + " (" +
              fmt(100.0 * (target - base)) + " points)"};
}

Verdict variant_ordering() {
  auto& r = oracle();
  if (!r.b_target) return {false, "variant B run unavailable"};
  auto a_config = oracle_config(cw::Variant::A, true);
  a_config.target_ball = 250;
  r.a_target = train_quiet(r.with_target, a_config);
  const double a = cw::accuracy_at(*r.a_target, r.with_target.test, 250);
  const double b = cw::accuracy_at(*r.b_target, r.with_target.test, 250);
  return {b >= a, "J=250 test accuracy B " + fmt(b) + " vs A " + fmt(a)};
}

Verdict prematch_suite() {
  std::vector<std::vector<double>> rows;
  std::vector<bool> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({static_cast<double>(i % 9), static_cast<double>(i)});
    labels.push_back(i >= 23);
  }
  const auto sep = cw::train_adaboost(rows, labels, 1);
  const double sep_acc = cw::boosted_accuracy(sep, rows, labels);

  std::vector<std::vector<double>> xr;
  std::vector<bool> xl;
  for (double x : {0.1, 0.2, 0.3, 0.7, 0.8, 0.9})
    for (double y : {0.15, 0.25, 0.75, 0.85}) {
      xr.push_back({x, y});
      xl.push_back((x > 0.5) != (y > 0.5));
    }
  double best_stump = 0.0;
  for (int f = 0; f < 2; ++f)
    for (const auto& r : xr)
      for (double s : {-1.0, 1.0}) {
        const cw::Stump st{f, r[static_cast<std::size_t>(f)], -s, s};
        std::size_t ok = 0;
        for (std::size_t i = 0; i < xr.size(); ++i) ok += (st(xr[i]) > 0) == xl[i];
        best_stump = std::max(best_stump, static_cast<double>(ok) / static_cast<double>(xr.size()));
      }
  cw::GbtConfig g;
  g.rounds = 20;
  g.max_depth = 2;
  g.learning_rate = 0.3;
  const auto gbt = cw::train_gbt(xr, xl, g);
  const double xor_acc = cw::boosted_accuracy(gbt, xr, xl);
  const auto ada = cw::train_adaboost(xr, xl, 50);

  bool open_interval = true;
  for (const auto* set : {&rows, &xr})
    for (const auto& r : *set)
      for (const auto* m : {&sep, &gbt, &ada}) {
        if (static_cast<int>(r.size()) != m->feature_count) continue;
        const double p = cw::predict_proba(*m, r);
        open_interval = open_interval && p > 0.0 && p < 1.0;
      }
  return {sep_acc == 1.0 && sep.learners() == 1 && best_stump < 1.0 && xor_acc == 1.0 && open_interval,
          "separable 1-round AdaBoost " + fmt(sep_acc) + "; XOR best single stump " + fmt(best_stump) +
              ", depth-2 GBT " + fmt(xor_acc) + "; predict_proba in (0,1): " + (open_interval ? "yes" : "no")};
}

Verdict streaming_equivalence() {
  auto& r = oracle();
  if (!r.b_target) return {false, "variant B checkpoint unavailable"};
  auto registry = std::make_shared<cw::ModelRegistry>();
  registry->add_checkpoint("b", *r.b_target);
  cw::SessionManager mgr(registry);
  auto context = [](const cw::MatchRecord& m) {
    cw::MatchContext c;
    c.teams = m.teams;
    c.venue = m.venue;
    c.toss_winner = m.toss_winner;
    c.toss_decision = m.toss_decision;
    c.target_score = m.first_innings_runs + 1;
    c.fi_wickets = m.first_innings_wickets;
    return c;
  };
  const auto& ckpt = *r.b_target;
  std::size_t balls = 0;
  for (int i = 0; i < 20; ++i) {
    const auto& m = r.split.test[static_cast<std::size_t>(i)];
    const auto seq = cw::encode_innings(m, 2, ckpt.vocabs, ckpt.layout, cw::augmentation_for(m, ckpt.config.aug));
    const auto offline = cw::ball_probabilities(ckpt, seq);
    const auto id = mgr.create("b", context(m));
    for (const auto& d : m.innings(2)) mgr.push(id, cw::to_ball_event(d));
    const auto h = mgr.history(id);
    if (h.size() != offline.size()) return {false, m.match_id + ": step count differs"};
    for (std::size_t t = 0; t < h.size(); ++t)
      if (h[t].p_win != offline[t]) return {false, m.match_id + ": ball " + std::to_string(t + 1) + " differs"};
    balls += h.size();
  }

  cw::Rng rng(99);
  for (int script = 0; script < 100; ++script) {
    const auto& m = r.split.test[rng.below(r.split.test.size())];
    const auto deliveries = m.innings(2);
    const auto id = mgr.create("b", context(m));
    const int steps = static_cast<int>(rng.below(60));
    std::size_t k = 0;
    auto wide = [](cw::BallEvent e) {
      e.runs_off_bat = 0;
      e.extras = 1;
      e.extras_kind = cw::ExtrasKind::Wide;
      e.wicket = false;
      return e;
    };
    for (int s = 0; s < steps; ++s) {
      const auto e = cw::to_ball_event(deliveries[k]);
      if (rng.bernoulli(0.1)) {
        mgr.push(id, wide(e));
      } else {
        mgr.push(id, e);
        ++k;
      }
      if (rng.bernoulli(0.1) && mgr.summary(id).t > 0) {
        mgr.undo(id);
        k = static_cast<std::size_t>(mgr.summary(id).t);
      }
    }
    const nlohmann::json before = mgr.summary(id);
    const auto e = cw::to_ball_event(deliveries[k]);
    mgr.push(id, rng.bernoulli(0.3) ? wide(e) : e);
    mgr.undo(id);
    if (nlohmann::json(mgr.summary(id)) != before) return {false, "push/undo script " + std::to_string(script)};
    mgr.remove(id);
  }
  return {true, "20 innings (" + std::to_string(balls) + " balls) bit-exact; 100 push/undo scripts restore state"};
}

Verdict checkpoint_round_trip() {
  auto& r = oracle();
  std::vector<cw::Checkpoint> ckpts;
  if (r.b_target) ckpts.push_back(*r.b_target);
  auto d = cw::make_training_data(r.split.train, {}, cw::testing::anonymous_encoding(), oracle_config(cw::Variant::D, true));
  auto dc = oracle_config(cw::Variant::D, true);
  dc.precision = cw::Precision::F64;
  dc.epochs = 1;
  cw::TrainingData small{d.layout, d.vocabs, {d.train.begin(), d.train.begin() + 20}, {}};
  ckpts.push_back(train_quiet(small, dc));
  const auto path = std::filesystem::temp_directory_path() / "cricwin_acceptance_ckpt.json";
  for (const auto& ckpt : ckpts) {
    cw::save_checkpoint(ckpt, path);
    const auto back = cw::load_checkpoint(path);
    for (int i = 0; i < 5; ++i) {
      const auto& m = r.split.test[static_cast<std::size_t>(i)];
      const auto seq = cw::encode_innings(m, 2, ckpt.vocabs, ckpt.layout, cw::augmentation_for(m, ckpt.config.aug));
      if (cw::ball_probabilities(ckpt, seq) != cw::ball_probabilities(back, seq))
        return {false, std::string(cw::to_string(ckpt.config.variant)) + " checkpoint changed predictions"};
    }
  }
  std::filesystem::remove(path);
  return {true, std::to_string(ckpts.size()) + " checkpoints (float32 B, float64 D), 5 innings each, bit-identical"};
}

Verdict real_data(const std::string& dir) {
  const auto load = cw::load_corpus_dir(dir);
  std::vector<cw::MatchRecord> valid;
  for (const auto& m : load.matches)
    if (cw::validate_match(m).empty()) valid.push_back(m);
  const auto matches = cw::filter_corpus(valid);
  const auto split = cw::testing::split_matches(matches, 0.8, 1);
  cw::ModelConfig c;
  c.variant = cw::Variant::B;
  c.it_dim = 32;
  c.hidden_dim = 32;
  c.lr = 3e-3;
  c.final_lr_fraction = 0.1;
  c.accumulate = 8;
  c.epochs = std::getenv("CRICWIN_EPOCHS") ? std::atoi(std::getenv("CRICWIN_EPOCHS")) : 30;
  c.aug.target = true;
  c.aug.wickets = true;
  const auto data = cw::make_training_data(split.train, split.test, {}, c);
  cw::TrainOptions o;
  o.track_accuracy = false;
  const auto ckpt = cw::train(data, c, o);
  const double acc = cw::accuracy_at(ckpt, data.test, 300);
  return {acc >= 0.90, std::to_string(matches.size()) + " usable matches (" + std::to_string(load.failures.size()) +
                           " unreadable), J=300 test accuracy " + fmt(acc)};
}

}  // namespace

int main() {
  criterion("gradient-exactness", 30, gradient_exactness);
  criterion("encoding-conservation", 10, encoding_conservation);
  criterion("memorization", 120, memorization);
  criterion("synthetic-table-v", 600, table_v_analogue);
  criterion("ablation-target-direction", 600, ablation_direction);
  criterion("variant-ordering-b-vs-a", 600, variant_ordering);
  criterion("prematch-suite", 30, prematch_suite);
  criterion("streaming-equivalence", 60, streaming_equivalence);
  criterion("checkpoint-round-trip", 60, checkpoint_round_trip);
  if (const char* dir = std::getenv("CRICWIN_CORPUS"); dir && *dir) {
    criterion("real-data-odi", 7200, [dir] { return real_data(dir); });
  } else {
    std::cout << "SKIP real-data-odi: CRICWIN_CORPUS not set" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
