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

// Helpers shared by the unit tests and the acceptance runner.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "cricwin/model.hpp"
#include "cricwin/synthetic.hpp"

namespace cricwin::testing {

/// Random dense sequence of `steps` rows with `width` columns.
inline InningsSequence random_sequence(int steps, int width, bool label, std::uint64_t seed) {
  Rng rng(seed);
  InningsSequence s;
  s.match_id = "rand";
  s.total_dim = width;
  s.valid_length = steps;
  s.label = label;
  s.loss_mask = mask_for_length(steps);
  for (int t = 0; t < steps; ++t) {
    FeatureRow row;
    for (int i = 0; i < width; ++i) row.push_back({static_cast<std::uint32_t>(i), rng.uniform(-1.0, 1.0)});
    s.rows.push_back(std::move(row));
  }
  return s;
}

/// End-to-end finite-difference check of one variant's training loss at
/// T=5, in=7 (IT width 7), hidden=4 in 64-bit. The numeric side is evaluated in
/// long double.
inline nn::GradCheckResult grad_check_variant(Variant v, std::uint64_t seed) {
  const InningsSequence plain = random_sequence(5, 7, seed % 2 == 0, seed);
  const InningsSequence prepared = prepare_input(plain, v);
  const auto targets = output_targets(v, plain.valid_length, 3, sample_prefixes(plain, 4, seed + 1));
  const auto net = nn::init_params<double>({7, 7, 4}, seed * 7 + 1);

  nn::SequenceTrace<double> trace;
  auto grad = nn::zeros_like(net);
  loss_and_gradient<double>(net, prepared, targets, trace, grad);

  auto loss = [&](const std::vector<double>& theta) -> long double {
    auto probe = net;
    nn::unflatten<double>(theta, probe);
    return loss_only<long double>(nn::cast_network<long double>(probe), prepared, targets);
  };
  nn::GradCheckOptions opt;
  opt.seed = seed;
  return nn::grad_check(nn::flatten(net), loss, nn::flatten(grad), opt);
}

struct SyntheticSplit {
  std::vector<MatchRecord> train;
  std::vector<MatchRecord> test;
};

inline SyntheticSplit split_matches(const std::vector<MatchRecord>& corpus, double ratio, std::uint64_t seed) {
  const auto split = split_corpus(corpus, ratio, seed);
  const std::set<std::string> train_ids(split.train_ids.begin(), split.train_ids.end());
  SyntheticSplit out;
  for (const auto& m : corpus) (train_ids.contains(m.match_id) ? out.train : out.test).push_back(m);
  return out;
}

/// Small fast config for unit tests.
inline ModelConfig tiny_config(Variant v = Variant::B) {
  ModelConfig c;
  c.variant = v;
  c.it_dim = 6;
  c.hidden_dim = 5;
  c.lr = 1e-2;
  c.epochs = 3;
  c.accumulate = 4;
  c.prefixes_per_match = 4;
  return c;
}

/// Identity-free encoding: every team and player maps to UNK.
inline EncodeSettings anonymous_encoding() {
  EncodeSettings s;
  s.team_cap = 0;
  s.player_cap = 0;
  return s;
}

}  // namespace cricwin::testing
