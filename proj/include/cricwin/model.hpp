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

// The four model variants over the IT -> LSTM -> OT network:
//
//   A  loss only at ball J (one model per J)
//   B  loss at every ball, averaged over the innings
//   C  loss at randomly sampled prefix ends, resampled each epoch
//   D  like A at the innings end, on running-total inputs
//
// Because the network is causal, the output at step t of a full forward pass
// is bit-identical to the final output of a forward pass over the length-t
// prefix. Variant C therefore evaluates all of a match's sampled prefixes
// in one pass, and predictions at any J read one step of a single pass.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cricwin/encode.hpp"
#include "cricwin/error.hpp"
#include "cricwin/format.hpp"
#include "cricwin/ingest.hpp"
#include "cricwin/nn.hpp"
#include "cricwin/rng.hpp"

namespace cricwin {

enum class Variant { A, B, C, D };

constexpr std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::A: return "A";
    case Variant::B: return "B";
    case Variant::C: return "C";
    case Variant::D: return "D";
  }
  return "B";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "A" || s == "a") return Variant::A;
  if (s == "B" || s == "b") return Variant::B;
  if (s == "C" || s == "c") return Variant::C;
  if (s == "D" || s == "d") return Variant::D;
  return std::nullopt;
}

enum class Precision { F32, F64 };

struct ModelConfig {
  Variant variant = Variant::B;
  int target_ball = kMaxBalls;  // J, used by variant A
  int layout_version = kLayoutVersion;
  int it_dim = 64;
  int hidden_dim = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 5.0;
  double final_lr_fraction = 1.0;  // lr decays linearly to lr * this by the last epoch
  int epochs = 100;
  int accumulate = 16;
  std::uint64_t seed = 1;
  int prefixes_per_match = 8;
  bool enumerate_prefixes = false;
  AugmentationFlags aug;
  Precision precision = Precision::F32;
  int modeled_innings = 2;
  std::string prematch_model_id;

  bool operator==(const ModelConfig&) const = default;
};

inline void check_config(const ModelConfig& c) {
  if (c.it_dim < 1 || c.hidden_dim < 1) fail(ErrorCode::InvalidArgument, "it_dim and hidden_dim must be positive");
  if (c.epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (c.accumulate < 1) fail(ErrorCode::InvalidArgument, "accumulate must be >= 1");
  if (c.variant == Variant::A && (c.target_ball < 1 || c.target_ball > kMaxBalls))
    fail(ErrorCode::InvalidArgument, "variant A needs target_ball in [1, 300]");
  if (c.prefixes_per_match < 1) fail(ErrorCode::InvalidArgument, "prefixes_per_match must be >= 1");
  if (!(c.lr > 0.0) || !(c.clip_norm > 0.0)) fail(ErrorCode::InvalidArgument, "lr and clip_norm must be positive");
  if (!(c.final_lr_fraction > 0.0 && c.final_lr_fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, "final_lr_fraction must lie in (0, 1]");
  if (c.modeled_innings != 1 && c.modeled_innings != 2)
    fail(ErrorCode::InvalidArgument, "modeled_innings must be 1 or 2");
  if (c.layout_version != kLayoutVersion)
    fail(ErrorCode::VersionMismatch, "layout_version " + std::to_string(c.layout_version));
}

using AnyNetwork = std::variant<nn::Network<float>, nn::Network<double>>;

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;

  bool operator==(const EpochRecord&) const = default;
};

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  ModelConfig config;
  FeatureLayout layout;
  Vocabularies vocabs;
  AnyNetwork params;
  std::vector<EpochRecord> history;
  nlohmann::json stamp = nlohmann::json::object();
};

/// Encoded sequences for one split; vocabularies and layout come from the
/// training matches only.
struct TrainingData {
  FeatureLayout layout;
  Vocabularies vocabs;
  std::vector<InningsSequence> train;
  std::vector<InningsSequence> test;
};

// ---------------------------------------------------------------------------
// Inputs, outputs and losses per variant
// ---------------------------------------------------------------------------

/// Variant D reads running totals; every other variant reads the plain encoding.
inline InningsSequence prepare_input(const InningsSequence& plain, Variant v) {
  return v == Variant::D ? cumulative_transform(plain) : plain;
}

/// Loss-carrying output step (0-based) and its weight.
struct OutputTarget {
  int step = 0;
  double weight = 1.0;
};

inline std::vector<OutputTarget> output_targets(Variant v, int valid_length, int target_ball,
                                                const std::vector<int>& prefix_lengths = {}) {
  if (valid_length < 1) fail(ErrorCode::EmptyMask, "sequence has no valid balls");
  switch (v) {
    case Variant::A:
      return {{std::min(target_ball, valid_length) - 1, 1.0}};
    case Variant::B: {
      std::vector<OutputTarget> out(static_cast<std::size_t>(valid_length));
      for (int t = 0; t < valid_length; ++t) out[t] = {t, 1.0 / valid_length};
      return out;
    }
    case Variant::C: {
      if (prefix_lengths.empty()) fail(ErrorCode::EmptyMask, "variant C needs sampled prefixes");
      std::map<int, int> counts;
      for (int len : prefix_lengths) ++counts[std::clamp(len, 1, valid_length) - 1];
      std::vector<OutputTarget> out;
      for (const auto& [step, n] : counts)
        out.push_back({step, static_cast<double>(n) / static_cast<double>(prefix_lengths.size())});
      return out;
    }
    case Variant::D:
      return {{valid_length - 1, 1.0}};
  }
  return {};
}

/// Mean cross-entropy over masked balls for B, the single output's
/// cross-entropy otherwise. `probs` holds one (win, lose) pair per output.
inline double sequence_loss(const std::vector<std::array<double, 2>>& probs, bool label,
                            const std::vector<std::uint8_t>& mask, Variant v) {
  if (v != Variant::B) {
    if (probs.empty()) fail(ErrorCode::EmptyMask, "no output to score");
    return nn::ce_loss(probs.back(), label);
  }
  double sum = 0.0;
  int n = 0;
  for (std::size_t t = 0; t < probs.size() && t < mask.size(); ++t) {
    if (!mask[t]) continue;
    sum += nn::ce_loss(probs[t], label);
    ++n;
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "loss mask selects no balls");
  return sum / n;
}

/// Forward, weighted loss at `targets`, and exact gradients into `grad`.
template <typename T>
double loss_and_gradient(const nn::Network<T>& net, const InningsSequence& seq,
                         const std::vector<OutputTarget>& targets, nn::SequenceTrace<T>& trace,
                         nn::Network<T>& grad) {
  if (targets.empty()) fail(ErrorCode::EmptyMask, "no output targets");
  int steps = 0;
  for (const auto& t : targets) steps = std::max(steps, t.step + 1);
  nn::forward_sequence<T>(net, seq.rows, steps, trace);
  std::vector<std::array<T, 2>> logit_grads(static_cast<std::size_t>(steps), {T(0), T(0)});
  double loss = 0.0;
  for (const auto& t : targets) {
    const auto& p = trace.probs[t.step];
    loss += t.weight * static_cast<double>(nn::ce_loss(p, seq.label));
    const auto g = nn::ce_logit_grad(p, seq.label);
    logit_grads[t.step][0] += static_cast<T>(t.weight) * g[0];
    logit_grads[t.step][1] += static_cast<T>(t.weight) * g[1];
  }
  nn::backward_sequence<T>(trace, logit_grads, net, grad);
  return loss;
}

/// Loss without gradients, accumulated in at least double precision.
template <typename T>
auto loss_only(const nn::Network<T>& net, const InningsSequence& seq, const std::vector<OutputTarget>& targets) {
  using Acc = std::common_type_t<T, double>;
  int steps = 0;
  for (const auto& t : targets) steps = std::max(steps, t.step + 1);
  nn::SequenceTrace<T> trace;
  nn::forward_sequence<T>(net, seq.rows, steps, trace);
  Acc loss = 0;
  for (const auto& t : targets)
    loss += static_cast<Acc>(t.weight) * static_cast<Acc>(nn::ce_loss(trace.probs[t.step], seq.label));
  return loss;
}

/// P(win) after every ball of a prepared sequence.
template <typename T>
std::vector<double> ball_probabilities(const nn::Network<T>& net, const InningsSequence& prepared) {
  nn::SequenceTrace<T> trace;
  nn::forward_sequence<T>(net, prepared.rows, prepared.valid_length, trace);
  std::vector<double> out(static_cast<std::size_t>(prepared.valid_length));
  for (int t = 0; t < prepared.valid_length; ++t) out[t] = static_cast<double>(trace.probs[t][nn::kWinNode]);
  return out;
}

/// B: P(win) at every ball. A: at min(J, valid_length). C/D: at valid_length.
template <typename T>
std::vector<double> forward_innings(const nn::Network<T>& net, const InningsSequence& prepared, Variant v,
                                    int target_ball = kMaxBalls) {
  if (prepared.valid_length < 1) fail(ErrorCode::EmptyMask, "sequence has no valid balls");
  if (static_cast<int>(net.it.in()) != prepared.total_dim)
    fail(ErrorCode::LayoutMismatch, "sequence width differs from the network input");
  const int steps = v == Variant::A ? std::min(target_ball, prepared.valid_length) : prepared.valid_length;
  nn::SequenceTrace<T> trace;
  nn::forward_sequence<T>(net, prepared.rows, steps, trace);
  if (v == Variant::B) {
    std::vector<double> out(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) out[t] = static_cast<double>(trace.probs[t][nn::kWinNode]);
    return out;
  }
  return {static_cast<double>(trace.probs[steps - 1][nn::kWinNode])};
}

// ---------------------------------------------------------------------------
// Checkpoint-level prediction
// ---------------------------------------------------------------------------

inline void check_sequence(const Checkpoint& ckpt, const InningsSequence& seq) {
  if (seq.total_dim != ckpt.layout.total_dim)
    fail(ErrorCode::LayoutMismatch, "sequence width " + std::to_string(seq.total_dim) + " differs from layout " +
                                        std::to_string(ckpt.layout.total_dim));
}

/// P(win) after every ball of a plain-encoded sequence.
inline std::vector<double> ball_probabilities(const Checkpoint& ckpt, const InningsSequence& plain) {
  check_sequence(ckpt, plain);
  const InningsSequence prepared = prepare_input(plain, ckpt.config.variant);
  return std::visit([&](const auto& net) { return ball_probabilities(net, prepared); }, ckpt.params);
}

/// P(win) after ball J; balls past the innings end read the final output.
inline double predict_at_ball(const Checkpoint& ckpt, const InningsSequence& plain, int J) {
  if (J < 1 || J > kMaxBalls) fail(ErrorCode::InvalidArgument, "J must lie in [1, 300]");
  check_sequence(ckpt, plain);
  const int steps = std::min(J, plain.valid_length);
  const InningsSequence prepared = prepare_input(prefix(plain, steps), ckpt.config.variant);
  return std::visit(
      [&](const auto& net) {
        using T = typename std::decay_t<decltype(net.ot.b)>::value_type;
        nn::SequenceTrace<T> trace;
        nn::forward_sequence<T>(net, prepared.rows, steps, trace);
        return static_cast<double>(trace.probs[steps - 1][nn::kWinNode]);
      },
      ckpt.params);
}

inline double probability_at(const std::vector<double>& per_ball, int J) {
  return per_ball[static_cast<std::size_t>(std::min<int>(J, static_cast<int>(per_ball.size())) - 1)];
}

/// Ties at exactly 0.5 count as a predicted win.
inline bool predicts_win(double p_win) { return p_win >= 0.5; }

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Thrown when the loss stops being finite; carries the last finite state.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& message, std::shared_ptr<const Checkpoint> last_good)
      : Error(ErrorCode::Diverged, message), last_good_(std::move(last_good)) {}
  const std::shared_ptr<const Checkpoint>& last_good() const { return last_good_; }

 private:
  std::shared_ptr<const Checkpoint> last_good_;
};

struct TrainOptions {
  std::function<void(const EpochRecord&)> on_epoch;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool track_accuracy = true;
};

/// Balls at which accuracy is tracked in the training history.
inline int native_ball(const ModelConfig& c) { return c.variant == Variant::A ? c.target_ball : kMaxBalls; }

namespace detail {

template <typename T>
double accuracy_of(const nn::Network<T>& net, const std::vector<InningsSequence>& prepared, int J) {
  std::size_t correct = 0;
  for (const auto& s : prepared) {
    const int steps = std::min(J, s.valid_length);
    nn::SequenceTrace<T> trace;
    nn::forward_sequence<T>(net, s.rows, steps, trace);
    correct += predicts_win(static_cast<double>(trace.probs[steps - 1][nn::kWinNode])) == s.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(prepared.size());
}

template <typename T>
Checkpoint make_checkpoint(const TrainingData& data, const ModelConfig& config, const nn::Network<T>& net,
                           const std::vector<EpochRecord>& history) {
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.layout = data.layout;
  ckpt.vocabs = data.vocabs;
  ckpt.params = net;
  ckpt.history = history;
  return ckpt;
}

template <typename T>
Checkpoint train_impl(const TrainingData& data, const ModelConfig& config, const TrainOptions& options) {
  std::vector<InningsSequence> train, test;
  for (const auto& s : data.train) train.push_back(prepare_input(s, config.variant));
  for (const auto& s : data.test) test.push_back(prepare_input(s, config.variant));
  for (const auto* set : {&train, &test})
    for (const auto& s : *set)
      if (s.total_dim != data.layout.total_dim)
        fail(ErrorCode::LayoutMismatch, s.match_id + ": sequence width differs from the layout");

  nn::Network<T> net = nn::init_params<T>({data.layout.total_dim, config.it_dim, config.hidden_dim},
                                          mix_seed(config.seed, 0));
  auto opt = nn::make_optimizer(net, {config.lr, config.beta1, config.beta2, config.adam_epsilon});
  const int J = native_ball(config);
  const std::size_t batch = static_cast<std::size_t>(config.accumulate);
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(batch));

  std::vector<nn::Network<T>> item_grads(batch, nn::zeros_like(net));
  std::vector<nn::SequenceTrace<T>> traces(threads);
  std::vector<double> item_loss(batch, 0.0);
  nn::Network<T> grad = nn::zeros_like(net);
  std::vector<EpochRecord> history;
  nn::Network<T> last_good = net;

  auto item_targets = [&](std::size_t idx, int epoch) {
    const auto& s = train[idx];
    if (config.variant != Variant::C) return output_targets(config.variant, s.valid_length, config.target_ball);
    if (config.enumerate_prefixes) return output_targets(Variant::B, s.valid_length, config.target_ball);
    const auto lengths = sample_prefixes(s.valid_length, config.prefixes_per_match,
                                         mix_seed(config.seed, 1'000'000ULL * static_cast<std::uint64_t>(epoch) + idx));
    return output_targets(Variant::C, s.valid_length, config.target_ball, lengths);
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double progress = config.epochs > 1 ? static_cast<double>(epoch - 1) / (config.epochs - 1) : 0.0;
    opt.hyper.lr = config.lr * (1.0 - (1.0 - config.final_lr_fraction) * progress);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng(mix_seed(config.seed, 7'000'000ULL + static_cast<std::uint64_t>(epoch))).shuffle(order);

    double loss_sum = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t n = std::min(batch, order.size() - start);
        auto work = [&](unsigned worker) {
          for (std::size_t k = worker; k < n; k += threads) {
            auto& g = item_grads[k];
            for_each_tensor(g, [](const std::string&, std::span<T> s, nn::TensorShape) {
              std::fill(s.begin(), s.end(), T(0));
            });
            const std::size_t idx = order[start + k];
            item_loss[k] = loss_and_gradient<T>(net, train[idx], item_targets(idx, epoch), traces[worker], g);
          }
        };
        if (threads == 1 || n == 1) {
          work(0);
        } else {
          std::vector<std::jthread> pool;
          std::exception_ptr error;
          std::mutex error_mu;
          for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
              try {
                work(w);
              } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
              }
            });
          pool.clear();
          if (error) std::rethrow_exception(error);
        }
        // Fixed-order reduction keeps results independent of thread count.
        for_each_tensor(grad, [](const std::string&, std::span<T> s, nn::TensorShape) {
          std::fill(s.begin(), s.end(), T(0));
        });
        for (std::size_t k = 0; k < n; ++k) {
          nn::accumulate(grad, item_grads[k]);
          loss_sum += item_loss[k];
        }
        if (!std::isfinite(loss_sum)) break;
        nn::scale_gradients(grad, static_cast<T>(1.0 / static_cast<double>(n)));
        nn::clip_gradients(grad, config.clip_norm);
        nn::adam_step(net, grad, opt);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteActivation) throw;
      loss_sum = std::numeric_limits<double>::quiet_NaN();
    }

    const double mean_loss = loss_sum / static_cast<double>(train.size());
    bool finite_params = true;
    for_each_tensor(net, [&finite_params](const std::string&, std::span<const T> s, nn::TensorShape) {
      for (T v : s) finite_params = finite_params && std::isfinite(v);
    });
    if (!std::isfinite(mean_loss) || !finite_params) {
      throw DivergedError("non-finite training loss in epoch " + std::to_string(epoch),
                          std::make_shared<const Checkpoint>(make_checkpoint(data, config, last_good, history)));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = mean_loss;
    if (options.track_accuracy) {
      try {
        rec.train_accuracy = accuracy_of(net, train, J);
        if (!test.empty()) rec.test_accuracy = accuracy_of(net, test, J);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteActivation) throw;
        throw DivergedError("non-finite activations after epoch " + std::to_string(epoch),
                            std::make_shared<const Checkpoint>(make_checkpoint(data, config, last_good, history)));
      }
    }
    history.push_back(rec);
    last_good = net;
    if (options.on_epoch) options.on_epoch(rec);
  }
  return make_checkpoint(data, config, net, history);
}

}  // namespace detail

/// Trains `config.epochs` passes over `data.train`, deterministic per seed.
inline Checkpoint train(const TrainingData& data, const ModelConfig& config, const TrainOptions& options = {}) {
  check_config(config);
  if (data.train.empty()) fail(ErrorCode::EmptyDataset, "training set is empty");
  check_layout(data.layout, data.vocabs);
  return config.precision == Precision::F32 ? detail::train_impl<float>(data, config, options)
                                            : detail::train_impl<double>(data, config, options);
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

/// Probability source for the prematch slot, keyed by match id.
using PrematchLookup = std::function<std::optional<double>(const MatchRecord&)>;

inline std::vector<InningsSequence> encode_matches(const std::vector<MatchRecord>& matches, const Vocabularies& vocabs,
                                                   const FeatureLayout& layout, const ModelConfig& config,
                                                   const PrematchLookup& prematch = {}) {
  std::vector<InningsSequence> out;
  out.reserve(matches.size());
  for (const auto& m : matches) {
    std::optional<double> p;
    if (config.aug.prematch) {
      if (!prematch) fail(ErrorCode::MissingAugmentation, "prematch augmentation needs a prematch model");
      p = prematch(m);
    }
    out.push_back(encode_innings(m, config.modeled_innings, vocabs, layout, augmentation_for(m, config.aug, p)));
  }
  return out;
}

inline TrainingData make_training_data(const std::vector<MatchRecord>& train, const std::vector<MatchRecord>& test,
                                       const EncodeSettings& settings, const ModelConfig& config,
                                       const PrematchLookup& prematch = {}) {
  TrainingData data;
  data.vocabs = build_vocabularies(train, settings);
  data.layout = make_layout(data.vocabs);
  data.train = encode_matches(train, data.vocabs, data.layout, config, prematch);
  data.test = encode_matches(test, data.vocabs, data.layout, config, prematch);
  return data;
}

// ---------------------------------------------------------------------------
// Checkpoint JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const AugmentationFlags& a) {
  j = nlohmann::json{{"prematch", a.prematch}, {"target", a.target}, {"wickets", a.wickets}};
}

inline void from_json(const nlohmann::json& j, AugmentationFlags& a) {
  a.prematch = j.at("prematch").get<bool>();
  a.target = j.at("target").get<bool>();
  a.wickets = j.at("wickets").get<bool>();
}

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"variant", std::string(to_string(c.variant))},
                     {"target_ball", c.target_ball},
                     {"layout_version", c.layout_version},
                     {"it_dim", c.it_dim},
                     {"hidden_dim", c.hidden_dim},
                     {"lr", c.lr},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"adam_epsilon", c.adam_epsilon},
                     {"clip_norm", c.clip_norm},
                     {"final_lr_fraction", c.final_lr_fraction},
                     {"epochs", c.epochs},
                     {"accumulate", c.accumulate},
                     {"seed", c.seed},
                     {"prefixes_per_match", c.prefixes_per_match},
                     {"enumerate_prefixes", c.enumerate_prefixes},
                     {"aug", c.aug},
                     {"precision", c.precision == Precision::F32 ? "float32" : "float64"},
                     {"modeled_innings", c.modeled_innings},
                     {"prematch_model_id", c.prematch_model_id}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  const auto variant = parse_variant(j.at("variant").get<std::string>());
  if (!variant) fail(ErrorCode::InvalidArgument, "unknown variant " + j.at("variant").dump());
  c.variant = *variant;
  c.target_ball = j.at("target_ball").get<int>();
  c.layout_version = j.at("layout_version").get<int>();
  c.it_dim = j.at("it_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.final_lr_fraction = j.at("final_lr_fraction").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.accumulate = j.at("accumulate").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.prefixes_per_match = j.at("prefixes_per_match").get<int>();
  c.enumerate_prefixes = j.at("enumerate_prefixes").get<bool>();
  c.aug = j.at("aug").get<AugmentationFlags>();
  const auto precision = j.at("precision").get<std::string>();
  if (precision == "float32") c.precision = Precision::F32;
  else if (precision == "float64") c.precision = Precision::F64;
  else fail(ErrorCode::InvalidArgument, "precision must be float32 or float64");
  c.modeled_innings = j.at("modeled_innings").get<int>();
  c.prematch_model_id = j.at("prematch_model_id").get<std::string>();
}

inline void to_json(nlohmann::json& j, const EpochRecord& r) {
  j = nlohmann::json{{"epoch", r.epoch},
                     {"train_loss", r.train_loss},
                     {"train_accuracy", r.train_accuracy},
                     {"test_accuracy", r.test_accuracy ? nlohmann::json(*r.test_accuracy) : nlohmann::json()}};
}

inline void from_json(const nlohmann::json& j, EpochRecord& r) {
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.train_accuracy = j.at("train_accuracy").get<double>();
  r.test_accuracy = j.at("test_accuracy").is_null() ? std::nullopt
                                                    : std::optional(j.at("test_accuracy").get<double>());
}

inline nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json params = nlohmann::json::object();
  std::visit(
      [&params](const auto& net) {
        for_each_tensor(net, [&params](const std::string& name, auto data, nn::TensorShape shape) {
          nlohmann::json values = nlohmann::json::array();
          for (auto v : data) values.push_back(static_cast<double>(v));
          params[name] = {{"shape", {shape.rows, shape.cols}}, {"data", std::move(values)}};
        });
      },
      ckpt.params);
  return nlohmann::json{{"format_version", ckpt.format_version},
                        {"config", ckpt.config},
                        {"layout", ckpt.layout},
                        {"vocabularies", ckpt.vocabs},
                        {"params", std::move(params)},
                        {"history", ckpt.history},
                        {"stamp", ckpt.stamp}};
}

namespace detail {

template <typename T>
nn::Network<T> network_from_json(const nlohmann::json& params, const ModelConfig& c, int input_dim) {
  nn::Network<T> net = nn::init_params<T>({input_dim, c.it_dim, c.hidden_dim}, 0);
  for_each_tensor(net, [&params](const std::string& name, std::span<T> data, nn::TensorShape shape) {
    if (!params.contains(name)) fail(ErrorCode::CorruptCheckpoint, "missing parameter " + name);
    const auto& entry = params.at(name);
    const auto dims = entry.at("shape").get<std::vector<int>>();
    if (dims.size() != 2 || dims[0] != shape.rows || dims[1] != shape.cols)
      fail(ErrorCode::CorruptCheckpoint, "parameter " + name + " has the wrong shape");
    const auto& values = entry.at("data");
    if (!values.is_array() || values.size() != data.size())
      fail(ErrorCode::CorruptCheckpoint, "parameter " + name + " has the wrong length");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = values[i].get<double>();
      if (!std::isfinite(v)) fail(ErrorCode::CorruptCheckpoint, "parameter " + name + " is not finite");
      data[i] = static_cast<T>(v);
    }
  });
  return net;
}

}  // namespace detail

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint ckpt;
  try {
    ckpt.format_version = j.at("format_version").get<int>();
    if (ckpt.format_version != kCheckpointFormatVersion)
      fail(ErrorCode::VersionMismatch, "checkpoint format_version " + std::to_string(ckpt.format_version));
    ckpt.config = j.at("config").get<ModelConfig>();
    if (ckpt.config.layout_version != kLayoutVersion)
      fail(ErrorCode::VersionMismatch, "layout_version " + std::to_string(ckpt.config.layout_version));
    ckpt.layout = j.at("layout").get<FeatureLayout>();
    ckpt.vocabs = j.at("vocabularies").get<Vocabularies>();
    check_layout(ckpt.layout, ckpt.vocabs);
    const auto& params = j.at("params");
    if (ckpt.config.precision == Precision::F32)
      ckpt.params = detail::network_from_json<float>(params, ckpt.config, ckpt.layout.total_dim);
    else
      ckpt.params = detail::network_from_json<double>(params, ckpt.config, ckpt.layout.total_dim);
    ckpt.history = j.at("history").get<std::vector<EpochRecord>>();
    ckpt.stamp = j.value("stamp", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptCheckpoint) throw;
    fail(ErrorCode::CorruptCheckpoint, e.what());
  }
  return ckpt;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(ckpt).dump());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace cricwin
