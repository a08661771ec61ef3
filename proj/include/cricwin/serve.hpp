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

// Live sessions: each pushed delivery advances the LSTM by one step and
// yields an updated win probability. Wides and no-balls cannot be merged
// into a step that was already consumed, so they wait in a pending buffer
// and fold into the next legal ball.

#pragma once

#include <chrono>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cricwin/encode.hpp"
#include "cricwin/error.hpp"
#include "cricwin/hash.hpp"
#include "cricwin/model.hpp"
#include "cricwin/prematch.hpp"
#include "cricwin/rng.hpp"

namespace cricwin {

struct BallEvent {
  int over = 0;
  int ball_in_over = 1;
  std::string batting_team;
  std::string batsman;
  std::string non_striker;
  std::string bowler;
  int runs_off_bat = 0;
  int extras = 0;
  ExtrasKind extras_kind = ExtrasKind::None;
  bool wicket = false;

  bool operator==(const BallEvent&) const = default;
};

inline BallEvent to_ball_event(const DeliveryRecord& d) {
  return {d.over, d.ball_in_over, d.batting_team, d.batsman, d.non_striker,
          d.bowler, d.runs_off_bat, d.extras,       d.extras_kind, d.wicket};
}

inline DeliveryRecord to_delivery(const BallEvent& e, int innings_no = 2) {
  DeliveryRecord d;
  d.innings_no = innings_no;
  d.over = e.over;
  d.ball_in_over = e.ball_in_over;
  d.batting_team = e.batting_team;
  d.batsman = e.batsman;
  d.non_striker = e.non_striker;
  d.bowler = e.bowler;
  d.runs_off_bat = e.runs_off_bat;
  d.extras = e.extras;
  d.extras_kind = e.extras_kind;
  d.wicket = e.wicket;
  return d;
}

struct MatchContext {
  std::array<std::string, 2> teams;
  std::string venue;
  std::string toss_winner;
  std::string toss_decision;
  std::string season;
  std::string gender = "male";
  std::string date;
  std::optional<int> target_score;
  std::optional<int> fi_wickets;
  std::optional<double> prematch_prob;

  bool operator==(const MatchContext&) const = default;
};

/// Pre-match view of the context, enough for the prematch feature row.
inline MatchRecord context_match(const MatchContext& c) {
  MatchRecord m;
  m.match_id = "live";
  m.teams = c.teams;
  m.venue = c.venue;
  m.toss_winner = c.toss_winner;
  m.toss_decision = c.toss_decision;
  m.season = c.season;
  m.gender = c.gender;
  m.date = c.date;
  return m;
}

struct ProbabilityPoint {
  int t = 0;
  double p_win = 0.5;
  int cum_runs = 0;
  int cum_wickets = 0;

  bool operator==(const ProbabilityPoint&) const = default;
};

struct PushResult {
  int t = 0;
  std::optional<double> p_win;  // empty before the first legal ball
  int cum_runs = 0;
  int cum_wickets = 0;
  bool buffered = false;
};

// ---------------------------------------------------------------------------
// Registry of loaded checkpoints
// ---------------------------------------------------------------------------

struct CheckpointInfo {
  std::string id;
  std::shared_ptr<const Checkpoint> checkpoint;
};

class ModelRegistry {
 public:
  void add_checkpoint(std::string id, Checkpoint ckpt) {
    checkpoints_[id] = std::make_shared<const Checkpoint>(std::move(ckpt));
  }
  void add_prematch(std::string id, BoostedModel model) {
    prematch_[id] = std::make_shared<const BoostedModel>(std::move(model));
  }

  std::shared_ptr<const Checkpoint> checkpoint(const std::string& id) const {
    const auto it = checkpoints_.find(id);
    if (it == checkpoints_.end()) fail(ErrorCode::UnknownCheckpoint, "no checkpoint '" + id + "'");
    return it->second;
  }
  std::shared_ptr<const BoostedModel> prematch(const std::string& id) const {
    const auto it = prematch_.find(id);
    return it == prematch_.end() ? nullptr : it->second;
  }
  std::vector<CheckpointInfo> checkpoints() const {
    std::vector<CheckpointInfo> out;
    for (const auto& [id, c] : checkpoints_) out.push_back({id, c});
    return out;
  }

 private:
  std::map<std::string, std::shared_ptr<const Checkpoint>> checkpoints_;
  std::map<std::string, std::shared_ptr<const BoostedModel>> prematch_;
};

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
struct StreamState {
  std::vector<T> h;
  std::vector<T> c;

  bool operator==(const StreamState&) const = default;
};

}  // namespace detail

/// State of one live innings. Not thread-safe by itself; SessionManager
/// serializes access per session.
class Session {
 public:
  Session(std::string id, std::string checkpoint_id, std::shared_ptr<const Checkpoint> ckpt, MatchContext context,
          AugmentationInputs aug)
      : id_(std::move(id)), checkpoint_id_(std::move(checkpoint_id)), ckpt_(std::move(ckpt)),
        context_(std::move(context)), aug_(std::move(aug)) {
    std::visit(
        [this](const auto& net) {
          using T = typename std::decay_t<decltype(net.ot.b)>::value_type;
          const auto n = static_cast<std::size_t>(net.lstm.hidden());
          states_ = std::vector<detail::StreamState<T>>{{std::vector<T>(n, T(0)), std::vector<T>(n, T(0))}};
        },
        ckpt_->params);
  }

  const std::string& id() const { return id_; }
  const std::string& checkpoint_id() const { return checkpoint_id_; }
  const MatchContext& context() const { return context_; }
  const AugmentationInputs& augmentation() const { return aug_; }
  int t() const { return static_cast<int>(history_.size()); }
  const std::vector<ProbabilityPoint>& history() const { return history_; }
  const std::vector<BallEvent>& pending() const { return pending_; }

  PushResult push(const BallEvent& e) {
    validate(e);
    if (t() >= kMaxBalls) fail(ErrorCode::SessionFull, "session already holds 300 legal balls");
    if (!is_legal(e.extras_kind)) {
      pending_.push_back(e);
      return current(true);
    }
    LegalBall ball = to_legal_ball(to_delivery(e));
    for (const auto& p : pending_) absorb(ball, to_delivery(p));
    const FeatureRow row = encode_ball(ball, t(), ckpt_->vocabs, ckpt_->layout, aug_);
    const double p_win = std::visit([&](const auto& net) { return advance(net, row); }, ckpt_->params);

    ProbabilityPoint point;
    point.t = t() + 1;
    point.p_win = p_win;
    point.cum_runs = cum_runs() + ball.runs_off_bat + ball.extras;
    point.cum_wickets = cum_wickets() + (ball.wicket ? 1 : 0);
    merged_.push_back(std::move(pending_));
    pending_.clear();
    history_.push_back(point);
    return current(false);
  }

  /// Reverts the most recent event: a buffered illegal delivery if any,
  /// otherwise the last legal ball together with what it absorbed.
  PushResult undo() {
    if (!pending_.empty()) {
      pending_.pop_back();
      return current(false);
    }
    if (history_.empty()) fail(ErrorCode::NothingToUndo, "session has no balls to undo");
    history_.pop_back();
    pending_ = std::move(merged_.back());
    merged_.pop_back();
    std::visit([](auto& states) { states.pop_back(); }, states_);
    return current(false);
  }

  /// Digest of everything that determines future outputs.
  std::string state_hash() const {
    std::string buf = checkpoint_id_ + "|" + std::to_string(t()) + "|";
    for (const auto& p : history_) buf += std::to_string(p.t) + ":" + hex_bits(p.p_win) + ",";
    buf += "|";
    for (const auto& e : pending_) buf += event_key(e);
    std::visit(
        [&buf](const auto& states) {
          for (const auto& v : {&states.back().h, &states.back().c})
            buf.append(reinterpret_cast<const char*>(v->data()), v->size() * sizeof((*v)[0]));
        },
        states_);
    return hex_digest(buf);
  }

 private:
  static void validate(const BallEvent& e) {
    if (e.over < 0 || e.over > 49) fail(ErrorCode::EncodingError, "over must be in [0, 49]");
    if (e.ball_in_over < 1) fail(ErrorCode::EncodingError, "ball_in_over must be >= 1");
    if (e.runs_off_bat < 0 || e.extras < 0) fail(ErrorCode::EncodingError, "runs and extras must be >= 0");
  }

  static std::string hex_bits(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    return std::to_string(bits);
  }

  static std::string event_key(const BallEvent& e) {
    return std::to_string(e.over) + "." + std::to_string(e.ball_in_over) + "/" + e.batting_team + "/" + e.batsman +
           "/" + e.non_striker + "/" + e.bowler + "/" + std::to_string(e.runs_off_bat) + "/" +
           std::to_string(e.extras) + "/" + std::string(to_string(e.extras_kind)) + "/" + (e.wicket ? "w" : "-") + ";";
  }

  int cum_runs() const { return history_.empty() ? 0 : history_.back().cum_runs; }
  int cum_wickets() const { return history_.empty() ? 0 : history_.back().cum_wickets; }

  PushResult current(bool buffered) const {
    PushResult r;
    r.t = t();
    if (!history_.empty()) r.p_win = history_.back().p_win;
    r.cum_runs = cum_runs();
    r.cum_wickets = cum_wickets();
    r.buffered = buffered;
    return r;
  }

  template <typename T>
  double advance(const nn::Network<T>& net, const FeatureRow& row) {
    auto& states = std::get<std::vector<detail::StreamState<T>>>(states_);
    const auto& prev = states.back();
    std::vector<T> it_out;
    nn::LstmStep<T> cell;
    const auto probs = nn::forward_step<T>(net, row, prev.h, prev.c, it_out, cell);
    states.push_back({std::move(cell.h), std::move(cell.c)});
    return static_cast<double>(probs[nn::kWinNode]);
  }

  std::string id_;
  std::string checkpoint_id_;
  std::shared_ptr<const Checkpoint> ckpt_;
  MatchContext context_;
  AugmentationInputs aug_;
  // states_[k] is the LSTM state after k legal balls.
  std::variant<std::vector<detail::StreamState<float>>, std::vector<detail::StreamState<double>>> states_;
  std::vector<ProbabilityPoint> history_;
  std::vector<BallEvent> pending_;
  std::vector<std::vector<BallEvent>> merged_;  // pending buffer absorbed by each legal ball
};

// ---------------------------------------------------------------------------
// Session manager
// ---------------------------------------------------------------------------

struct SessionSummary {
  std::string session_id;
  std::string checkpoint_id;
  MatchContext context;
  int t = 0;
  std::vector<ProbabilityPoint> history;
  int pending = 0;
  std::string state_hash;
};

class SessionManager {
 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    Session session;
    std::mutex mu;
    std::chrono::steady_clock::time_point last_access;
    bool closed = false;
  };

  template <typename Fn>
  auto with_session(const std::string& id, Fn&& fn) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(mu_);
      const auto it = sessions_.find(id);
      if (it == sessions_.end()) fail(ErrorCode::UnknownSession, "no session '" + id + "'");
      entry = it->second;
    }
    std::lock_guard lock(entry->mu);
    const auto now = clock_();
    if (entry->closed || now - entry->last_access > idle_timeout_) {
      entry->closed = true;
      fail(ErrorCode::SessionClosed, "session '" + id + "' expired after idle timeout");
    }
    entry->last_access = now;
    return fn(entry->session);
  }

 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SessionManager(std::shared_ptr<const ModelRegistry> registry,
                          std::chrono::seconds idle_timeout = std::chrono::hours(6), Clock clock = {},
                          std::uint64_t id_seed = 0x5eed)
      : registry_(std::move(registry)), idle_timeout_(idle_timeout),
        clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
        id_seed_(id_seed) {}

  const ModelRegistry& registry() const { return *registry_; }

  std::string create(const std::string& checkpoint_id, const MatchContext& context) {
    auto ckpt = registry_->checkpoint(checkpoint_id);
    if (ckpt->config.variant != Variant::B)
      fail(ErrorCode::UnsupportedVariant, "streaming needs a variant B checkpoint, got " +
                                              std::string(to_string(ckpt->config.variant)));
    AugmentationInputs aug;
    aug.enabled = ckpt->config.aug;
    aug.target_score = context.target_score;
    aug.fi_wickets = context.fi_wickets;
    aug.prematch_prob = context.prematch_prob;
    if (aug.enabled.prematch && !aug.prematch_prob) {
      const auto model = registry_->prematch(ckpt->config.prematch_model_id);
      if (!model)
        fail(ErrorCode::MissingAugmentation, "context has no prematch_prob and prematch model '" +
                                                 ckpt->config.prematch_model_id + "' is not loaded");
      aug.prematch_prob = prematch_probability(*model, context_match(context));
    }
    check_augmentation(aug);

    std::lock_guard lock(mu_);
    const std::uint64_t n = ++created_;
    char buf[40];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(mix_seed(id_seed_, n)));
    auto entry = std::make_shared<Entry>(Session(buf, checkpoint_id, ckpt, context, aug));
    entry->last_access = clock_();
    sessions_[buf] = entry;
    return buf;
  }

  PushResult push(const std::string& id, const BallEvent& e) {
    return with_session(id, [&](Session& s) { return s.push(e); });
  }

  PushResult undo(const std::string& id) {
    return with_session(id, [](Session& s) { return s.undo(); });
  }

  SessionSummary summary(const std::string& id) {
    return with_session(id, [](Session& s) {
      return SessionSummary{s.id(), s.checkpoint_id(), s.context(), s.t(), s.history(),
                            static_cast<int>(s.pending().size()), s.state_hash()};
    });
  }

  std::vector<ProbabilityPoint> history(const std::string& id) {
    return with_session(id, [](Session& s) { return s.history(); });
  }

  void remove(const std::string& id) {
    std::lock_guard lock(mu_);
    if (sessions_.erase(id) == 0) fail(ErrorCode::UnknownSession, "no session '" + id + "'");
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  std::shared_ptr<const ModelRegistry> registry_;
  std::chrono::seconds idle_timeout_;
  Clock clock_;
  std::uint64_t id_seed_;
  mutable std::mutex mu_;
  std::uint64_t created_ = 0;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const BallEvent& e) {
  j = {{"over", e.over},
       {"ball_in_over", e.ball_in_over},
       {"batting_team", e.batting_team},
       {"batsman", e.batsman},
       {"non_striker", e.non_striker},
       {"bowler", e.bowler},
       {"runs_off_bat", e.runs_off_bat},
       {"extras", e.extras},
       {"extras_kind", std::string(e.extras_kind == ExtrasKind::None ? "" : to_string(e.extras_kind))},
       {"wicket", e.wicket}};
}

inline void from_json(const nlohmann::json& j, BallEvent& e) {
  e.over = j.at("over").get<int>();
  e.ball_in_over = j.at("ball_in_over").get<int>();
  e.batting_team = j.value("batting_team", "");
  e.batsman = j.value("batsman", "");
  e.non_striker = j.value("non_striker", "");
  e.bowler = j.value("bowler", "");
  e.runs_off_bat = j.value("runs_off_bat", 0);
  e.extras = j.value("extras", 0);
  const auto kind = parse_extras_kind(j.value("extras_kind", ""));
  if (!kind) fail(ErrorCode::EncodingError, "unknown extras_kind " + j.value("extras_kind", ""));
  e.extras_kind = *kind;
  e.wicket = j.value("wicket", false);
}

inline void to_json(nlohmann::json& j, const MatchContext& c) {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  j = {{"teams", c.teams},
       {"venue", c.venue},
       {"toss_winner", c.toss_winner},
       {"toss_decision", c.toss_decision},
       {"season", c.season},
       {"gender", c.gender},
       {"date", c.date},
       {"target_score", opt(c.target_score)},
       {"fi_wickets", opt(c.fi_wickets)},
       {"prematch_prob", opt(c.prematch_prob)}};
}

inline void from_json(const nlohmann::json& j, MatchContext& c) {
  c.teams = j.at("teams").get<std::array<std::string, 2>>();
  c.venue = j.value("venue", "");
  c.toss_winner = j.value("toss_winner", "");
  c.toss_decision = j.value("toss_decision", "");
  c.season = j.value("season", "");
  c.gender = j.value("gender", "male");
  c.date = j.value("date", "");
  auto opt_int = [&j](const char* key) -> std::optional<int> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<int>();
  };
  c.target_score = opt_int("target_score");
  c.fi_wickets = opt_int("fi_wickets");
  if (j.contains("prematch_prob") && !j.at("prematch_prob").is_null()) {
    const double p = j.at("prematch_prob").get<double>();
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "prematch_prob must lie in [0, 1]");
    c.prematch_prob = p;
  }
  if (c.target_score && *c.target_score < 0) fail(ErrorCode::InvalidArgument, "target_score must be >= 0");
  if (c.fi_wickets && (*c.fi_wickets < 0 || *c.fi_wickets > 10))
    fail(ErrorCode::InvalidArgument, "fi_wickets must lie in [0, 10]");
}

inline void to_json(nlohmann::json& j, const ProbabilityPoint& p) {
  j = {{"t", p.t}, {"p_win", p.p_win}, {"cum_runs", p.cum_runs}, {"cum_wickets", p.cum_wickets}};
}

inline void to_json(nlohmann::json& j, const PushResult& r) {
  j = {{"t", r.t},
       {"p_win", r.p_win ? nlohmann::json(*r.p_win) : nlohmann::json()},
       {"cum_runs", r.cum_runs},
       {"cum_wickets", r.cum_wickets},
       {"buffered", r.buffered}};
}

inline void to_json(nlohmann::json& j, const SessionSummary& s) {
  j = {{"session_id", s.session_id}, {"checkpoint_id", s.checkpoint_id}, {"context", s.context},
       {"t", s.t},                   {"history", s.history},             {"pending", s.pending},
       {"state_hash", s.state_hash}};
}

}  // namespace cricwin
