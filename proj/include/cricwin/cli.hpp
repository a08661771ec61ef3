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

// Command-line driver: ingest | train | eval | curve | compare | ablate |
// prematch | predict | serve | synth. Exit codes: 0 ok, 1 usage, 2 data
// error, 3 training diverged.

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "cricwin/encode.hpp"
#include "cricwin/error.hpp"
#include "cricwin/eval.hpp"
#include "cricwin/hash.hpp"
#include "cricwin/http.hpp"
#include "cricwin/ingest.hpp"
#include "cricwin/model.hpp"
#include "cricwin/prematch.hpp"
#include "cricwin/serve.hpp"
#include "cricwin/synthetic.hpp"

namespace cricwin {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitDiverged = 3 };

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct PrematchTraining {
  std::string kind = "gbt";
  int adaboost_rounds = 50;
  GbtConfig gbt;
  PrematchSettings features;
};

struct ServeSettings {
  std::string bind = "127.0.0.1";
  int port = 8080;
  long idle_timeout_s = 6 * 3600;
};

struct RunConfig {
  std::string corpus_dir;
  std::string manifest;
  std::string checkpoint_dir = "checkpoints";
  std::string report_dir = "reports";
  double split_ratio = 0.8;
  std::uint64_t split_seed = 1;
  int min_second_innings_deliveries = 6;
  EncodeSettings encode;
  ModelConfig model;
  PrematchTraining prematch;
  ServeSettings serve;
};

/// Defaults as a JSON document; also the schema that unknown keys are
/// checked against.
inline nlohmann::json run_config_to_json(const RunConfig& c) {
  return {{"paths",
           {{"corpus", c.corpus_dir},
            {"manifest", c.manifest},
            {"checkpoint_dir", c.checkpoint_dir},
            {"report_dir", c.report_dir}}},
          {"split", {{"ratio", c.split_ratio}, {"seed", c.split_seed}}},
          {"filter", {{"min_second_innings_deliveries", c.min_second_innings_deliveries}}},
          {"encode",
           {{"team_min_count", c.encode.team_min_count},
            {"team_cap", c.encode.team_cap},
            {"player_min_count", c.encode.player_min_count},
            {"player_cap", c.encode.player_cap}}},
          {"model", c.model},
          {"prematch",
           {{"kind", c.prematch.kind},
            {"adaboost_rounds", c.prematch.adaboost_rounds},
            {"rounds", c.prematch.gbt.rounds},
            {"max_depth", c.prematch.gbt.max_depth},
            {"learning_rate", c.prematch.gbt.learning_rate},
            {"min_leaf", c.prematch.gbt.min_leaf},
            {"lambda", c.prematch.gbt.lambda},
            {"team_min_count", c.prematch.features.team_min_count},
            {"team_cap", c.prematch.features.team_cap},
            {"venue_min_count", c.prematch.features.venue_min_count},
            {"venue_cap", c.prematch.features.venue_cap}}},
          {"serve",
           {{"bind", c.serve.bind}, {"port", c.serve.port}, {"idle_timeout_s", c.serve.idle_timeout_s}}}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    const auto& p = j.at("paths");
    c.corpus_dir = p.at("corpus").get<std::string>();
    c.manifest = p.at("manifest").get<std::string>();
    c.checkpoint_dir = p.at("checkpoint_dir").get<std::string>();
    c.report_dir = p.at("report_dir").get<std::string>();
    c.split_ratio = j.at("split").at("ratio").get<double>();
    c.split_seed = j.at("split").at("seed").get<std::uint64_t>();
    c.min_second_innings_deliveries = j.at("filter").at("min_second_innings_deliveries").get<int>();
    const auto& e = j.at("encode");
    c.encode = {e.at("team_min_count").get<int>(), e.at("team_cap").get<int>(), e.at("player_min_count").get<int>(),
                e.at("player_cap").get<int>()};
    c.model = j.at("model").get<ModelConfig>();
    const auto& pm = j.at("prematch");
    c.prematch.kind = pm.at("kind").get<std::string>();
    if (c.prematch.kind != "gbt" && c.prematch.kind != "adaboost")
      fail(ErrorCode::InvalidArgument, "prematch.kind must be gbt or adaboost");
    c.prematch.adaboost_rounds = pm.at("adaboost_rounds").get<int>();
    c.prematch.gbt = {pm.at("rounds").get<int>(), pm.at("max_depth").get<int>(), pm.at("learning_rate").get<double>(),
                      pm.at("min_leaf").get<int>(), pm.at("lambda").get<double>()};
    c.prematch.features = {pm.at("team_min_count").get<int>(), pm.at("team_cap").get<int>(),
                           pm.at("venue_min_count").get<int>(), pm.at("venue_cap").get<int>()};
    const auto& s = j.at("serve");
    c.serve = {s.at("bind").get<std::string>(), s.at("port").get<int>(), s.at("idle_timeout_s").get<long>()};
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
}

namespace detail {

/// Recursively overlays `patch` onto `base`, rejecting keys `base` lacks.
inline void merge_known(nlohmann::json& base, const nlohmann::json& patch, const std::string& where) {
  if (!patch.is_object()) fail(ErrorCode::InvalidArgument, "config" + where + " must be an object");
  for (const auto& [key, value] : patch.items()) {
    if (!base.contains(key)) fail(ErrorCode::InvalidArgument, "unknown config key '" + where + "." + key + "'");
    auto& slot = base[key];
    if (slot.is_object()) merge_known(slot, value, where + "." + key);
    else slot = value;
  }
}

/// `a.b.c=value`; the value is read as JSON when it parses, else as a string.
inline void apply_override(nlohmann::json& base, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::InvalidArgument, "--set expects KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  auto value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  nlohmann::json* node = &base;
  std::stringstream path(key);
  std::string part, seen;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    seen += "." + parts[i];
    if (!node->is_object() || !node->contains(parts[i]))
      fail(ErrorCode::InvalidArgument, "unknown config key '" + seen.substr(1) + "'");
    node = &(*node)[parts[i]];
  }
  if (node->is_object()) fail(ErrorCode::InvalidArgument, "'" + key + "' is a section, not a value");
  *node = value;
}

}  // namespace detail

/// Precedence: --set flags over the config file over defaults.
inline nlohmann::json resolve_config_json(const std::string& config_path, const std::vector<std::string>& sets) {
  nlohmann::json j = run_config_to_json(RunConfig{});
  if (!config_path.empty()) {
    const auto file = nlohmann::json::parse(read_text_file(config_path), nullptr, false);
    if (file.is_discarded()) fail(ErrorCode::InvalidArgument, config_path + ": not valid JSON");
    detail::merge_known(j, file, "");
  }
  for (const auto& s : sets) detail::apply_override(j, s);
  return j;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

struct CliContext {
  RunConfig config;
  nlohmann::json config_json;
  std::string config_hash;
  bool quiet = false;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;

  void info(const std::string& msg) const {
    if (!quiet) *err << msg << '\n';
  }

  nlohmann::json stamp(const std::string& manifest_hash) const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return {{"config_hash", config_hash},
            {"seed", config.model.seed},
            {"manifest_hash", manifest_hash},
            {"created_at", buf}};
  }
};

namespace detail {

inline std::string timestamp_name(const std::string& prefix, const std::string& ext) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", std::gmtime(&now));
  return prefix + "-" + buf + ext;
}

inline std::filesystem::path output_path(const std::string& explicit_path, const std::string& dir,
                                         const std::string& prefix, const std::string& ext = ".json") {
  if (!explicit_path.empty()) return explicit_path;
  return std::filesystem::path(dir) / timestamp_name(prefix, ext);
}

inline Manifest require_manifest(const CliContext& ctx, const std::string& flag) {
  const std::string path = flag.empty() ? ctx.config.manifest : flag;
  if (path.empty()) fail(ErrorCode::InvalidArgument, "no manifest given (--manifest or paths.manifest)");
  return load_manifest(path);
}

inline PrematchLookup lookup_for(std::shared_ptr<const BoostedModel> model) {
  if (!model) return {};
  return [model](const MatchRecord& m) -> std::optional<double> { return prematch_probability(*model, m); };
}

inline BoostedModel train_prematch(const RunConfig& cfg, const std::vector<MatchRecord>& train) {
  const auto encoder = build_prematch_encoder(train, cfg.prematch.features);
  const auto fm = encode_match_matrix(train, encoder);
  BoostedModel model = cfg.prematch.kind == "adaboost" ? train_adaboost(fm.rows, fm.labels, cfg.prematch.adaboost_rounds)
                                                       : train_gbt(fm.rows, fm.labels, cfg.prematch.gbt);
  model.encoder = encoder;
  return model;
}

inline std::shared_ptr<const BoostedModel> prematch_for(const CliContext& ctx, const Manifest& manifest,
                                                        const std::string& path, bool needed) {
  if (!path.empty()) return std::make_shared<const BoostedModel>(load_boosted_model(path));
  if (!needed) return nullptr;
  ctx.info("training a prematch model on the manifest's train split");
  return std::make_shared<const BoostedModel>(train_prematch(ctx.config, manifest.train()));
}

inline void check_manifest_layout(const Manifest& m, const Checkpoint& ckpt) {
  if (m.layout_version != ckpt.layout.layout_version)
    fail(ErrorCode::VersionMismatch, "manifest layout_version " + std::to_string(m.layout_version) +
                                         " differs from checkpoint layout_version " +
                                         std::to_string(ckpt.layout.layout_version));
}

inline std::vector<InningsSequence> encode_for(const Checkpoint& ckpt, const std::vector<MatchRecord>& matches,
                                               const PrematchLookup& prematch) {
  return encode_matches(matches, ckpt.vocabs, ckpt.layout, ckpt.config, prematch);
}

inline std::vector<int> parse_j_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto v = parse_int(part);
    if (!v) fail(ErrorCode::InvalidArgument, "bad J value '" + part + "'");
    out.push_back(*v);
  }
  return out;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2)); }

}  // namespace detail

/// Parses `argv` and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Ball-by-ball cricket win probability", "cricwin"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", sets, "Override a config value, KEY=VALUE (repeatable)");
  app.add_option("--seed", seed, "Seed for splits, initialization and sampling");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  std::string corpus, out_path, manifest_path, checkpoint_path, prematch_path, match_path, j_text, variants_text;
  std::vector<std::string> checkpoints;
  std::optional<double> ratio;
  std::optional<int> port;
  int synth_matches = 250;

  auto* ingest = app.add_subcommand("ingest", "Parse a corpus directory into a split manifest");
  ingest->add_option("--corpus", corpus, "Directory of per-match CSV files");
  ingest->add_option("--out", out_path, "Manifest path");
  ingest->add_option("--ratio", ratio, "Train fraction");

  auto* train_cmd = app.add_subcommand("train", "Train a sequence model");
  train_cmd->add_option("--manifest", manifest_path);
  train_cmd->add_option("--out", out_path, "Checkpoint path");
  train_cmd->add_option("--prematch-model", prematch_path);

  auto* eval_cmd = app.add_subcommand("eval", "Accuracy after J balls");
  auto* curve_cmd = app.add_subcommand("curve", "Accuracy curve over several J");
  for (auto* c : {eval_cmd, curve_cmd}) {
    c->add_option("--manifest", manifest_path);
    c->add_option("--checkpoint", checkpoint_path)->required();
    c->add_option("--prematch-model", prematch_path);
    c->add_option("--out", out_path, "Report path");
  }
  eval_cmd->add_option("--J", j_text, "Ball index")->default_str("300");
  curve_cmd->add_option("--J", j_text, "Comma-separated ball indices")->default_str("6,30,60,90,120,180,240,300");

  auto* compare_cmd = app.add_subcommand("compare", "Train and compare variants on one split");
  compare_cmd->add_option("--variants", variants_text, "Comma-separated variants")->default_str("A,B,C,D");
  auto* ablate_cmd = app.add_subcommand("ablate", "Cumulative augmentation ablation");
  for (auto* c : {compare_cmd, ablate_cmd}) {
    c->add_option("--manifest", manifest_path);
    c->add_option("--prematch-model", prematch_path);
    c->add_option("--J", j_text, "Comma-separated ball indices")->default_str("200,250,300");
    c->add_option("--out", out_path, "Report path");
  }

  auto* prematch_cmd = app.add_subcommand("prematch", "Train a pre-match classifier");
  prematch_cmd->add_option("--manifest", manifest_path);
  prematch_cmd->add_option("--out", out_path, "Model path");

  auto* predict_cmd = app.add_subcommand("predict", "Per-ball probabilities for one match file");
  predict_cmd->add_option("--checkpoint", checkpoint_path)->required();
  predict_cmd->add_option("--match", match_path, "Match CSV")->required();
  predict_cmd->add_option("--prematch-model", prematch_path);
  predict_cmd->add_option("--J", j_text, "Report only the probability after this ball");

  auto* serve_cmd = app.add_subcommand("serve", "HTTP session server");
  serve_cmd->add_option("--checkpoint", checkpoints, "Checkpoint file (repeatable); id is the file stem")->required();
  serve_cmd->add_option("--prematch-model", prematch_path);
  serve_cmd->add_option("--port", port);

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus of match CSV files");
  synth_cmd->add_option("--out", out_path, "Output directory")->required();
  synth_cmd->add_option("--matches", synth_matches);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }

  CliContext ctx;
  ctx.quiet = quiet;
  ctx.out = &out;
  ctx.err = &err;
  try {
    ctx.config_json = resolve_config_json(config_path, sets);
    if (seed) {
      ctx.config_json["model"]["seed"] = *seed;
      ctx.config_json["split"]["seed"] = *seed;
    }
    if (ratio) ctx.config_json["split"]["ratio"] = *ratio;
    if (!corpus.empty()) ctx.config_json["paths"]["corpus"] = corpus;
    if (port) ctx.config_json["serve"]["port"] = *port;
    ctx.config = run_config_from_json(ctx.config_json);
    check_config(ctx.config.model);
    ctx.config_hash = hex_digest(ctx.config_json.dump());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const RunConfig& cfg = ctx.config;

  try {
    if (*ingest) {
      if (cfg.corpus_dir.empty()) fail(ErrorCode::InvalidArgument, "ingest needs --corpus");
      const auto load = load_corpus_dir(cfg.corpus_dir);
      for (const auto& [file, msg] : load.failures) ctx.info("skipped " + file + ": " + msg);
      std::vector<MatchRecord> valid;
      for (const auto& m : load.matches) {
        const auto violations = validate_match(m);
        if (violations.empty()) {
          valid.push_back(m);
          continue;
        }
        ctx.info("dropped " + m.match_id + ": " + violations.front().field + " " + violations.front().rule);
      }
      FilterPolicy policy;
      policy.min_second_innings_deliveries = cfg.min_second_innings_deliveries;
      Manifest manifest;
      manifest.matches = filter_corpus(valid, policy);
      if (manifest.matches.empty()) fail(ErrorCode::EmptyCorpus, "no usable matches in " + cfg.corpus_dir);
      manifest.split = split_corpus(manifest.matches, cfg.split_ratio, cfg.split_seed);
      std::string ids;
      for (const auto& m : manifest.matches) ids += m.match_id + "\n";
      manifest.stamp = ctx.stamp(hex_digest(ids));
      const auto path = detail::output_path(out_path, cfg.report_dir, "manifest");
      write_text_file(path, manifest_to_json(manifest).dump());
      out << nlohmann::json{{"manifest", path.string()},
                            {"matches", manifest.matches.size()},
                            {"train", manifest.split.train_ids.size()},
                            {"test", manifest.split.test_ids.size()},
                            {"skipped_files", load.failures.size()},
                            {"filtered", load.matches.size() - manifest.matches.size()}}
                 .dump(2)
          << '\n';
      return kExitOk;
    }

    if (*train_cmd) {
      const auto manifest = detail::require_manifest(ctx, manifest_path);
      ModelConfig mc = cfg.model;
      const auto pm = detail::prematch_for(ctx, manifest, prematch_path, mc.aug.prematch);
      if (pm) mc.prematch_model_id = boosted_model_id(*pm);
      const auto data = make_training_data(manifest.train(), manifest.test(), cfg.encode, mc, detail::lookup_for(pm));
      TrainOptions opts;
      opts.on_epoch = [&ctx](const EpochRecord& r) {
        std::ostringstream line;
        line << "epoch " << r.epoch << " loss " << r.train_loss << " train_acc " << r.train_accuracy;
        if (r.test_accuracy) line << " test_acc " << *r.test_accuracy;
        ctx.info(line.str());
      };
      const auto path = detail::output_path(out_path, cfg.checkpoint_dir, "checkpoint");
      try {
        Checkpoint ckpt = train(data, mc, opts);
        ckpt.stamp = ctx.stamp(manifest.source_hash);
        save_checkpoint(ckpt, path);
      } catch (const DivergedError& e) {
        if (e.last_good()) {
          Checkpoint last = *e.last_good();
          last.stamp = ctx.stamp(manifest.source_hash);
          auto fallback = path;
          fallback.replace_extension(".last_good.json");
          save_checkpoint(last, fallback);
          err << "last finite checkpoint written to " << fallback.string() << '\n';
        }
        throw;
      }
      if (pm) {
        auto pm_path = path;
        pm_path.replace_extension(".prematch.json");
        auto j = boosted_model_to_json(*pm);
        j["stamp"] = ctx.stamp(manifest.source_hash);
        write_text_file(pm_path, j.dump(1));
      }
      out << nlohmann::json{{"checkpoint", path.string()}}.dump(2) << '\n';
      return kExitOk;
    }

    if (*eval_cmd || *curve_cmd) {
      const auto manifest = detail::require_manifest(ctx, manifest_path);
      const auto ckpt = load_checkpoint(checkpoint_path);
      detail::check_manifest_layout(manifest, ckpt);
      const auto pm = detail::prematch_for(ctx, manifest, prematch_path, false);
      if (ckpt.config.aug.prematch && !pm)
        fail(ErrorCode::MissingAugmentation, "checkpoint uses prematch augmentation; pass --prematch-model");
      const auto lookup = detail::lookup_for(pm);
      const auto train_seqs = detail::encode_for(ckpt, manifest.train(), lookup);
      const auto test_seqs = detail::encode_for(ckpt, manifest.test(), lookup);
      const auto Js = detail::parse_j_list(j_text.empty() ? (*eval_cmd ? "300" : "6,30,60,90,120,180,240,300") : j_text);
      auto report = accuracy_curve(ckpt, train_seqs, test_seqs, Js);
      report.metadata["stamp"] = ctx.stamp(manifest.source_hash);
      const auto path = detail::output_path(out_path, cfg.report_dir, *eval_cmd ? "eval" : "curve");
      detail::write_json(path, report_to_json(report));
      if (*curve_cmd) {
        auto csv = path;
        csv.replace_extension(".csv");
        write_text_file(csv, report_to_csv(report));
      }
      out << report_to_json(report).dump(2) << '\n';
      return kExitOk;
    }

    if (*compare_cmd || *ablate_cmd) {
      const auto manifest = detail::require_manifest(ctx, manifest_path);
      const auto Js = detail::parse_j_list(j_text.empty() ? "200,250,300" : j_text);
      PairedData data{manifest.train(), manifest.test(), cfg.encode, {}};
      TrainOptions opts;
      opts.track_accuracy = false;
      ComparisonTable table;
      if (*compare_cmd) {
        std::vector<ModelConfig> configs;
        std::stringstream ss(variants_text.empty() ? "A,B,C,D" : variants_text);
        std::string v;
        while (std::getline(ss, v, ',')) {
          const auto variant = parse_variant(v);
          if (!variant) fail(ErrorCode::InvalidArgument, "unknown variant '" + v + "'");
          ModelConfig c = cfg.model;
          c.variant = *variant;
          configs.push_back(c);
        }
        const auto pm = detail::prematch_for(ctx, manifest, prematch_path, cfg.model.aug.prematch);
        data.prematch = detail::lookup_for(pm);
        table = compare_variants(configs, data, Js, opts);
      } else {
        const auto pm = detail::prematch_for(ctx, manifest, prematch_path, true);
        data.prematch = detail::lookup_for(pm);
        ModelConfig base = cfg.model;
        base.prematch_model_id = boosted_model_id(*pm);
        table = ablation(base, data, Js, opts);
      }
      auto j = table_to_json(table);
      j["stamp"] = ctx.stamp(manifest.source_hash);
      detail::write_json(detail::output_path(out_path, cfg.report_dir, *compare_cmd ? "compare" : "ablate"), j);
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*prematch_cmd) {
      const auto manifest = detail::require_manifest(ctx, manifest_path);
      const auto model = detail::train_prematch(cfg, manifest.train());
      const auto test = encode_match_matrix(manifest.test(), *model.encoder);
      const auto train_fm = encode_match_matrix(manifest.train(), *model.encoder);
      auto j = boosted_model_to_json(model);
      j["stamp"] = ctx.stamp(manifest.source_hash);
      const auto path = detail::output_path(out_path, cfg.checkpoint_dir, "prematch");
      write_text_file(path, j.dump(1));
      nlohmann::json summary{{"model", path.string()},
                             {"id", boosted_model_id(model)},
                             {"kind", std::string(to_string(model.kind))},
                             {"learners", model.learners()},
                             {"train_accuracy", boosted_accuracy(model, train_fm.rows, train_fm.labels)}};
      if (!test.rows.empty()) summary["test_accuracy"] = boosted_accuracy(model, test.rows, test.labels);
      out << summary.dump(2) << '\n';
      return kExitOk;
    }

    if (*predict_cmd) {
      const auto ckpt = load_checkpoint(checkpoint_path);
      const auto match = parse_match_path(match_path);
      std::shared_ptr<const BoostedModel> pm;
      if (!prematch_path.empty()) pm = std::make_shared<const BoostedModel>(load_boosted_model(prematch_path));
      std::optional<double> p;
      if (ckpt.config.aug.prematch) {
        if (!pm) fail(ErrorCode::MissingAugmentation, "checkpoint uses prematch augmentation; pass --prematch-model");
        p = prematch_probability(*pm, match);
      }
      const auto seq = encode_innings(match, ckpt.config.modeled_innings, ckpt.vocabs, ckpt.layout,
                                      augmentation_for(match, ckpt.config.aug, p));
      nlohmann::json j{{"match_id", match.match_id}, {"label", seq.label}, {"valid_length", seq.valid_length}};
      if (!j_text.empty()) {
        const auto J = detail::parse_int(j_text);
        if (!J) fail(ErrorCode::InvalidArgument, "bad --J");
        j["J"] = *J;
        j["p_win"] = predict_at_ball(ckpt, seq, *J);
      } else {
        j["p_win"] = ball_probabilities(ckpt, seq);
      }
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*serve_cmd) {
      auto registry = std::make_shared<ModelRegistry>();
      for (const auto& path : checkpoints)
        registry->add_checkpoint(std::filesystem::path(path).stem().string(), load_checkpoint(path));
      if (!prematch_path.empty()) {
        auto model = load_boosted_model(prematch_path);
        const auto id = boosted_model_id(model);
        registry->add_prematch(id, std::move(model));
      }
      SessionManager sessions(registry, std::chrono::seconds(cfg.serve.idle_timeout_s));
      httplib::Server server;
      install_routes(server, sessions);
      ctx.info("listening on " + cfg.serve.bind + ":" + std::to_string(cfg.serve.port));
      if (!server.listen(cfg.serve.bind, cfg.serve.port))
        fail(ErrorCode::IoError, "cannot listen on " + cfg.serve.bind + ":" + std::to_string(cfg.serve.port));
      return kExitOk;
    }

    if (*synth_cmd) {
      SyntheticOptions so;
      so.matches = synth_matches;
      const auto corpus_out = generate_synthetic_corpus(so, cfg.model.seed);
      for (const auto& m : corpus_out)
        write_text_file(std::filesystem::path(out_path) / (m.match_id + ".csv"), to_csv(m));
      out << nlohmann::json{{"out", out_path}, {"matches", corpus_out.size()}}.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::Diverged) return kExitDiverged;
    if (e.code() == ErrorCode::InvalidArgument) return kExitUsage;
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cricwin
