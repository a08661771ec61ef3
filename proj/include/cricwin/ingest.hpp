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

// Ball-by-ball ODI corpus: parsing of the per-match CSV dialect, validation,
// outcome filtering and the seeded match-level train/test split.
//
// Match files use cricsheet-style rows:
//
//   info,<key>,<value>
//   ball,<innings>,<over.ball>,<batting_team>,<batsman>,<non_striker>,
//        <bowler>,<runs_off_bat>,<extras>,<extras_kind>,<wicket_kind>
//
// A twelfth ball column (dismissed player) is tolerated and ignored, as are
// `version` rows and unknown `info` keys.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cricwin/error.hpp"
#include "cricwin/format.hpp"
#include "cricwin/hash.hpp"
#include "cricwin/rng.hpp"

namespace cricwin {

enum class ExtrasKind { None, Wide, NoBall, Bye, LegBye, Penalty };

constexpr std::string_view to_string(ExtrasKind kind) {
  switch (kind) {
    case ExtrasKind::None: return "none";
    case ExtrasKind::Wide: return "wide";
    case ExtrasKind::NoBall: return "noball";
    case ExtrasKind::Bye: return "bye";
    case ExtrasKind::LegBye: return "legbye";
    case ExtrasKind::Penalty: return "penalty";
  }
  return "none";
}

inline std::optional<ExtrasKind> parse_extras_kind(std::string_view text) {
  if (text.empty() || text == "none") return ExtrasKind::None;
  if (text == "wide" || text == "wides") return ExtrasKind::Wide;
  if (text == "noball" || text == "noballs") return ExtrasKind::NoBall;
  if (text == "bye" || text == "byes") return ExtrasKind::Bye;
  if (text == "legbye" || text == "legbyes") return ExtrasKind::LegBye;
  if (text == "penalty" || text == "penalties") return ExtrasKind::Penalty;
  return std::nullopt;
}

/// Wides and no-balls do not count toward the over.
constexpr bool is_legal(ExtrasKind kind) {
  return kind != ExtrasKind::Wide && kind != ExtrasKind::NoBall;
}

struct DeliveryRecord {
  int innings_no = 1;
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

  bool operator==(const DeliveryRecord&) const = default;
};

enum class OutcomeKind { Normal, Tie, NoResult, DlAdjusted };

constexpr std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Normal: return "normal";
    case OutcomeKind::Tie: return "tie";
    case OutcomeKind::NoResult: return "no_result";
    case OutcomeKind::DlAdjusted: return "dl_adjusted";
  }
  return "normal";
}

inline std::optional<OutcomeKind> parse_outcome_kind(std::string_view text) {
  if (text == "normal") return OutcomeKind::Normal;
  if (text == "tie") return OutcomeKind::Tie;
  if (text == "no_result") return OutcomeKind::NoResult;
  if (text == "dl_adjusted") return OutcomeKind::DlAdjusted;
  return std::nullopt;
}

struct MatchRecord {
  std::string match_id;
  std::array<std::string, 2> teams;
  std::string date;
  std::string venue;
  std::optional<std::string> city;
  std::string season;
  std::string gender;
  std::string toss_winner;
  std::string toss_decision;
  std::optional<std::string> winner;
  OutcomeKind outcome_kind = OutcomeKind::Normal;
  int first_innings_runs = 0;
  int first_innings_wickets = 0;
  std::vector<DeliveryRecord> deliveries;

  bool operator==(const MatchRecord&) const = default;

  /// Team batting in the given innings, read from its first delivery.
  std::optional<std::string> batting_team(int innings_no) const {
    for (const auto& d : deliveries)
      if (d.innings_no == innings_no) return d.batting_team;
    return std::nullopt;
  }

  std::vector<DeliveryRecord> innings(int innings_no) const {
    std::vector<DeliveryRecord> out;
    for (const auto& d : deliveries)
      if (d.innings_no == innings_no) out.push_back(d);
    return out;
  }
};

/// Runs (bat + extras) and wickets of the first innings, wickets capped at 10.
inline std::pair<int, int> first_innings_totals(const std::vector<DeliveryRecord>& deliveries) {
  int runs = 0;
  int wickets = 0;
  for (const auto& d : deliveries) {
    if (d.innings_no != 1) continue;
    runs += d.runs_off_bat + d.extras;
    wickets += d.wicket ? 1 : 0;
  }
  return {runs, std::min(wickets, 10)};
}

inline void derive_totals(MatchRecord& m) {
  std::tie(m.first_innings_runs, m.first_innings_wickets) = first_innings_totals(m.deliveries);
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

namespace detail {

// One CSV record, RFC 4180 quoting. Records never span lines in this dialect.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

[[noreturn]] inline void malformed(std::size_t line_no, const std::string& what) {
  fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

inline MatchRecord parse_match_file(std::string_view content, const std::string& match_id) {
  MatchRecord m;
  m.match_id = match_id;
  std::vector<std::string> teams;
  std::optional<std::string> outcome_text;
  std::optional<std::string> method;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  if (content.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto cols = detail::split_csv_line(line);
    const std::string& tag = cols[0];
    if (tag == "version") continue;
    if (tag == "info") {
      if (cols.size() < 3) {
        if (cols.size() == 2) continue;  // key with no value
        detail::malformed(line_no, "info row needs a key");
      }
      const std::string& key = cols[1];
      const std::string& value = cols[2];
      if (key == "team" || key == "teams") teams.push_back(value);
      else if (key == "date" && m.date.empty()) m.date = value;
      else if (key == "venue") m.venue = value;
      else if (key == "city") m.city = value;
      else if (key == "season") m.season = value;
      else if (key == "gender") m.gender = value;
      else if (key == "toss_winner") m.toss_winner = value;
      else if (key == "toss_decision") m.toss_decision = value;
      else if (key == "winner") m.winner = value;
      else if (key == "outcome") outcome_text = value;
      else if (key == "method") method = value;
      continue;
    }
    if (tag != "ball") detail::malformed(line_no, "unknown row tag '" + tag + "'");
    if (cols.size() != 11 && cols.size() != 12)
      detail::malformed(line_no, "ball row has " + std::to_string(cols.size()) +
                                     " columns, expected 11");

    DeliveryRecord d;
    const auto innings = detail::parse_int(cols[1]);
    if (!innings || *innings < 1) detail::malformed(line_no, "bad innings '" + cols[1] + "'");
    if (*innings > 2) continue;  // super overs are not part of the 50-over innings
    d.innings_no = *innings;

    const auto dot = cols[2].find('.');
    if (dot == std::string::npos) detail::malformed(line_no, "bad over.ball '" + cols[2] + "'");
    const auto over = detail::parse_int(std::string_view(cols[2]).substr(0, dot));
    const auto ball = detail::parse_int(std::string_view(cols[2]).substr(dot + 1));
    if (!over || !ball || *over < 0 || *ball < 0)
      detail::malformed(line_no, "bad over.ball '" + cols[2] + "'");
    d.over = *over;
    d.ball_in_over = *ball;

    d.batting_team = cols[3];
    d.batsman = cols[4];
    d.non_striker = cols[5];
    d.bowler = cols[6];

    const auto runs = detail::parse_int(cols[7]);
    const auto extras = detail::parse_int(cols[8]);
    if (!runs || *runs < 0) detail::malformed(line_no, "bad runs_off_bat '" + cols[7] + "'");
    if (!extras || *extras < 0) detail::malformed(line_no, "bad extras '" + cols[8] + "'");
    d.runs_off_bat = *runs;
    d.extras = *extras;

    const auto kind = parse_extras_kind(cols[9]);
    if (!kind) detail::malformed(line_no, "unknown extras kind '" + cols[9] + "'");
    d.extras_kind = *kind;
    d.wicket = !cols[10].empty();
    m.deliveries.push_back(std::move(d));
  }

  if (teams.size() < 2)
    fail(ErrorCode::MissingMetadata, match_id + ": expected two `teams` rows");
  m.teams = {teams[0], teams[1]};

  if (outcome_text == "tie") {
    m.outcome_kind = OutcomeKind::Tie;
  } else if (outcome_text == "no result" || outcome_text == "draw") {
    m.outcome_kind = OutcomeKind::NoResult;
  } else if (m.winner) {
    const bool rain_rule = method && (method->find("D/L") != std::string::npos ||
                                      method->find("DLS") != std::string::npos ||
                                      method->find("Duckworth") != std::string::npos);
    m.outcome_kind = rain_rule ? OutcomeKind::DlAdjusted : OutcomeKind::Normal;
  } else {
    fail(ErrorCode::MissingMetadata, match_id + ": no winner or outcome");
  }

  if (m.deliveries.empty()) fail(ErrorCode::EmptyInnings, match_id + ": no delivery rows");
  derive_totals(m);
  return m;
}

inline MatchRecord parse_match_path(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_match_file(buf.str(), path.stem().string());
}

struct CorpusLoad {
  std::vector<MatchRecord> matches;
  std::vector<std::pair<std::string, std::string>> failures;  // file, message
};

/// Parses every *.csv under `dir` in filename order. Files that fail to
/// parse are reported, not fatal.
inline CorpusLoad load_corpus_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  CorpusLoad out;
  for (const auto& f : files) {
    try {
      out.matches.push_back(parse_match_path(f));
    } catch (const Error& e) {
      out.failures.emplace_back(f.filename().string(), e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

inline std::vector<Violation> validate_match(const MatchRecord& m) {
  std::vector<Violation> out;
  if (m.teams[0].empty() || m.teams[1].empty() || m.teams[0] == m.teams[1])
    out.push_back({"teams", "must name two distinct teams"});
  if (m.winner && *m.winner != m.teams[0] && *m.winner != m.teams[1])
    out.push_back({"winner", "must be one of teams"});
  if (m.outcome_kind == OutcomeKind::Normal && !m.winner)
    out.push_back({"winner", "required when outcome_kind is normal"});
  if (!m.toss_decision.empty() && m.toss_decision != "bat" && m.toss_decision != "field")
    out.push_back({"toss_decision", "must be bat or field"});

  bool bad_runs = false, bad_innings = false, bad_over = false, bad_ball = false;
  for (const auto& d : m.deliveries) {
    bad_runs |= d.runs_off_bat < 0 || d.extras < 0;
    bad_innings |= d.innings_no != 1 && d.innings_no != 2;
    bad_over |= d.over < 0 || d.over > 49;
    bad_ball |= d.ball_in_over < 1;
  }
  if (bad_runs) out.push_back({"deliveries.runs", "runs_off_bat and extras must be >= 0"});
  if (bad_innings) out.push_back({"deliveries.innings_no", "must be 1 or 2"});
  if (bad_over) out.push_back({"deliveries.over", "must lie in [0, 49]"});
  if (bad_ball) out.push_back({"deliveries.ball_in_over", "must be >= 1"});

  for (std::size_t i = 1; i < m.deliveries.size(); ++i) {
    const auto& a = m.deliveries[i - 1];
    const auto& b = m.deliveries[i];
    if (std::tie(a.innings_no, a.over, a.ball_in_over) > std::tie(b.innings_no, b.over, b.ball_in_over)) {
      out.push_back({"deliveries", "must be non-decreasing in (innings_no, over, ball_in_over)"});
      break;
    }
  }

  const auto [runs, wickets] = first_innings_totals(m.deliveries);
  if (runs != m.first_innings_runs)
    out.push_back({"first_innings_runs", "must equal the innings 1 sum of runs_off_bat + extras"});
  if (wickets != m.first_innings_wickets || m.first_innings_wickets < 0 || m.first_innings_wickets > 10)
    out.push_back({"first_innings_wickets", "must equal the innings 1 wicket count, capped at 10"});
  return out;
}

// ---------------------------------------------------------------------------
// Filtering and splitting
// ---------------------------------------------------------------------------

struct FilterPolicy {
  std::set<OutcomeKind> retain{OutcomeKind::Normal};
  int min_second_innings_deliveries = 6;
};

inline std::vector<MatchRecord> filter_corpus(const std::vector<MatchRecord>& matches,
                                              const FilterPolicy& policy = {}) {
  std::vector<MatchRecord> out;
  for (const auto& m : matches) {
    if (!policy.retain.contains(m.outcome_kind)) continue;
    const auto second = std::count_if(m.deliveries.begin(), m.deliveries.end(),
                                      [](const DeliveryRecord& d) { return d.innings_no == 2; });
    if (second < policy.min_second_innings_deliveries) continue;
    out.push_back(m);
  }
  return out;
}

struct DatasetSplit {
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
  std::uint64_t seed = 0;
  double ratio = 0.8;

  bool operator==(const DatasetSplit&) const = default;
};

/// Seeded match-level split. |train| = round(ratio * N), kept within [1, N-1].
inline DatasetSplit split_corpus(const std::vector<std::string>& match_ids, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::InvalidArgument, "split ratio must lie in (0, 1)");
  std::vector<std::string> ids = match_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) fail(ErrorCode::TooFewMatches, "need at least two matches to split");

  Rng rng(seed);
  rng.shuffle(ids);
  const auto n = static_cast<long>(ids.size());
  const long n_train = std::clamp(std::lround(ratio * static_cast<double>(n)), 1L, n - 1);

  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  split.train_ids.assign(ids.begin(), ids.begin() + n_train);
  split.test_ids.assign(ids.begin() + n_train, ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

inline DatasetSplit split_corpus(const std::vector<MatchRecord>& matches, double ratio, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(matches.size());
  for (const auto& m : matches) ids.push_back(m.match_id);
  return split_corpus(ids, ratio, seed);
}

// ---------------------------------------------------------------------------
// Canonical JSON form
// ---------------------------------------------------------------------------

// Deliveries are stored as positional arrays to keep manifests compact:
// [innings, over, ball, batting_team, batsman, non_striker, bowler,
//  runs_off_bat, extras, extras_kind, wicket]
inline void to_json(nlohmann::json& j, const DeliveryRecord& d) {
  j = nlohmann::json::array({d.innings_no, d.over, d.ball_in_over, d.batting_team, d.batsman, d.non_striker,
                             d.bowler, d.runs_off_bat, d.extras, std::string(to_string(d.extras_kind)),
                             d.wicket ? 1 : 0});
}

inline void from_json(const nlohmann::json& j, DeliveryRecord& d) {
  if (!j.is_array() || j.size() != 11) fail(ErrorCode::MalformedRow, "delivery must be an 11-element array");
  d.innings_no = j[0].get<int>();
  d.over = j[1].get<int>();
  d.ball_in_over = j[2].get<int>();
  d.batting_team = j[3].get<std::string>();
  d.batsman = j[4].get<std::string>();
  d.non_striker = j[5].get<std::string>();
  d.bowler = j[6].get<std::string>();
  d.runs_off_bat = j[7].get<int>();
  d.extras = j[8].get<int>();
  const auto kind = parse_extras_kind(j[9].get<std::string>());
  if (!kind) fail(ErrorCode::MalformedRow, "unknown extras kind " + j[9].dump());
  d.extras_kind = *kind;
  d.wicket = j[10].get<int>() != 0;
}

inline void to_json(nlohmann::json& j, const MatchRecord& m) {
  j = nlohmann::json{{"match_id", m.match_id},
                     {"teams", m.teams},
                     {"date", m.date},
                     {"venue", m.venue},
                     {"city", m.city ? nlohmann::json(*m.city) : nlohmann::json()},
                     {"season", m.season},
                     {"gender", m.gender},
                     {"toss_winner", m.toss_winner},
                     {"toss_decision", m.toss_decision},
                     {"winner", m.winner ? nlohmann::json(*m.winner) : nlohmann::json()},
                     {"outcome_kind", std::string(to_string(m.outcome_kind))},
                     {"first_innings_runs", m.first_innings_runs},
                     {"first_innings_wickets", m.first_innings_wickets},
                     {"deliveries", m.deliveries}};
}

inline void from_json(const nlohmann::json& j, MatchRecord& m) {
  m.match_id = j.at("match_id").get<std::string>();
  m.teams = j.at("teams").get<std::array<std::string, 2>>();
  m.date = j.at("date").get<std::string>();
  m.venue = j.at("venue").get<std::string>();
  m.city = j.at("city").is_null() ? std::nullopt : std::optional(j.at("city").get<std::string>());
  m.season = j.at("season").get<std::string>();
  m.gender = j.at("gender").get<std::string>();
  m.toss_winner = j.at("toss_winner").get<std::string>();
  m.toss_decision = j.at("toss_decision").get<std::string>();
  m.winner = j.at("winner").is_null() ? std::nullopt : std::optional(j.at("winner").get<std::string>());
  const auto kind = parse_outcome_kind(j.at("outcome_kind").get<std::string>());
  if (!kind) fail(ErrorCode::MissingMetadata, "unknown outcome_kind " + j.at("outcome_kind").dump());
  m.outcome_kind = *kind;
  m.first_innings_runs = j.at("first_innings_runs").get<int>();
  m.first_innings_wickets = j.at("first_innings_wickets").get<int>();
  m.deliveries = j.at("deliveries").get<std::vector<DeliveryRecord>>();
}

inline void to_json(nlohmann::json& j, const DatasetSplit& s) {
  j = nlohmann::json{{"train_ids", s.train_ids}, {"test_ids", s.test_ids}, {"ratio", s.ratio}, {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, DatasetSplit& s) {
  s.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  s.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  s.ratio = j.at("ratio").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
}

/// The corpus document shared by every downstream subcommand.
struct Manifest {
  int format_version = kManifestFormatVersion;
  int layout_version = kLayoutVersion;
  std::vector<MatchRecord> matches;
  DatasetSplit split;
  nlohmann::json stamp = nlohmann::json::object();
  std::string source_hash;  // of the file it was loaded from; not serialized

  std::vector<MatchRecord> select(const std::vector<std::string>& ids) const {
    std::vector<MatchRecord> out;
    for (const auto& m : matches)
      if (std::binary_search(ids.begin(), ids.end(), m.match_id)) out.push_back(m);
    return out;
  }
  std::vector<MatchRecord> train() const { return select(split.train_ids); }
  std::vector<MatchRecord> test() const { return select(split.test_ids); }
};

inline nlohmann::json manifest_to_json(const Manifest& m) {
  return nlohmann::json{{"format_version", m.format_version},
                        {"layout_version", m.layout_version},
                        {"matches", m.matches},
                        {"split", m.split},
                        {"stamp", m.stamp}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestFormatVersion)
      fail(ErrorCode::VersionMismatch, "manifest format_version " + std::to_string(m.format_version));
    m.layout_version = j.value("layout_version", kLayoutVersion);
    m.matches = j.at("matches").get<std::vector<MatchRecord>>();
    m.split = j.at("split").get<DatasetSplit>();
    m.stamp = j.value("stamp", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedRow, std::string("manifest: ") + e.what());
  }
  return m;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedRow, "manifest " + path.string() + ": " + e.what());
  }
  Manifest m = manifest_from_json(j);
  m.source_hash = hex_digest(text);
  return m;
}

}  // namespace cricwin
