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

// HTTP+JSON front end for SessionManager.

#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "cricwin/error.hpp"
#include "cricwin/serve.hpp"

namespace cricwin {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownCheckpoint: return 404;
    case ErrorCode::SessionClosed: return 410;
    case ErrorCode::SessionFull:
    case ErrorCode::NothingToUndo: return 409;
    case ErrorCode::MissingAugmentation:
    case ErrorCode::EncodingError:
    case ErrorCode::UnsupportedVariant:
    case ErrorCode::LayoutMismatch: return 422;
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedRow: return 400;
    default: return 500;
  }
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code), {{"error_code", std::string(to_string(code))}, {"message", message}});
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::InvalidArgument, "request body must be a JSON object");
  return j;
}

/// Runs a handler, mapping library and JSON errors onto the error envelope.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.detail());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, ErrorCode::InvalidArgument, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::IoError, e.what());
    }
  };
}

}  // namespace detail

inline void install_routes(httplib::Server& server, SessionManager& sessions) {
  using detail::guarded;
  using detail::send_json;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  server.Get("/v1/checkpoints", guarded([&sessions](const httplib::Request&, httplib::Response& res) {
               nlohmann::json out = nlohmann::json::array();
               for (const auto& info : sessions.registry().checkpoints()) {
                 const auto& c = info.checkpoint->config;
                 out.push_back({{"id", info.id},
                                {"variant", std::string(to_string(c.variant))},
                                {"aug", c.aug},
                                {"layout_version", info.checkpoint->layout.layout_version}});
               }
               send_json(res, 200, out);
             }));

  server.Post("/v1/sessions", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
                const auto body = detail::parse_body(req);
                if (!body.contains("checkpoint_id") || !body.at("checkpoint_id").is_string())
                  fail(ErrorCode::InvalidArgument, "checkpoint_id is required");
                if (!body.contains("context")) fail(ErrorCode::InvalidArgument, "context is required");
                const auto context = body.at("context").get<MatchContext>();
                const auto id = sessions.create(body.at("checkpoint_id").get<std::string>(), context);
                send_json(res, 201, {{"session_id", id}});
              }));

  server.Post(R"(/v1/sessions/([^/]+)/balls)",
              guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
                const auto event = detail::parse_body(req).get<BallEvent>();
                send_json(res, 200, sessions.push(req.matches[1], event));
              }));

  server.Post(R"(/v1/sessions/([^/]+)/undo)",
              guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
                const auto r = sessions.undo(req.matches[1]);
                send_json(res, 200, {{"t", r.t}, {"p_win", r.p_win ? nlohmann::json(*r.p_win) : nlohmann::json()}});
              }));

  server.Get(R"(/v1/sessions/([^/]+))", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, sessions.summary(req.matches[1]));
             }));

  server.Delete(R"(/v1/sessions/([^/]+))",
                guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
                  sessions.remove(req.matches[1]);
                  res.status = 204;
                }));
}

}  // namespace cricwin
