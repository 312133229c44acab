// Copyright 2026 The pereval Authors.
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

#include <httplib.h>

#include "pereval/annotation.hpp"
#include "pereval/error.hpp"

namespace pereval {
namespace {

constexpr char kJson[] = "application/json";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, std::string_view code,
                 const std::string& message) {
  reply(res, status, Json{{"error", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownRater:
    case ErrorCode::kUnknownTask:
      return 404;
    case ErrorCode::kLeaseExpired:
      return 410;
    case ErrorCode::kIncompleteAnswers:
      return 422;
    case ErrorCode::kDuplicateSubmission:
      return 409;
    case ErrorCode::kUnauthorized:
      return 401;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedRecord:
      return 400;
    default:
      return 500;
  }
}

std::optional<Choice> choice_field(const Json& body, std::string_view key) {
  auto it = body.find(std::string(key));
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedRecord, "'" + std::string(key) + "' must be \"A\" or \"B\"");
  }
  const std::string v = it->get<std::string>();
  if (v == "A" || v == "a") return Choice::kFirst;
  if (v == "B" || v == "b") return Choice::kSecond;
  throw Error(ErrorCode::kMalformedRecord, "'" + std::string(key) + "' must be \"A\" or \"B\"");
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationService& service;
  ServerOptions options;
  httplib::Server server;

  Impl(AnnotationService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  bool admin(const httplib::Request& req, httplib::Response& res) const {
    if (!options.admin_token || options.admin_token->empty()) {
      reply_error(res, 403, "Forbidden", "export is disabled: no admin token configured");
      return false;
    }
    if (req.get_header_value("Authorization") != "Bearer " + *options.admin_token) {
      reply_error(res, 401, "Unauthorized", "missing or wrong admin token");
      return false;
    }
    return true;
  }

  template <typename Handler>
  static httplib::Server::Handler guarded(Handler h) {
    return [h](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        reply_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
      } catch (const Json::exception& e) {
        reply_error(res, 400, "MalformedRecord", e.what());
      }
    };
  }

  void routes() {
    server.Post("/api/raters", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = Json::parse(req.body);
      const std::string name = body.value("name", "");
      if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "'name' is required");
      reply(res, 201, Json{{"rater_id", service.register_rater(name)}});
    }));

    server.Get("/api/tasks/next",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!req.has_param("rater_id")) {
                   throw Error(ErrorCode::kInvalidArgument, "'rater_id' is required");
                 }
                 const auto task = service.next_task(req.get_param_value("rater_id"));
                 if (!task) {
                   res.status = 204;
                   return;
                 }
                 reply(res, 200, rater_payload(*task));
               }));

    server.Post("/api/judgments",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const Json body = Json::parse(req.body);
                  SubmitRequest r;
                  r.task_id = body.at("task_id").get<std::string>();
                  r.rater_id = body.at("rater_id").get<std::string>();
                  for (Dimension d : kAllDimensions) {
                    r.choices[static_cast<std::size_t>(d)] =
                        choice_field(body, dimension_name(d));
                  }
                  r.elapsed_seconds = body.value("elapsed_seconds", 0.0);
                  const SubmitAck ack = service.submit(r);
                  if (ack.duplicate) {
                    reply(res, 409, Json{{"error", "DuplicateSubmission"},
                                         {"message", "judgment already recorded"},
                                         {"judgment_id", ack.judgment_id}});
                    return;
                  }
                  reply(res, 201, Json{{"judgment_id", ack.judgment_id}});
                }));

    server.Get("/api/export/outcomes",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!admin(req, res)) return;
                 const ExportResult result = service.export_outcomes();
                 Json outcomes = Json::array();
                 for (const CaseOutcome& o : result.outcomes) outcomes.push_back(to_json(o));
                 reply(res, 200, Json{{"outcomes", outcomes},
                                      {"partial_cases", result.partial_cases},
                                      {"unjudged_cases", result.unjudged_cases}});
               }));

    server.Get("/api/export/judgments",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!admin(req, res)) return;
                 Json judgments = Json::array();
                 for (const HumanJudgment& h : service.judgments()) judgments.push_back(to_json(h));
                 reply(res, 200, Json{{"judgments", judgments}});
               }));

    if (options.ui_dir) server.set_mount_point("/", options.ui_dir->string());
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool AnnotationServer::serve() { return impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace pereval
