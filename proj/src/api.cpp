// Copyright 2026, The shrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shrec/api.hpp"

#include <cstdio>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "shrec/errors.hpp"
#include "shrec/serialization.hpp"

namespace shrec {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view message) {
  reply(res, status, json{{"error", message}});
}

// A bare date means midnight UTC; `inclusive_end` moves it to the next day.
std::optional<Timestamp> parse_bound(const std::string& text, bool inclusive_end) {
  if (auto ts = parse_iso8601(text)) return ts;
  unsigned y, m, d;
  char tail;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4u-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(y)), std::chrono::month(m),
                                  std::chrono::day(d)};
  if (!ymd.ok()) return std::nullopt;
  Timestamp ts{std::chrono::sys_days(ymd)};
  return inclusive_end ? ts + std::chrono::days(1) : ts;
}

json to_array(const auto& items) {
  json out = json::array();
  for (const auto& item : items) out.push_back(item);
  return out;
}

// Maps the library's exceptions onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFoundError& e) {
    reply_error(res, 404, e.what());
  } catch (const ConflictError& e) {
    reply_error(res, 409, e.what());
  } catch (const Error& e) {
    reply_error(res, 422, e.what());
  } catch (const json::exception& e) {
    reply_error(res, 422, e.what());
  }
}

}  // namespace

struct ApiServer::Impl {
  Impl(Service& s, ApiOptions o) : service(s), options(std::move(o)) { routes(); }

  Service& service;
  ApiOptions options;
  httplib::Server server;
  std::thread thread;
  int bound_port = 0;

  void routes();
};

void ApiServer::Impl::routes() {
  server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    if (!options.token || req.path == "/api/health") return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") != "Bearer " + *options.token) {
      reply_error(res, 401, "missing or invalid token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      spdlog::error("request failed: {}", e.what());
      reply_error(res, 500, e.what());
    }
  });

  server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, json{{"status", "ok"}, {"homes", service.homes().size()}});
  });

  server.Get("/api/recommendations", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> home;
      std::optional<RecommendationStatus> status;
      if (req.has_param("home")) home = req.get_param_value("home");
      if (req.has_param("status")) {
        status = status_from_string(req.get_param_value("status"));
        if (!status) throw ValidationError("unknown status " + req.get_param_value("status"));
      }
      if (home && !service.has_home(*home)) throw NotFoundError("unknown home " + *home);
      reply(res, 200, to_array(service.recommendations(home, status)));
    });
  });

  server.Post(R"(/api/recommendations/([^/]+)/feedback)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  auto body = json::parse(req.body);
                  auto vote = vote_from_string(body.at("vote").get<std::string>());
                  if (!vote) throw ValidationError("vote must be useful or not_useful");
                  auto result = service.feedback(req.matches[1], *vote);
                  reply(res, 200,
                        json{{"recommendation", result.recommendation}, {"rule", result.rule}});
                });
              });

  server.Get("/api/rules", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> home;
      if (req.has_param("home")) {
        home = req.get_param_value("home");
        if (!service.has_home(*home)) throw NotFoundError("unknown home " + *home);
      }
      reply(res, 200, to_array(service.rules(home)));
    });
  });

  server.Post(R"(/api/homes/([^/]+)/rules/([^/]+)/reset)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  reply(res, 200, json(service.admin_reset(req.matches[1], req.matches[2])));
                });
              });

  server.Get("/api/metrics", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<Timestamp> from, to;
      if (req.has_param("from")) {
        from = parse_bound(req.get_param_value("from"), false);
        if (!from) throw ValidationError("bad from " + req.get_param_value("from"));
      }
      if (req.has_param("to")) {
        to = parse_bound(req.get_param_value("to"), true);
        if (!to) throw ValidationError("bad to " + req.get_param_value("to"));
      }
      if (from && to && *to < *from) throw ValidationError("to precedes from");
      reply(res, 200, json(service.metrics(from, to)));
    });
  });

  server.Post("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = json::parse(req.body);
      std::vector<Event> events;
      if (body.is_array()) {
        for (const auto& e : body) events.push_back(e.get<Event>());
      } else {
        events.push_back(body.get<Event>());
      }
      json emitted = json::array();
      std::size_t accepted = 0;
      for (const auto& e : events) {
        try {
          for (const auto& r : service.ingest(e)) emitted.push_back(r);
        } catch (const Error& err) {
          json detail{{"error", err.what()}, {"accepted", accepted}, {"recommendations", emitted}};
          reply(res, dynamic_cast<const NotFoundError*>(&err) ? 404 : 422, detail);
          return;
        }
        ++accepted;
      }
      reply(res, 200, json{{"accepted", accepted}, {"recommendations", emitted}});
    });
  });

  server.Post("/api/homes", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = json::parse(req.body);
      auto home = body.at("home").get<std::string>();
      if (home.empty()) throw ValidationError("empty home id");
      auto symbols = symbol_table_from_json(body.at("symbols"));
      std::vector<AssociationRule> rules;
      for (const auto& r : body.value("rules", json::array())) rules.push_back(r.get<AssociationRule>());
      EmissionPolicy policy = body.contains("policy") ? body["policy"].get<EmissionPolicy>()
                                                       : EmissionPolicy{};
      policy.validate();
      service.install_home(home, symbols, rules, policy);
      reply(res, 201, json{{"home", home}, {"rules", rules.size()}});
    });
  });

  server.Post(R"(/api/homes/([^/]+)/tick)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  auto body = json::parse(req.body);
                  auto now = parse_iso8601(body.at("now").get<std::string>());
                  if (!now) throw ValidationError("bad timestamp");
                  reply(res, 200, json{{"recommendations", to_array(service.tick(req.matches[1], *now))}});
                });
              });
}

ApiServer::ApiServer(Service& service, ApiOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  auto& s = impl_->server;
  impl_->bound_port = impl_->options.port == 0
                          ? s.bind_to_any_port(impl_->options.host)
                          : (s.bind_to_port(impl_->options.host, impl_->options.port)
                                 ? impl_->options.port
                                 : -1);
  if (impl_->bound_port < 0) {
    throw IoError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return impl_->bound_port;
}

void ApiServer::run() {
  auto& s = impl_->server;
  if (impl_->options.port == 0) {
    impl_->bound_port = s.bind_to_any_port(impl_->options.host);
  } else if (s.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->bound_port = impl_->options.port;
  } else {
    throw IoError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  spdlog::info("listening on {}:{}", impl_->options.host, impl_->bound_port);
  s.listen_after_bind();
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ApiServer::port() const { return impl_->bound_port; }

}  // namespace shrec
