#include "airway/server.hpp"

#include <chrono>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "airway/error.hpp"

namespace airway {

namespace {

QueryParams query_of(const httplib::Request& req) {
  QueryParams q;
  for (auto& [k, v] : req.params) q[k] = v;
  return q;
}

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type.c_str());
}

Timestamp now() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace

struct HttpServer::Impl {
  ApiService& service;
  httplib::Server server;
};

HttpServer::HttpServer(ApiService& service) : impl_(new Impl{service, {}}) {
  auto& s = impl_->server;
  auto& api = impl_->service;
  // SO_REUSEADDR only: with httplib's default SO_REUSEPORT a second server
  // would share a port that is already taken instead of failing to bind.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  s.Post("/v1/observations", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.post_observations(req.get_header_value("Authorization"), req.body, now()));
  });
  s.Get("/v1/patients", [&api](const httplib::Request&, httplib::Response& res) {
    send(res, api.patients());
  });
  s.Get(R"(/v1/patients/([^/]+)/timeline)", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.timeline(req.matches[1], query_of(req)));
  });
  s.Get(R"(/v1/patients/([^/]+)/episodes)", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.episodes(req.matches[1], query_of(req)));
  });
  s.Get(R"(/v1/patients/([^/]+)/triggers)", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.triggers(req.matches[1], query_of(req)));
  });
  s.Get(R"(/v1/patients/([^/]+)/summary)", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.summary(req.matches[1], query_of(req)));
  });
  s.Get("/v1/cohort/triggers", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.cohort_triggers(query_of(req)));
  });
  s.Get("/v1/alerts", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.alerts(query_of(req)));
  });
  s.Get("/v1/config", [&api](const httplib::Request&, httplib::Response& res) {
    send(res, api.config());
  });

  if (auto& ui = api.settings().ui_dir) {
    if (!s.set_mount_point("/ui", ui->string())) {
      spdlog::warn("ui directory {} not found; /ui disabled", ui->string());
    }
  }
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(json{{"error", "NotFound"}, {"message", "no such endpoint"}}.dump(),
                    "application/json");
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    spdlog::error("request failed: {}", msg);
    res.status = 500;
    res.set_content(json{{"error", "Internal"}, {"message", msg}}.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  int bound = port == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::config_error, fmt::format("cannot bind {}:{}", host, port));
  }
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace airway
