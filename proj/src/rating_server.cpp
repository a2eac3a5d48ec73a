#include <thread>

#include "httplib.h"
#include "json_util.hpp"
#include "xqa/error.hpp"
#include "xqa/rating_service.hpp"

namespace xqa::rating {
namespace {

using detail::Json;

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>Answer rating</title></head>"
    "<body><p>The rating UI assets are not installed. The JSON API is available under "
    "<code>/api/session/{id}/</code>.</p></body></html>";

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(Json{{"error", message}}.dump(), "application/json");
}

// Runs a handler and maps domain exceptions to HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFound& e) {
    send_error(res, 404, e.what());
  } catch (const UsageError& e) {
    send_error(res, 400, e.what());
  } catch (const DataError& e) {
    send_error(res, 500, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

std::string rater_param(const httplib::Request& req) {
  if (!req.has_param("rater") || req.get_param_value("rater").empty()) {
    throw UsageError("missing 'rater' query parameter");
  }
  return req.get_param_value("rater");
}

}  // namespace

struct RatingServer::Impl {
  RatingService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(RatingService& s) : service(s) {}
};

RatingServer::RatingServer(RatingService& service, std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  RatingService& svc = service;

  server.Get(R"(/api/session/([^/]+)/next)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto task = svc.session(req.matches[1]).next_task(rater_param(req));
      if (!task) {
        res.set_content(R"({"done":true})", "application/json");
      } else {
        res.set_content(R"({"done":false,"task":)" + task_to_json(*task) + "}", "application/json");
      }
    });
  });

  server.Get(R"(/api/session/([^/]+)/task)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("position")) throw UsageError("missing 'position' query parameter");
      std::size_t position = 0;
      try {
        position = std::stoul(req.get_param_value("position"));
      } catch (const std::exception&) {
        throw UsageError("'position' must be a non-negative integer");
      }
      const auto task = svc.session(req.matches[1]).task_at(rater_param(req), position);
      res.set_content(R"({"done":false,"task":)" + task_to_json(task) + "}", "application/json");
    });
  });

  server.Post(R"(/api/session/([^/]+)/verdict)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto& session = svc.session(req.matches[1]);
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const nlohmann::json::exception&) {
        throw UsageError("request body is not valid JSON");
      }
      if (!body.is_object()) throw UsageError("request body must be a JSON object");
      for (const char* field : {"rater_id", "question_id", "model_id"}) {
        if (!body.contains(field) || !body[field].is_string()) {
          throw UsageError(std::string("'") + field + "' must be a string");
        }
      }
      if (!body.contains("verdict") || !body["verdict"].is_number_integer()) {
        throw UsageError("'verdict' must be the integer 0 or 1");
      }
      const auto progress = session.submit_verdict(body["rater_id"].get<std::string>(),
                                                   body["question_id"].get<std::string>(),
                                                   body["model_id"].get<std::string>(), body["verdict"].get<int>());
      res.set_content(R"({"ok":true,"progress":)" + progress_to_json(progress) + "}", "application/json");
    });
  });

  server.Get(R"(/api/session/([^/]+)/progress)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(progress_to_json(svc.session(req.matches[1]).progress()), "application/json"); });
  });

  server.Get(R"(/api/session/([^/]+)/export)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(svc.session(req.matches[1]).export_jsonl(), "application/x-ndjson"); });
  });

  if (ui_dir && std::filesystem::is_directory(*ui_dir)) {
    server.set_mount_point("/", ui_dir->string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

RatingServer::~RatingServer() { stop(); }

int RatingServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    port_ = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) throw UsageError("cannot bind " + host + ":" + std::to_string(port));
  return port_;
}

bool RatingServer::listen() { return impl_->server.listen_after_bind(); }

void RatingServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void RatingServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace xqa::rating
