#pragma once

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "driftwatch/config.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/interpreter.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/registry.hpp"
#include "driftwatch/store.hpp"
#include "httplib.h"

namespace driftwatch {

namespace detail {

// Delivers alert envelopes on a background thread so a slow or failing
// webhook never delays the HTTP response.
class AlertDispatcher {
 public:
  explicit AlertDispatcher(RetryPolicy policy) : policy_(std::move(policy)), worker_([this] { run(); }) {}

  AlertDispatcher(const AlertDispatcher&) = delete;
  AlertDispatcher& operator=(const AlertDispatcher&) = delete;

  ~AlertDispatcher() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  void submit(DriftReport report, DriftConfig cfg) {
    {
      std::lock_guard lock(mu_);
      queue_.emplace_back(std::move(report), std::move(cfg));
    }
    cv_.notify_one();
  }

 private:
  void run() {
    for (;;) {
      std::pair<DriftReport, DriftConfig> job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      const auto outcome = emit_alerts(job.first, job.second, policy_);
      if (outcome.kind == DeliveryOutcome::Kind::Failed) {
        std::fprintf(stderr, "driftwatch: alert for report %s not delivered after %d attempt(s): %s\n",
                     job.first.report_id.c_str(), outcome.attempts, outcome.reason.c_str());
      }
    }
  }

  RetryPolicy policy_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<DriftReport, DriftConfig>> queue_;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace detail

/// JSON API over a Store. Configuration is re-read on every request from
/// the explicit config path, $DRIFTWATCH_CONFIG, or <store>/config.json, in
/// that order; defaults apply when none exists.
class Server {
 public:
  Server(fs::path store_root, std::optional<fs::path> config_path = std::nullopt, RetryPolicy notify_policy = {})
      : store_(std::move(store_root)), config_path_(std::move(config_path)), alerts_(std::move(notify_policy)) {
    // SO_REUSEADDR only: the library default of SO_REUSEPORT would let a
    // second instance silently share the port instead of failing to bind.
    http_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    routes();
  }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  ~Server() { stop(); }

  /// Binds host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      const int bound = http_.bind_to_any_port(host);
      if (bound < 0) throw Error("cannot bind " + host + ":0");
      return bound;
    }
    if (!http_.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
  }

  // Blocks until stop().
  void listen() { http_.listen_after_bind(); }

  void stop() {
    if (http_.is_running()) http_.stop();
  }

  void wait_until_ready() { http_.wait_until_ready(); }

  DriftConfig current_config() const {
    if (config_path_) return load_config_file(config_path_);
    if (const char* env = std::getenv("DRIFTWATCH_CONFIG"); env != nullptr && *env != '\0') {
      return load_config_file(fs::path(env));
    }
    if (fs::exists(store_.config_path())) return load_config(read_file(store_.config_path()));
    return load_config();
  }

  Store& store() { return store_; }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send_json(httplib::Response& res, int status, const Json& doc) {
    res.status = status;
    res.set_content(canonical_dump(doc), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, Json{{"error", message}});
  }

  // Maps the library's error families onto HTTP statuses.
  static Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const ParseError& e) {
        send_error(res, 400, e.what());
      } catch (const NotFoundError& e) {
        send_error(res, 404, e.what());
      } catch (const ConflictError& e) {
        send_error(res, 409, e.what());
      } catch (const InvalidArgument& e) {
        send_error(res, 422, e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, std::string("malformed request: ") + e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  // Request-shape problems surface as 400 rather than 422.
  template <typename F>
  static auto malformed_as_400(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what());
    }
  }

  static DataFormat body_format(const httplib::Request& req) {
    const auto type = req.get_header_value("Content-Type");
    if (type.find("ndjson") != std::string::npos || type.find("jsonl") != std::string::npos) {
      return DataFormat::Jsonl;
    }
    return DataFormat::Csv;
  }

  static std::string required_param(const httplib::Request& req, const char* key) {
    if (!req.has_param(key) || req.get_param_value(key).empty()) {
      throw ParseError(std::string("missing query parameter '") + key + "'");
    }
    return req.get_param_value(key);
  }

  static Direction direction_of(const std::string& s) {
    auto d = parse_direction(s);
    if (!d) throw ParseError("direction must be 'max' or 'min'");
    return *d;
  }

  void routes() {
    http_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, Json{{"status", "ok"}});
    });

    http_.Post("/v1/baselines", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto cfg = current_config();
      std::optional<std::string> name;
      if (req.has_param("name")) name = req.get_param_value("name");
      const auto summary = profile_bytes(req.body, body_format(req), cfg, name);
      const auto id = store_.put_baseline(summary);
      send_json(res, 201, Json{{"baseline_id", id}});
    }));

    http_.Get("/v1/baselines", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json list = Json::array();
      for (const auto& s : store_.list_baselines()) {
        list.push_back({{"baseline_id", s.summary_id},
                        {"name", s.name ? Json(*s.name) : Json(nullptr)},
                        {"record_count", s.record_count},
                        {"created_at", s.created_at}});
      }
      send_json(res, 200, list);
    }));

    http_.Get(R"(/v1/baselines/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(store_.get_baseline(req.matches[1].str())));
    }));

    http_.Post("/v1/validate", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto baseline_id = required_param(req, "baseline_id");
      const auto cfg = current_config();
      const auto baseline = store_.get_baseline(baseline_id);
      const auto report = validate_bytes(baseline, req.body, body_format(req), cfg);
      store_.put_report(report);
      alerts_.submit(report, cfg);
      send_json(res, 200, to_json(report));
    }));

    http_.Get(R"(/v1/reports/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(store_.get_report(req.matches[1].str())));
    }));

    http_.Post(R"(/v1/models/([^/]+)/versions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string model = req.matches[1].str();
      const auto body = parse_json(req.body);
      const auto draft = malformed_as_400([&] {
        if (body.is_object() && body.contains("model_name") && body.at("model_name") != model) {
          throw InvalidArgument("model_name in body does not match the route");
        }
        return draft_from_json(body);
      });
      malformed_as_400([&] {
        detail::validate_model_name(model);
        return 0;
      });
      send_json(res, 201, to_json(store_.registry().log_version(model, draft)));
    }));

    http_.Get(R"(/v1/models/([^/]+)/versions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      Json list = Json::array();
      for (const auto& v : store_.registry().list_versions(req.matches[1].str())) list.push_back(to_json(v));
      send_json(res, 200, list);
    }));

    http_.Get(R"(/v1/models/([^/]+)/versions/(\d+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto n = std::stoll(req.matches[2].str());
                send_json(res, 200, to_json(store_.registry().get_version(req.matches[1].str(), n)));
              }));

    http_.Get(R"(/v1/models/([^/]+)/lineage)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(store_.registry().get_lineage(req.matches[1].str())));
    }));

    http_.Post(R"(/v1/models/([^/]+)/compare)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_json(req.body);
      if (!body.is_object() || !body.contains("metric") || !body.at("metric").is_string() ||
          !body.contains("versions") || !body.at("versions").is_array()) {
        throw ParseError("compare body must be {\"metric\": str, \"versions\": [int...], \"direction\": \"max\"|\"min\"}");
      }
      std::vector<std::int64_t> versions;
      for (const auto& v : body.at("versions")) {
        if (!v.is_number_integer()) throw ParseError("versions must be integers");
        versions.push_back(v.get<std::int64_t>());
      }
      const auto direction = direction_of(body.value("direction", std::string("max")));
      const auto comparison = store_.registry().compare_versions(
          req.matches[1].str(), body.at("metric").get<std::string>(), versions, direction, current_config());
      send_json(res, 200, to_json(comparison));
    }));

    http_.Get(R"(/v1/models/([^/]+)/best)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto metric = required_param(req, "metric");
      const auto direction = direction_of(req.has_param("direction") ? req.get_param_value("direction") : "max");
      const std::string model = req.matches[1].str();
      const auto version = store_.registry().best_version(model, metric, direction);
      send_json(res, 200,
                Json{{"model_name", model},
                     {"metric", metric},
                     {"direction", std::string(to_string(direction))},
                     {"version", version}});
    }));

    http_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, res.status == 404 ? "no such route" : httplib::status_message(res.status));
      }
    });
  }

  Store store_;
  std::optional<fs::path> config_path_;
  detail::AlertDispatcher alerts_;
  httplib::Server http_;
};

}  // namespace driftwatch
