#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "driftwatch/benchmark.hpp"
#include "driftwatch/canonical.hpp"
#include "driftwatch/config.hpp"
#include "httplib.h"

namespace driftwatch {

enum class RenderFormat { Json, Text };

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string short_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string render_value(const FindingValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return short_number(std::get<double>(v));
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Renders a report. JSON is the canonical document; text is a header line
/// followed by one line per warn/alert finding.
inline std::string render_report(const DriftReport& report, RenderFormat format) {
  if (format == RenderFormat::Json) return canonical_dump(to_json(report));
  std::string out = "DRIFT REPORT " + report.report_id + " \xE2\x80\x94 " +
                    detail::upper(to_string(report.verdict)) + " (" + detail::fixed2(report.overall_drift_pct) +
                    "% drift, budget " + detail::fixed2(report.drift_budget_pct) + "%)\n";
  for (const auto& f : report.findings) {
    if (f.status == Status::Ok) continue;
    out += detail::upper(to_string(f.status));
    out += ' ';
    out += f.feature;
    out += ' ';
    out += to_string(f.check);
    out += " base=" + detail::render_value(f.baseline_value);
    out += " cur=" + detail::render_value(f.current_value);
    out += " score=" + detail::short_number(f.score);
    out += '\n';
  }
  return out;
}

struct AlertEntry {
  std::string feature;
  Check check = Check::Psi;
  double score = 0.0;

  bool operator==(const AlertEntry&) const = default;
};

struct AlertEnvelope {
  std::string report_id;
  Verdict verdict = Verdict::Pass;
  double overall_drift_pct = 0.0;
  std::vector<AlertEntry> alerts;
  std::string emitted_at;
};

inline AlertEnvelope make_envelope(const DriftReport& report) {
  AlertEnvelope env;
  env.report_id = report.report_id;
  env.verdict = report.verdict;
  env.overall_drift_pct = report.overall_drift_pct;
  for (const auto& f : report.findings) {
    if (f.status == Status::Alert) env.alerts.push_back(AlertEntry{f.feature, f.check, f.score});
  }
  env.emitted_at = utc_now_iso8601();
  return env;
}

inline Json to_json(const AlertEnvelope& env) {
  Json alerts = Json::array();
  for (const auto& a : env.alerts) {
    alerts.push_back({{"feature", a.feature}, {"check", std::string(to_string(a.check))}, {"score", a.score}});
  }
  return {{"report_id", env.report_id},
          {"verdict", std::string(to_string(env.verdict))},
          {"overall_drift_pct", env.overall_drift_pct},
          {"alerts", alerts},
          {"emitted_at", env.emitted_at}};
}

struct RetryPolicy {
  // One entry per retry; the attempt count is backoff.size() + 1.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(2),
                                                 std::chrono::seconds(4)};
  std::chrono::seconds timeout{5};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

struct DeliveryOutcome {
  enum class Kind { Delivered, Skipped, Failed };
  Kind kind = Kind::Skipped;
  int attempts = 0;
  std::string reason;
};

inline std::string_view to_string(DeliveryOutcome::Kind k) {
  switch (k) {
    case DeliveryOutcome::Kind::Delivered:
      return "delivered";
    case DeliveryOutcome::Kind::Skipped:
      return "skipped";
    case DeliveryOutcome::Kind::Failed:
      return "failed";
  }
  return "failed";
}

/// POSTs the alert envelope to cfg.notify_url when the report failed or
/// holds any alert. Retries network errors and 5xx responses with backoff.
/// Never throws: delivery problems come back as a Failed outcome.
inline DeliveryOutcome emit_alerts(const DriftReport& report, const DriftConfig& cfg,
                                   const RetryPolicy& policy = {}) {
  DeliveryOutcome outcome;
  const bool has_alert = std::any_of(report.findings.begin(), report.findings.end(),
                                     [](const DriftFinding& f) { return f.status == Status::Alert; });
  if (!cfg.notify_url || !(has_alert || report.verdict == Verdict::Fail)) {
    outcome.reason = cfg.notify_url ? "nothing to report" : "no notify_url configured";
    return outcome;
  }

  static const std::regex kUrl(R"(^(https?://[^/?#]+)([/?].*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(*cfg.notify_url, m, kUrl)) {
    outcome.kind = DeliveryOutcome::Kind::Failed;
    outcome.reason = "invalid notify_url '" + *cfg.notify_url + "'";
    return outcome;
  }
  const std::string origin = m[1].str();
  const std::string path = m[2].matched && !m[2].str().empty() ? m[2].str() : "/";

  std::string body;
  try {
    body = canonical_dump(to_json(make_envelope(report)));
  } catch (const std::exception& e) {
    outcome.kind = DeliveryOutcome::Kind::Failed;
    outcome.reason = e.what();
    return outcome;
  }

  httplib::Client client(origin);
  client.set_connection_timeout(policy.timeout);
  client.set_read_timeout(policy.timeout);
  client.set_write_timeout(policy.timeout);

  const std::size_t max_attempts = policy.backoff.size() + 1;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt > 0) policy.sleep(policy.backoff[attempt - 1]);
    ++outcome.attempts;
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      outcome.reason = "network error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      outcome.kind = DeliveryOutcome::Kind::Delivered;
      outcome.reason.clear();
      return outcome;
    }
    outcome.reason = "HTTP " + std::to_string(res->status);
    if (res->status < 500) break;
  }
  outcome.kind = DeliveryOutcome::Kind::Failed;
  return outcome;
}

}  // namespace driftwatch
