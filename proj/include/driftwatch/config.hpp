#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "driftwatch/canonical.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/feature_kind.hpp"

namespace driftwatch {

/// Every tunable threshold used by typing, summarization, benchmarking,
/// alerting and model comparison. Immutable per run: "updates" are new
/// values produced by merge_overrides().
struct DriftConfig {
  std::int64_t categorical_distinct_cap = 20;
  double categorical_ratio = 0.05;
  double numeric_parse_ratio = 0.99;
  std::int64_t histogram_bins = 10;
  double psi_warn = 0.10;
  double psi_alert = 0.25;
  double rel_change_warn = 0.10;
  double rel_change_alert = 0.30;
  double missing_rate_delta_alert = 0.05;
  double overall_drift_accepted_pct = 20.0;
  double psi_smoothing_eps = 1e-4;
  double alpha = 0.05;
  double degradation_tolerance = 0.10;
  std::optional<std::string> notify_url;
  std::int64_t top_k_categories = 20;
  // Per-feature kind overrides, applied before inference.
  std::map<std::string, FeatureKind> feature_kinds;

  bool operator==(const DriftConfig&) const = default;
};

namespace detail {

[[noreturn]] inline void range_error(std::string_view key, std::string_view range) {
  throw ConfigError("config key '" + std::string(key) + "' out of range: expected " +
                    std::string(range));
}

inline std::int64_t as_integer(std::string_view key, const Json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw ConfigError("config key '" + std::string(key) + "' must be an integer");
}

inline double as_real(std::string_view key, const Json& v) {
  if (!v.is_number()) throw ConfigError("config key '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

using Setter = std::function<void(DriftConfig&, const Json&)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"categorical_distinct_cap",
       [](DriftConfig& c, const Json& v) { c.categorical_distinct_cap = as_integer("categorical_distinct_cap", v); }},
      {"categorical_ratio",
       [](DriftConfig& c, const Json& v) { c.categorical_ratio = as_real("categorical_ratio", v); }},
      {"numeric_parse_ratio",
       [](DriftConfig& c, const Json& v) { c.numeric_parse_ratio = as_real("numeric_parse_ratio", v); }},
      {"histogram_bins",
       [](DriftConfig& c, const Json& v) { c.histogram_bins = as_integer("histogram_bins", v); }},
      {"psi_warn", [](DriftConfig& c, const Json& v) { c.psi_warn = as_real("psi_warn", v); }},
      {"psi_alert", [](DriftConfig& c, const Json& v) { c.psi_alert = as_real("psi_alert", v); }},
      {"rel_change_warn",
       [](DriftConfig& c, const Json& v) { c.rel_change_warn = as_real("rel_change_warn", v); }},
      {"rel_change_alert",
       [](DriftConfig& c, const Json& v) { c.rel_change_alert = as_real("rel_change_alert", v); }},
      {"missing_rate_delta_alert",
       [](DriftConfig& c, const Json& v) { c.missing_rate_delta_alert = as_real("missing_rate_delta_alert", v); }},
      {"overall_drift_accepted_pct",
       [](DriftConfig& c, const Json& v) { c.overall_drift_accepted_pct = as_real("overall_drift_accepted_pct", v); }},
      {"psi_smoothing_eps",
       [](DriftConfig& c, const Json& v) { c.psi_smoothing_eps = as_real("psi_smoothing_eps", v); }},
      {"alpha", [](DriftConfig& c, const Json& v) { c.alpha = as_real("alpha", v); }},
      {"degradation_tolerance",
       [](DriftConfig& c, const Json& v) { c.degradation_tolerance = as_real("degradation_tolerance", v); }},
      {"notify_url",
       [](DriftConfig& c, const Json& v) {
         if (v.is_null()) {
           c.notify_url.reset();
         } else if (v.is_string()) {
           c.notify_url = v.get<std::string>();
         } else {
           throw ConfigError("config key 'notify_url' must be a string or null");
         }
       }},
      {"top_k_categories",
       [](DriftConfig& c, const Json& v) { c.top_k_categories = as_integer("top_k_categories", v); }},
      {"feature_kinds",
       [](DriftConfig& c, const Json& v) {
         if (!v.is_object()) throw ConfigError("config key 'feature_kinds' must be an object");
         std::map<std::string, FeatureKind> kinds;
         for (const auto& [name, kind] : v.items()) {
           auto parsed = kind.is_string() ? parse_feature_kind(kind.get<std::string>()) : std::nullopt;
           if (!parsed) {
             throw ConfigError("config key 'feature_kinds." + name +
                               "' must be one of \"numerical\", \"categorical\", \"text\"");
           }
           kinds[name] = *parsed;
         }
         c.feature_kinds = std::move(kinds);
       }},
  };
  return table;
}

inline void apply(DriftConfig& cfg, const Json& overrides) {
  if (!overrides.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, value);
  }
}

}  // namespace detail

inline void validate(const DriftConfig& c) {
  using detail::range_error;
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (c.categorical_distinct_cap < 1) range_error("categorical_distinct_cap", ">= 1");
  if (!unit(c.categorical_ratio)) range_error("categorical_ratio", "[0, 1]");
  if (!unit(c.numeric_parse_ratio)) range_error("numeric_parse_ratio", "[0, 1]");
  if (c.histogram_bins < 1) range_error("histogram_bins", ">= 1");
  if (!(c.psi_warn >= 0.0)) range_error("psi_warn", ">= 0");
  if (!(c.psi_alert >= 0.0)) range_error("psi_alert", ">= 0");
  if (!(c.rel_change_warn >= 0.0)) range_error("rel_change_warn", ">= 0");
  if (!(c.rel_change_alert >= 0.0)) range_error("rel_change_alert", ">= 0");
  if (!unit(c.missing_rate_delta_alert)) range_error("missing_rate_delta_alert", "[0, 1]");
  if (!(c.overall_drift_accepted_pct >= 0.0 && c.overall_drift_accepted_pct <= 100.0)) {
    range_error("overall_drift_accepted_pct", "[0, 100]");
  }
  if (!(c.psi_smoothing_eps > 0.0 && c.psi_smoothing_eps < 1.0)) range_error("psi_smoothing_eps", "(0, 1)");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) range_error("alpha", "(0, 1)");
  if (!(c.degradation_tolerance >= 0.0)) range_error("degradation_tolerance", ">= 0");
  if (c.top_k_categories < 1) range_error("top_k_categories", ">= 1");
  if (c.notify_url && c.notify_url->empty()) range_error("notify_url", "a non-empty URL");
  if (c.psi_warn > c.psi_alert) throw ConfigError("invalid config: psi_warn > psi_alert");
  if (c.rel_change_warn > c.rel_change_alert) {
    throw ConfigError("invalid config: rel_change_warn > rel_change_alert");
  }
}

inline Json to_json(const DriftConfig& c) {
  Json kinds = Json::object();
  for (const auto& [name, kind] : c.feature_kinds) kinds[name] = std::string(to_string(kind));
  Json doc = {
      {"categorical_distinct_cap", c.categorical_distinct_cap},
      {"categorical_ratio", c.categorical_ratio},
      {"numeric_parse_ratio", c.numeric_parse_ratio},
      {"histogram_bins", c.histogram_bins},
      {"psi_warn", c.psi_warn},
      {"psi_alert", c.psi_alert},
      {"rel_change_warn", c.rel_change_warn},
      {"rel_change_alert", c.rel_change_alert},
      {"missing_rate_delta_alert", c.missing_rate_delta_alert},
      {"overall_drift_accepted_pct", c.overall_drift_accepted_pct},
      {"psi_smoothing_eps", c.psi_smoothing_eps},
      {"alpha", c.alpha},
      {"degradation_tolerance", c.degradation_tolerance},
      {"top_k_categories", c.top_k_categories},
      {"feature_kinds", kinds},
  };
  if (c.notify_url) doc["notify_url"] = *c.notify_url;
  return doc;
}

/// Defaults overlaid by the keys of a JSON object. Absent source yields the
/// defaults. Unknown keys and out-of-range values throw ConfigError;
/// malformed JSON throws ParseError with line and column.
inline DriftConfig load_config(std::optional<std::string_view> source = std::nullopt) {
  DriftConfig cfg;
  if (source) detail::apply(cfg, parse_json(*source));
  validate(cfg);
  return cfg;
}

inline DriftConfig merge_overrides(const DriftConfig& cfg, const Json& overrides) {
  DriftConfig merged = cfg;
  detail::apply(merged, overrides);
  validate(merged);
  return merged;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Resolves the config for one run: explicit path, then $DRIFTWATCH_CONFIG,
/// then defaults.
inline DriftConfig load_config_file(const std::optional<std::filesystem::path>& path) {
  std::optional<std::filesystem::path> resolved = path;
  if (!resolved) {
    if (const char* env = std::getenv("DRIFTWATCH_CONFIG"); env != nullptr && *env != '\0') {
      resolved = env;
    }
  }
  if (!resolved) return load_config();
  const std::string text = read_file(*resolved);
  return load_config(text);
}

}  // namespace driftwatch
