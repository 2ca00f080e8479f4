#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "driftwatch/benchmark.hpp"
#include "driftwatch/canonical.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/fileio.hpp"
#include "driftwatch/stats.hpp"

namespace driftwatch {

struct Scalar {
  double value = 0.0;
  bool operator==(const Scalar&) const = default;
};

struct Samples {
  std::vector<double> values;
  bool operator==(const Samples&) const = default;
};

struct Proportion {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  bool operator==(const Proportion&) const = default;
};

using MetricValue = std::variant<Scalar, Samples, Proportion>;

inline void validate_metric(const std::string& name, const MetricValue& v) {
  if (name.empty()) throw InvalidArgument("metric names must be non-empty");
  if (const auto* s = std::get_if<Samples>(&v)) {
    if (s->values.empty()) throw InvalidArgument("metric '" + name + "': samples must be non-empty");
    for (double x : s->values) {
      if (!std::isfinite(x)) throw InvalidArgument("metric '" + name + "': samples must be finite");
    }
  } else if (const auto* p = std::get_if<Proportion>(&v)) {
    if (p->trials < 1 || p->successes < 0 || p->successes > p->trials) {
      throw InvalidArgument("metric '" + name + "': proportion needs trials >= successes >= 0 and trials >= 1");
    }
  } else if (!std::isfinite(std::get<Scalar>(v).value)) {
    throw InvalidArgument("metric '" + name + "': scalar must be finite");
  }
}

/// Point estimate used for ranking.
inline double metric_mean(const MetricValue& v) {
  if (const auto* s = std::get_if<Scalar>(&v)) return s->value;
  if (const auto* s = std::get_if<Samples>(&v)) {
    double sum = 0.0;
    for (double x : s->values) sum += x;
    return sum / static_cast<double>(s->values.size());
  }
  const auto& p = std::get<Proportion>(v);
  return static_cast<double>(p.successes) / static_cast<double>(p.trials);
}

inline std::int64_t metric_n(const MetricValue& v) {
  if (const auto* s = std::get_if<Samples>(&v)) return static_cast<std::int64_t>(s->values.size());
  if (const auto* p = std::get_if<Proportion>(&v)) return p->trials;
  return 1;
}

inline Json to_json(const MetricValue& v) {
  if (const auto* s = std::get_if<Scalar>(&v)) return s->value;
  if (const auto* s = std::get_if<Samples>(&v)) return s->values;
  const auto& p = std::get<Proportion>(v);
  return {{"successes", p.successes}, {"trials", p.trials}};
}

inline MetricValue metric_from_json(const std::string& name, const Json& j) {
  MetricValue v;
  if (j.is_number()) {
    v = Scalar{j.get<double>()};
  } else if (j.is_array()) {
    Samples s;
    for (const auto& x : j) {
      if (!x.is_number()) throw InvalidArgument("metric '" + name + "': samples must be numbers");
      s.values.push_back(x.get<double>());
    }
    v = std::move(s);
  } else if (j.is_object() && j.size() == 2 && j.contains("successes") && j.contains("trials") &&
             j.at("successes").is_number_integer() && j.at("trials").is_number_integer()) {
    v = Proportion{j.at("successes").get<std::int64_t>(), j.at("trials").get<std::int64_t>()};
  } else {
    throw InvalidArgument("metric '" + name + "' must be a number, an array of numbers, or {successes, trials}");
  }
  validate_metric(name, v);
  return v;
}

/// Fields a caller supplies when logging a run; the registry assigns
/// version and created_at.
struct ModelDraft {
  std::vector<std::int64_t> parent_versions;
  std::map<std::string, std::string> params;
  std::vector<std::string> feature_inputs;
  std::map<std::string, MetricValue> metrics;
  std::map<std::string, std::string> tags;
};

struct ModelVersion {
  std::string model_name;
  std::int64_t version = 0;
  std::vector<std::int64_t> parent_versions;
  std::map<std::string, std::string> params;
  std::vector<std::string> feature_inputs;
  std::map<std::string, MetricValue> metrics;
  std::map<std::string, std::string> tags;
  std::string created_at;

  bool operator==(const ModelVersion&) const = default;
};

inline Json to_json(const ModelVersion& v) {
  Json metrics = Json::object();
  for (const auto& [name, value] : v.metrics) metrics[name] = to_json(value);
  return {{"model_name", v.model_name},   {"version", v.version},   {"parent_versions", v.parent_versions},
          {"params", v.params},           {"feature_inputs", v.feature_inputs},
          {"metrics", metrics},           {"tags", v.tags},         {"created_at", v.created_at}};
}

namespace detail {

inline std::map<std::string, std::string> string_map(const Json& j, const char* field) {
  if (!j.is_object()) throw InvalidArgument(std::string("'") + field + "' must be an object of strings");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw InvalidArgument(std::string("'") + field + "." + k + "' must be a string");
    out[k] = v.get<std::string>();
  }
  return out;
}

}  // namespace detail

/// Parses a draft body. Unknown fields, including version and created_at,
/// are rejected.
inline ModelDraft draft_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("model version draft must be a JSON object");
  ModelDraft d;
  for (const auto& [key, value] : j.items()) {
    if (key == "parent_versions") {
      if (!value.is_array()) throw InvalidArgument("'parent_versions' must be an array of integers");
      for (const auto& p : value) {
        if (!p.is_number_integer()) throw InvalidArgument("'parent_versions' must be an array of integers");
        d.parent_versions.push_back(p.get<std::int64_t>());
      }
    } else if (key == "params") {
      d.params = detail::string_map(value, "params");
    } else if (key == "tags") {
      d.tags = detail::string_map(value, "tags");
    } else if (key == "feature_inputs") {
      if (!value.is_array()) throw InvalidArgument("'feature_inputs' must be an array of strings");
      for (const auto& f : value) {
        if (!f.is_string()) throw InvalidArgument("'feature_inputs' must be an array of strings");
        d.feature_inputs.push_back(f.get<std::string>());
      }
    } else if (key == "metrics") {
      if (!value.is_object()) throw InvalidArgument("'metrics' must be an object");
      for (const auto& [name, m] : value.items()) d.metrics.emplace(name, metric_from_json(name, m));
    } else if (key == "model_name") {
      // Accepted for symmetry with the stored document; the caller checks it.
    } else {
      throw InvalidArgument("unknown model version field '" + key + "'");
    }
  }
  return d;
}

inline ModelVersion version_from_json(const Json& j) {
  try {
    ModelVersion v;
    v.model_name = j.at("model_name").get<std::string>();
    v.version = j.at("version").get<std::int64_t>();
    v.created_at = j.at("created_at").get<std::string>();
    Json rest = j;
    rest.erase("version");
    rest.erase("created_at");
    auto draft = draft_from_json(rest);
    v.parent_versions = std::move(draft.parent_versions);
    v.params = std::move(draft.params);
    v.feature_inputs = std::move(draft.feature_inputs);
    v.metrics = std::move(draft.metrics);
    v.tags = std::move(draft.tags);
    return v;
  } catch (const Json::exception& e) {
    throw CorruptError(std::string("malformed model version document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw CorruptError(std::string("malformed model version document: ") + e.what());
  }
}

enum class Direction { Max, Min };

inline std::string_view to_string(Direction d) { return d == Direction::Max ? "max" : "min"; }

inline std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "max") return Direction::Max;
  if (s == "min") return Direction::Min;
  return std::nullopt;
}

struct LineageGraph {
  std::string model_name;
  std::vector<std::int64_t> nodes;  // ascending = topological order
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;  // (parent, child)
};

inline Json to_json(const LineageGraph& g) {
  Json edges = Json::array();
  for (const auto& [p, c] : g.edges) edges.push_back({p, c});
  return {{"model_name", g.model_name}, {"nodes", g.nodes}, {"edges", edges}};
}

struct PairwiseTest {
  std::int64_t a = 0;
  std::int64_t b = 0;
  TestResult result;
};

struct ExperimentComparison {
  std::string model_name;
  std::string metric;
  Direction direction = Direction::Max;
  std::vector<std::int64_t> versions;
  std::map<std::int64_t, std::pair<double, std::int64_t>> per_version;  // version -> (mean, n)
  std::vector<PairwiseTest> pairwise;
  double alpha_adjusted = 0.0;
  std::optional<std::int64_t> winner;
  std::optional<std::int64_t> runner_up;
  bool significant = false;
};

inline Json to_json(const TestResult& r) {
  auto finite = [](double v) { return std::isinf(v) ? (v > 0 ? kInfiniteStatistic : -kInfiniteStatistic) : v; };
  Json doc = {{"statistic", finite(r.statistic)},
              {"p_value", r.p_value},
              {"method", std::string(to_string(r.method))}};
  if (r.df) doc["df"] = *r.df;
  return doc;
}

inline Json to_json(const ExperimentComparison& c) {
  Json per = Json::object();
  for (const auto& [v, mn] : c.per_version) per[std::to_string(v)] = {{"mean", mn.first}, {"n", mn.second}};
  Json pairs = Json::array();
  for (const auto& p : c.pairwise) {
    Json entry = to_json(p.result);
    entry["a"] = p.a;
    entry["b"] = p.b;
    pairs.push_back(std::move(entry));
  }
  return {{"model_name", c.model_name},
          {"metric", c.metric},
          {"direction", std::string(to_string(c.direction))},
          {"versions", c.versions},
          {"per_version", per},
          {"pairwise", pairs},
          {"alpha_adjusted", c.alpha_adjusted},
          {"winner", c.winner ? Json(*c.winner) : Json(nullptr)},
          {"runner_up", c.runner_up ? Json(*c.runner_up) : Json(nullptr)},
          {"significant", c.significant}};
}

namespace detail {

// Orders candidates best-first: better mean under the direction, ties to
// the lower version.
inline void rank(std::vector<std::pair<std::int64_t, double>>& candidates, Direction dir) {
  std::stable_sort(candidates.begin(), candidates.end(), [dir](const auto& x, const auto& y) {
    if (x.second != y.second) return dir == Direction::Max ? x.second > y.second : x.second < y.second;
    return x.first < y.first;
  });
}

inline void validate_model_name(std::string_view name) {
  if (name.empty()) throw InvalidArgument("model name must be non-empty");
  if (name == "." || name == "..") throw InvalidArgument("invalid model name '" + std::string(name) + "'");
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) throw InvalidArgument("model name may only contain letters, digits, '_', '-' and '.'");
  }
}

}  // namespace detail

/// File-backed model registry: registry/<model>/versions/<n>.json. Writers
/// for one model are serialized through a lock file, so concurrent loggers
/// (threads or processes) never share a version number.
class Registry {
 public:
  explicit Registry(fs::path store_root) : root_(std::move(store_root) / "registry") {}

  ModelVersion log_version(const std::string& model_name, const ModelDraft& draft) {
    detail::validate_model_name(model_name);
    for (const auto& [name, value] : draft.metrics) validate_metric(name, value);
    std::set<std::int64_t> unique_parents(draft.parent_versions.begin(), draft.parent_versions.end());
    if (unique_parents.size() != draft.parent_versions.size()) {
      throw InvalidArgument("parent_versions contains duplicates");
    }

    FileLock lock(model_dir(model_name) / ".lock");
    const auto existing = version_numbers(model_name);
    for (auto p : draft.parent_versions) {
      if (!std::binary_search(existing.begin(), existing.end(), p)) {
        throw ConflictError("unknown parent version " + std::to_string(p) + " for model '" + model_name + "'");
      }
    }
    ModelVersion v;
    v.model_name = model_name;
    v.version = existing.empty() ? 1 : existing.back() + 1;
    v.parent_versions = draft.parent_versions;
    std::sort(v.parent_versions.begin(), v.parent_versions.end());
    v.params = draft.params;
    v.feature_inputs = draft.feature_inputs;
    v.metrics = draft.metrics;
    v.tags = draft.tags;
    v.created_at = utc_now_iso8601();
    atomic_write_file(version_path(model_name, v.version), canonical_dump(to_json(v)));
    return v;
  }

  /// All versions in ascending order. Throws NotFoundError for an unknown
  /// model and CorruptError when a file breaks an invariant.
  std::vector<ModelVersion> list_versions(const std::string& model_name) const {
    detail::validate_model_name(model_name);
    const auto numbers = version_numbers(model_name);
    if (numbers.empty()) throw NotFoundError("unknown model '" + model_name + "'");
    std::vector<ModelVersion> out;
    out.reserve(numbers.size());
    for (auto n : numbers) out.push_back(load(model_name, n));
    return out;
  }

  ModelVersion get_version(const std::string& model_name, std::int64_t version) const {
    detail::validate_model_name(model_name);
    if (!fs::exists(version_path(model_name, version))) {
      throw NotFoundError("model '" + model_name + "' has no version " + std::to_string(version));
    }
    return load(model_name, version);
  }

  std::vector<std::string> list_models() const {
    std::vector<std::string> out;
    if (!fs::exists(root_)) return out;
    for (const auto& entry : fs::directory_iterator(root_)) {
      if (entry.is_directory()) out.push_back(entry.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  LineageGraph get_lineage(const std::string& model_name) const {
    LineageGraph g;
    g.model_name = model_name;
    for (const auto& v : list_versions(model_name)) {
      g.nodes.push_back(v.version);
      for (auto p : v.parent_versions) g.edges.emplace_back(p, v.version);
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const auto& x, const auto& y) { return std::pair{x.second, x.first} < std::pair{y.second, y.first}; });
    return g;
  }

  /// Pairwise A/B/n comparison of `metric` across `versions` with a
  /// Bonferroni-adjusted alpha. The winner is the best mean; `significant`
  /// reports whether it beats the runner-up at the adjusted level.
  ExperimentComparison compare_versions(const std::string& model_name, const std::string& metric,
                                        const std::vector<std::int64_t>& versions, Direction direction,
                                        const DriftConfig& cfg) const {
    if (versions.size() < 2) throw InvalidArgument("compare needs at least two versions");
    if (std::set<std::int64_t>(versions.begin(), versions.end()).size() != versions.size()) {
      throw InvalidArgument("compare versions must be distinct");
    }
    std::vector<MetricValue> values;
    for (auto v : versions) {
      const auto record = get_version(model_name, v);
      auto it = record.metrics.find(metric);
      if (it == record.metrics.end()) {
        throw InvalidArgument("version " + std::to_string(v) + " has no metric '" + metric + "'");
      }
      values.push_back(it->second);
    }
    const auto shape = values.front().index();
    for (const auto& v : values) {
      if (v.index() != shape) throw InvalidArgument("metric '" + metric + "' has mixed value shapes");
    }

    ExperimentComparison c;
    c.model_name = model_name;
    c.metric = metric;
    c.direction = direction;
    c.versions = versions;
    const std::size_t pairs = versions.size() * (versions.size() - 1) / 2;
    c.alpha_adjusted = cfg.alpha / static_cast<double>(pairs);

    std::vector<std::pair<std::int64_t, double>> ranked;
    for (std::size_t i = 0; i < versions.size(); ++i) {
      const double mean = metric_mean(values[i]);
      c.per_version[versions[i]] = {mean, metric_n(values[i])};
      ranked.emplace_back(versions[i], mean);
    }

    if (!std::holds_alternative<Scalar>(values.front())) {
      for (std::size_t i = 0; i < versions.size(); ++i) {
        for (std::size_t j = i + 1; j < versions.size(); ++j) {
          c.pairwise.push_back(PairwiseTest{versions[i], versions[j], run_test(values[i], values[j])});
        }
      }
    }

    detail::rank(ranked, direction);
    c.winner = ranked[0].first;
    c.runner_up = ranked[1].first;
    for (const auto& p : c.pairwise) {
      if ((p.a == *c.winner && p.b == *c.runner_up) || (p.a == *c.runner_up && p.b == *c.winner)) {
        c.significant = p.result.p_value < c.alpha_adjusted;
      }
    }
    return c;
  }

  /// Version with the best mean `metric` among all versions carrying it;
  /// ties go to the lowest version.
  std::int64_t best_version(const std::string& model_name, const std::string& metric, Direction direction) const {
    std::vector<std::pair<std::int64_t, double>> ranked;
    for (const auto& v : list_versions(model_name)) {
      if (auto it = v.metrics.find(metric); it != v.metrics.end()) {
        ranked.emplace_back(v.version, metric_mean(it->second));
      }
    }
    if (ranked.empty()) throw InvalidArgument("no version of '" + model_name + "' has metric '" + metric + "'");
    detail::rank(ranked, direction);
    return ranked.front().first;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path model_dir(const std::string& model) const { return root_ / model; }

  fs::path version_path(const std::string& model, std::int64_t version) const {
    return model_dir(model) / "versions" / (std::to_string(version) + ".json");
  }

  std::vector<std::int64_t> version_numbers(const std::string& model) const {
    std::vector<std::int64_t> out;
    const fs::path dir = model_dir(model) / "versions";
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.empty() || name.front() == '.' || entry.path().extension() != ".json") continue;
      const auto stem = entry.path().stem().string();
      std::int64_t n = 0;
      auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), n);
      if (ec == std::errc{} && ptr == stem.data() + stem.size() && n >= 1) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  ModelVersion load(const std::string& model, std::int64_t version) const {
    const auto text = read_file(version_path(model, version));
    Json j;
    try {
      j = parse_json(text);
    } catch (const ParseError& e) {
      throw CorruptError("model version file is not JSON: " + std::string(e.what()));
    }
    auto v = version_from_json(j);
    if (v.model_name != model || v.version != version) {
      throw CorruptError("model version file " + version_path(model, version).string() +
                         " does not match its location");
    }
    for (auto p : v.parent_versions) {
      if (p < 1 || p >= v.version) {
        throw CorruptError("model '" + model + "' version " + std::to_string(version) +
                           " has a parent that is not older than itself");
      }
    }
    return v;
  }

  static TestResult run_test(const MetricValue& a, const MetricValue& b) {
    if (const auto* sa = std::get_if<Samples>(&a)) {
      const auto& sb = std::get<Samples>(b);
      if (sa->values.size() < 2 || sb.values.size() < 2) {
        throw InvalidArgument("welch t-test needs at least 2 samples per version");
      }
      return welch_t_test(sa->values, sb.values);
    }
    const auto& pa = std::get<Proportion>(a);
    const auto& pb = std::get<Proportion>(b);
    return two_proportion_test(pa.successes, pa.trials, pb.successes, pb.trials);
  }

  fs::path root_;
};

struct DegradationFinding {
  std::int64_t version = 0;
  double baseline = 0.0;
  double value = 0.0;
  double relative_change = 0.0;
};

inline Json to_json(const DegradationFinding& f) {
  return {{"version", f.version}, {"baseline", f.baseline}, {"value", f.value}, {"relative_change", f.relative_change}};
}

/// Flags every entry after the first whose metric moved in the adverse
/// direction by more than cfg.degradation_tolerance relative to the first.
inline std::vector<DegradationFinding> detect_metric_degradation(
    const std::vector<std::pair<std::int64_t, double>>& history, const DriftConfig& cfg,
    Direction direction = Direction::Max) {
  if (history.empty()) throw InvalidArgument("metric history is empty");
  std::vector<DegradationFinding> out;
  const double base = history.front().second;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& [version, value] = history[i];
    const bool adverse = direction == Direction::Max ? value < base : value > base;
    const double change = relative_change(base, value);
    if (adverse && change > cfg.degradation_tolerance) out.push_back({version, base, value, change});
  }
  return out;
}

}  // namespace driftwatch
