#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "driftwatch/canonical.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/typer.hpp"

namespace driftwatch {

struct NumericSummary {
  std::int64_t count = 0;
  std::int64_t missing = 0;
  // Absent when count == 0.
  std::optional<double> mean;
  std::optional<double> stddev;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> p25;
  std::optional<double> p50;
  std::optional<double> p75;
  // B+1 edges bracketed by -inf/+inf; empty when count == 0.
  std::vector<double> hist_edges;
  std::vector<std::int64_t> hist_counts;

  bool operator==(const NumericSummary&) const = default;
};

struct CategoricalSummary {
  std::int64_t count = 0;
  std::int64_t missing = 0;
  std::int64_t cardinality = 0;
  std::map<std::string, std::int64_t> frequencies;
  std::int64_t other_count = 0;

  bool operator==(const CategoricalSummary&) const = default;
};

struct TextSummary {
  std::int64_t count = 0;
  std::int64_t missing = 0;
  std::int64_t distinct = 0;
  std::optional<double> mean_length;

  bool operator==(const TextSummary&) const = default;
};

using FeatureSummary = std::variant<NumericSummary, CategoricalSummary, TextSummary>;

inline FeatureKind kind_of(const FeatureSummary& s) {
  switch (s.index()) {
    case 0:
      return FeatureKind::Numerical;
    case 1:
      return FeatureKind::Categorical;
    default:
      return FeatureKind::Text;
  }
}

inline std::int64_t present_count(const FeatureSummary& s) {
  return std::visit([](const auto& v) { return v.count; }, s);
}

inline std::int64_t missing_count(const FeatureSummary& s) {
  return std::visit([](const auto& v) { return v.missing; }, s);
}

/// Profile of one dataset. Serialized canonically this is the stored
/// baseline document.
struct DatasetSummary {
  std::string summary_id;
  std::string created_at;
  std::optional<std::string> name;
  std::int64_t record_count = 0;
  FeatureKindMap schema;
  std::map<std::string, FeatureSummary> features;
  DriftConfig config_used;

  bool operator==(const DatasetSummary&) const = default;
};

/// Linear-interpolation quantile of ascending `values`.
inline double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile fraction must lie in [0, 1]");
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// Bin edges from the sample's own quantiles at i/B, i = 1..B-1. Interior
/// edges at or below the minimum would only bound empty bins, so they are
/// dropped along with duplicates. Bracketed by -inf/+inf.
inline std::vector<double> histogram_edges(std::span<const double> sorted, std::int64_t bins) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> edges{-kInf};
  if (!sorted.empty()) {
    const double lowest = sorted.front();
    for (std::int64_t i = 1; i < bins; ++i) {
      const double e = quantile(sorted, static_cast<double>(i) / static_cast<double>(bins));
      if (e > lowest && e > edges.back()) edges.push_back(e);
    }
  }
  edges.push_back(kInf);
  return edges;
}

/// Counts values into the bins [e_i, e_{i+1}), last bin closed. With the
/// infinite sentinels at both ends every finite value lands in a bin.
inline std::vector<std::int64_t> rebin(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) return {};
  const std::size_t bins = edges.size() - 1;
  std::vector<std::int64_t> counts(bins, 0);
  for (double v : values) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t idx = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    if (idx >= bins) idx = bins - 1;
    ++counts[idx];
  }
  return counts;
}

/// Numeric profile. Cells that do not parse as numbers count as missing.
/// When `reference_edges` is non-empty the histogram uses those edges
/// instead of the column's own deciles.
inline NumericSummary numeric_summary(std::span<const Cell> column, const DriftConfig& cfg,
                                      std::span<const double> reference_edges = {}) {
  std::vector<double> values;
  values.reserve(column.size());
  for (const auto& cell : column) {
    if (auto v = cell_number(cell)) values.push_back(*v);
  }
  // Sorting first makes every statistic independent of row order,
  // including the floating-point summation order.
  std::sort(values.begin(), values.end());

  NumericSummary s;
  s.count = static_cast<std::int64_t>(values.size());
  s.missing = static_cast<std::int64_t>(column.size()) - s.count;
  if (values.empty()) return s;

  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  s.min = values.front();
  s.max = values.back();
  s.p25 = quantile(values, 0.25);
  s.p50 = quantile(values, 0.50);
  s.p75 = quantile(values, 0.75);
  if (reference_edges.size() >= 2) {
    s.hist_edges.assign(reference_edges.begin(), reference_edges.end());
  } else {
    s.hist_edges = histogram_edges(values, cfg.histogram_bins);
  }
  s.hist_counts = rebin(values, s.hist_edges);
  return s;
}

/// Categorical profile: exact cardinality, the top_k most frequent values
/// (ties by value), everything else folded into other_count. Categories of
/// `reference` that occur in the column are always tabulated so a current
/// batch can be compared bucket-for-bucket against a baseline.
inline CategoricalSummary categorical_summary(std::span<const Cell> column, const DriftConfig& cfg,
                                              const CategoricalSummary* reference = nullptr) {
  std::unordered_map<std::string, std::int64_t> counts;
  CategoricalSummary s;
  for (const auto& cell : column) {
    if (is_missing(cell)) {
      ++s.missing;
      continue;
    }
    ++s.count;
    ++counts[cell_text(cell)];
  }
  s.cardinality = static_cast<std::int64_t>(counts.size());

  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const std::size_t keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(cfg.top_k_categories));
  for (std::size_t i = 0; i < keep; ++i) s.frequencies.insert(ranked[i]);
  if (reference != nullptr) {
    for (const auto& [value, _] : reference->frequencies) {
      if (auto it = counts.find(value); it != counts.end()) s.frequencies.emplace(value, it->second);
    }
  }
  std::int64_t listed = 0;
  for (const auto& [_, c] : s.frequencies) listed += c;
  s.other_count = s.count - listed;
  return s;
}

namespace detail {

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace detail

inline TextSummary text_summary(std::span<const Cell> column) {
  TextSummary s;
  std::unordered_set<std::string> distinct;
  std::vector<std::size_t> lengths;
  for (const auto& cell : column) {
    if (is_missing(cell)) {
      ++s.missing;
      continue;
    }
    ++s.count;
    auto text = cell_text(cell);
    lengths.push_back(detail::utf8_length(text));
    distinct.insert(std::move(text));
  }
  s.distinct = static_cast<std::int64_t>(distinct.size());
  if (!lengths.empty()) {
    // Integer total keeps the mean independent of row order.
    std::size_t total = 0;
    for (auto l : lengths) total += l;
    s.mean_length = static_cast<double>(total) / static_cast<double>(lengths.size());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json edge_to_json(double e) {
  if (std::isinf(e)) return e < 0 ? Json("-inf") : Json("inf");
  return Json(e);
}

inline double edge_from_json(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw CorruptError("invalid histogram edge '" + s + "'");
  }
  return j.get<double>();
}

inline std::optional<double> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

inline Json to_json(const FeatureSummary& fs) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NumericSummary>) {
          Json edges = Json::array();
          for (double e : s.hist_edges) edges.push_back(detail::edge_to_json(e));
          Json quantiles = nullptr;
          if (s.p50) quantiles = {{"p25", *s.p25}, {"p50", *s.p50}, {"p75", *s.p75}};
          return {{"kind", "numerical"},
                  {"count", s.count},
                  {"missing", s.missing},
                  {"mean", detail::opt(s.mean)},
                  {"stddev", detail::opt(s.stddev)},
                  {"min", detail::opt(s.min)},
                  {"max", detail::opt(s.max)},
                  {"quantiles", quantiles},
                  {"hist_edges", edges},
                  {"hist_counts", s.hist_counts}};
        } else if constexpr (std::is_same_v<T, CategoricalSummary>) {
          return {{"kind", "categorical"},      {"count", s.count},
                  {"missing", s.missing},       {"cardinality", s.cardinality},
                  {"frequencies", s.frequencies}, {"other_count", s.other_count}};
        } else {
          return {{"kind", "text"},
                  {"count", s.count},
                  {"missing", s.missing},
                  {"distinct", s.distinct},
                  {"mean_length", detail::opt(s.mean_length)}};
        }
      },
      fs);
}

inline FeatureSummary feature_summary_from_json(const Json& j) {
  const auto kind = parse_feature_kind(j.at("kind").get<std::string>());
  if (!kind) throw CorruptError("unknown feature kind");
  switch (*kind) {
    case FeatureKind::Numerical: {
      NumericSummary s;
      s.count = j.at("count").get<std::int64_t>();
      s.missing = j.at("missing").get<std::int64_t>();
      s.mean = detail::opt_from(j, "mean");
      s.stddev = detail::opt_from(j, "stddev");
      s.min = detail::opt_from(j, "min");
      s.max = detail::opt_from(j, "max");
      if (const auto& q = j.at("quantiles"); !q.is_null()) {
        s.p25 = q.at("p25").get<double>();
        s.p50 = q.at("p50").get<double>();
        s.p75 = q.at("p75").get<double>();
      }
      for (const auto& e : j.at("hist_edges")) s.hist_edges.push_back(detail::edge_from_json(e));
      s.hist_counts = j.at("hist_counts").get<std::vector<std::int64_t>>();
      return s;
    }
    case FeatureKind::Categorical: {
      CategoricalSummary s;
      s.count = j.at("count").get<std::int64_t>();
      s.missing = j.at("missing").get<std::int64_t>();
      s.cardinality = j.at("cardinality").get<std::int64_t>();
      s.frequencies = j.at("frequencies").get<std::map<std::string, std::int64_t>>();
      s.other_count = j.at("other_count").get<std::int64_t>();
      return s;
    }
    case FeatureKind::Text: {
      TextSummary s;
      s.count = j.at("count").get<std::int64_t>();
      s.missing = j.at("missing").get<std::int64_t>();
      s.distinct = j.at("distinct").get<std::int64_t>();
      s.mean_length = detail::opt_from(j, "mean_length");
      return s;
    }
  }
  throw CorruptError("unknown feature kind");
}

/// Document hashed for summary_id: everything except the id itself,
/// created_at and the optional display name.
inline Json summary_identity_document(const DatasetSummary& s) {
  Json schema = Json::array();
  for (const auto& [name, kind] : s.schema) {
    schema.push_back({{"name", name}, {"kind", std::string(to_string(kind))}});
  }
  Json features = Json::object();
  for (const auto& [name, fs] : s.features) features[name] = to_json(fs);
  return {{"record_count", s.record_count},
          {"schema", schema},
          {"features", features},
          {"config_used", to_json(s.config_used)}};
}

inline std::string compute_summary_id(const DatasetSummary& s) {
  return canonical_hash(summary_identity_document(s));
}

inline Json to_json(const DatasetSummary& s) {
  Json doc = summary_identity_document(s);
  doc["summary_id"] = s.summary_id;
  doc["created_at"] = s.created_at;
  if (s.name) doc["name"] = *s.name;
  return doc;
}

namespace detail {

inline void check_summary_invariants(const DatasetSummary& s) {
  if (s.schema.size() != s.features.size()) throw CorruptError("summary schema and features differ");
  for (const auto& [name, kind] : s.schema) {
    auto it = s.features.find(name);
    if (it == s.features.end()) throw CorruptError("summary lacks feature '" + name + "'");
    if (kind_of(it->second) != kind) throw CorruptError("summary kind mismatch for '" + name + "'");
    if (present_count(it->second) + missing_count(it->second) != s.record_count) {
      throw CorruptError("summary counts for '" + name + "' do not add up to record_count");
    }
    if (const auto* num = std::get_if<NumericSummary>(&it->second)) {
      std::int64_t total = 0;
      for (auto c : num->hist_counts) total += c;
      if (total != num->count) throw CorruptError("histogram of '" + name + "' does not sum to count");
      if (!num->hist_edges.empty() && num->hist_edges.size() != num->hist_counts.size() + 1) {
        throw CorruptError("histogram of '" + name + "' has inconsistent edges");
      }
    }
  }
}

}  // namespace detail

/// Parses and verifies a stored summary document (id and invariants).
inline DatasetSummary summary_from_json(const Json& j) {
  DatasetSummary s;
  try {
    s.summary_id = j.at("summary_id").get<std::string>();
    s.created_at = j.at("created_at").get<std::string>();
    if (j.contains("name") && !j.at("name").is_null()) s.name = j.at("name").get<std::string>();
    s.record_count = j.at("record_count").get<std::int64_t>();
    for (const auto& entry : j.at("schema")) {
      auto kind = parse_feature_kind(entry.at("kind").get<std::string>());
      if (!kind) throw CorruptError("unknown feature kind in schema");
      s.schema.emplace_back(entry.at("name").get<std::string>(), *kind);
    }
    for (const auto& [name, fs] : j.at("features").items()) {
      s.features.emplace(name, feature_summary_from_json(fs));
    }
    s.config_used = load_config(canonical_dump(j.at("config_used")));
  } catch (const Json::exception& e) {
    throw CorruptError(std::string("malformed summary document: ") + e.what());
  } catch (const ConfigError& e) {
    throw CorruptError(std::string("malformed summary config: ") + e.what());
  }
  detail::check_summary_invariants(s);
  if (compute_summary_id(s) != s.summary_id) throw CorruptError("summary_id does not match content");
  return s;
}

/// Profiles every column by its kind. With a `reference` summary (the
/// baseline), shared numeric features are binned on the reference edges and
/// shared categorical features tabulate the reference categories.
inline DatasetSummary summarize(const Table& table, const FeatureKindMap& kinds, const DriftConfig& cfg,
                                const DatasetSummary* reference = nullptr) {
  if (kinds.size() != table.columns().size()) {
    throw InvalidArgument("feature kinds do not match table columns");
  }
  DatasetSummary out;
  out.record_count = static_cast<std::int64_t>(table.row_count());
  out.schema = kinds;
  out.config_used = cfg;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto& [name, kind] = kinds[i];
    const auto& col = table.columns()[i];
    if (col.name != name) throw InvalidArgument("feature kinds do not match table column '" + col.name + "'");
    const FeatureSummary* ref = nullptr;
    if (reference != nullptr) {
      if (auto it = reference->features.find(name); it != reference->features.end()) ref = &it->second;
    }
    switch (kind) {
      case FeatureKind::Numerical: {
        std::span<const double> edges;
        if (ref != nullptr) {
          if (const auto* n = std::get_if<NumericSummary>(ref)) edges = n->hist_edges;
        }
        out.features.emplace(name, numeric_summary(col.values, cfg, edges));
        break;
      }
      case FeatureKind::Categorical:
        out.features.emplace(name, categorical_summary(col.values, cfg,
                                                       ref ? std::get_if<CategoricalSummary>(ref) : nullptr));
        break;
      case FeatureKind::Text:
        out.features.emplace(name, text_summary(col.values));
        break;
    }
  }
  out.summary_id = compute_summary_id(out);
  out.created_at = utc_now_iso8601();
  return out;
}

}  // namespace driftwatch
