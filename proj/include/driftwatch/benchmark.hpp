#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftwatch/canonical.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/summarizer.hpp"

namespace driftwatch {

enum class Check {
  Psi,
  MeanRelChange,
  StddevRelChange,
  MissingRateDelta,
  MissingColumn,
  NewColumn,
  KindChanged,
  NewCategories,
};

enum class Status { Ok, Warn, Alert };

enum class Verdict { Pass, Fail };

inline std::string_view to_string(Check c) {
  switch (c) {
    case Check::Psi:
      return "psi";
    case Check::MeanRelChange:
      return "mean_rel_change";
    case Check::StddevRelChange:
      return "stddev_rel_change";
    case Check::MissingRateDelta:
      return "missing_rate_delta";
    case Check::MissingColumn:
      return "missing_column";
    case Check::NewColumn:
      return "new_column";
    case Check::KindChanged:
      return "kind_changed";
    case Check::NewCategories:
      return "new_categories";
  }
  return "psi";
}

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Ok:
      return "ok";
    case Status::Warn:
      return "warn";
    case Status::Alert:
      return "alert";
  }
  return "ok";
}

inline std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "pass" : "fail"; }

inline bool is_schema_check(Check c) {
  return c == Check::MissingColumn || c == Check::NewColumn || c == Check::KindChanged ||
         c == Check::NewCategories;
}

using FindingValue = std::variant<double, std::string>;

struct DriftFinding {
  std::string feature;
  Check check = Check::Psi;
  FindingValue baseline_value = 0.0;
  FindingValue current_value = 0.0;
  double score = 0.0;
  Status status = Status::Ok;

  bool operator==(const DriftFinding&) const = default;
};

struct DriftReport {
  std::string report_id;
  std::string baseline_id;
  std::string current_summary_id;
  std::vector<DriftFinding> findings;
  std::int64_t checks_total = 0;
  std::int64_t alerts_total = 0;
  std::int64_t warns_total = 0;
  double overall_drift_pct = 0.0;
  // The accepted budget the verdict was judged against.
  double drift_budget_pct = 0.0;
  Verdict verdict = Verdict::Pass;
  std::string created_at;

  bool operator==(const DriftReport&) const = default;
};

/// Population stability index of two count vectors over the same bins.
/// Proportions of zero are floored at eps and each side renormalized, so
/// psi(p, p) == 0 and psi(p, q) == psi(q, p).
inline double psi(std::span<const std::int64_t> p_counts, std::span<const std::int64_t> q_counts, double eps) {
  if (p_counts.size() != q_counts.size()) throw InvalidArgument("psi: bin count mismatch");
  if (p_counts.empty()) throw InvalidArgument("psi: no bins");
  if (!(eps > 0.0)) throw InvalidArgument("psi: eps must be positive");
  auto proportions = [eps](std::span<const std::int64_t> counts) {
    std::int64_t total = 0;
    for (auto c : counts) {
      if (c < 0) throw InvalidArgument("psi: negative count");
      total += c;
    }
    if (total == 0) throw InvalidArgument("psi: zero total count");
    std::vector<double> out(counts.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double v = static_cast<double>(counts[i]) / static_cast<double>(total);
      out[i] = v == 0.0 ? eps : v;
      norm += out[i];
    }
    for (auto& v : out) v /= norm;
    return out;
  };
  const auto p = proportions(p_counts);
  const auto q = proportions(q_counts);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // ln p - ln q rather than ln(p/q) keeps psi(p, q) == psi(q, p) exactly.
    if (p[i] != q[i]) sum += (p[i] - q[i]) * (std::log(p[i]) - std::log(q[i]));
  }
  return sum;
}

inline double relative_change(double base, double cur) {
  return std::abs(cur - base) / std::max(std::abs(base), 1e-12);
}

inline Status band(double score, double warn, double alert) {
  if (score < warn) return Status::Ok;
  if (score < alert) return Status::Warn;
  return Status::Alert;
}

namespace detail {

inline DriftFinding schema_finding(std::string feature, Check check, FindingValue base, FindingValue cur,
                                   double score, Status status) {
  return DriftFinding{std::move(feature), check, std::move(base), std::move(cur), score, status};
}

inline std::string kind_name(FeatureKind k) { return std::string(to_string(k)); }

}  // namespace detail

/// Schema-level differences: dropped columns (alert), added columns
/// (warn), kind flips (alert) and categories unseen in the baseline (warn).
inline std::vector<DriftFinding> schema_diff(const DatasetSummary& base, const DatasetSummary& cur) {
  std::vector<DriftFinding> out;
  for (const auto& [name, kind] : base.schema) {
    if (!cur.features.contains(name)) {
      out.push_back(detail::schema_finding(name, Check::MissingColumn, detail::kind_name(kind),
                                           std::string("absent"), 1.0, Status::Alert));
    }
  }
  for (const auto& [name, kind] : cur.schema) {
    auto it = base.features.find(name);
    if (it == base.features.end()) {
      out.push_back(detail::schema_finding(name, Check::NewColumn, std::string("absent"),
                                           detail::kind_name(kind), 1.0, Status::Warn));
      continue;
    }
    const FeatureKind base_kind = kind_of(it->second);
    if (base_kind != kind) {
      out.push_back(detail::schema_finding(name, Check::KindChanged, detail::kind_name(base_kind),
                                           detail::kind_name(kind), 1.0, Status::Alert));
      continue;
    }
    if (kind == FeatureKind::Categorical) {
      const auto& b = std::get<CategoricalSummary>(it->second);
      const auto& c = std::get<CategoricalSummary>(cur.features.at(name));
      std::string unseen;
      std::int64_t n = 0;
      for (const auto& [value, _] : c.frequencies) {
        if (!b.frequencies.contains(value)) {
          if (n++ > 0) unseen += ",";
          unseen += value;
        }
      }
      if (n > 0) {
        out.push_back(detail::schema_finding(name, Check::NewCategories, static_cast<double>(b.cardinality),
                                             unseen, static_cast<double>(n), Status::Warn));
      }
    }
  }
  return out;
}

namespace detail {

inline double missing_rate(const FeatureSummary& fs, std::int64_t records) {
  return records == 0 ? 0.0 : static_cast<double>(missing_count(fs)) / static_cast<double>(records);
}

inline DriftFinding missing_rate_finding(const std::string& name, const FeatureSummary& b, std::int64_t b_records,
                                         const FeatureSummary& c, std::int64_t c_records, const DriftConfig& cfg) {
  const double br = missing_rate(b, b_records);
  const double cr = missing_rate(c, c_records);
  const double delta = std::abs(cr - br);
  return DriftFinding{name, Check::MissingRateDelta, br, cr, delta,
                      delta > cfg.missing_rate_delta_alert ? Status::Alert : Status::Ok};
}

inline void numeric_checks(const std::string& name, const NumericSummary& b, const NumericSummary& c,
                           const DriftConfig& cfg, std::vector<DriftFinding>& out) {
  if (b.count == 0 || c.count == 0) return;
  if (b.hist_edges != c.hist_edges || b.hist_counts.size() != c.hist_counts.size()) {
    throw InvalidArgument("feature '" + name +
                          "': current histogram does not use the baseline bins; re-bin the current data "
                          "against the baseline edges before comparing");
  }
  const double score = psi(b.hist_counts, c.hist_counts, cfg.psi_smoothing_eps);
  out.push_back(DriftFinding{name, Check::Psi, static_cast<double>(b.count), static_cast<double>(c.count),
                             score, band(score, cfg.psi_warn, cfg.psi_alert)});
  const double mean_change = relative_change(*b.mean, *c.mean);
  out.push_back(DriftFinding{name, Check::MeanRelChange, *b.mean, *c.mean, mean_change,
                             band(mean_change, cfg.rel_change_warn, cfg.rel_change_alert)});
  const double sd_change = relative_change(*b.stddev, *c.stddev);
  out.push_back(DriftFinding{name, Check::StddevRelChange, *b.stddev, *c.stddev, sd_change,
                             band(sd_change, cfg.rel_change_warn, cfg.rel_change_alert)});
}

// PSI over the baseline's tabulated categories plus one "other" bucket
// holding everything else on each side.
inline void categorical_checks(const std::string& name, const CategoricalSummary& b, const CategoricalSummary& c,
                               const DriftConfig& cfg, std::vector<DriftFinding>& out) {
  if (b.count == 0 || c.count == 0) return;
  std::vector<std::int64_t> p;
  std::vector<std::int64_t> q;
  std::int64_t c_listed = 0;
  for (const auto& [value, count] : b.frequencies) {
    p.push_back(count);
    auto it = c.frequencies.find(value);
    const std::int64_t cc = it == c.frequencies.end() ? 0 : it->second;
    q.push_back(cc);
    c_listed += cc;
  }
  p.push_back(b.other_count);
  q.push_back(c.count - c_listed);
  const double score = psi(p, q, cfg.psi_smoothing_eps);
  out.push_back(DriftFinding{name, Check::Psi, static_cast<double>(b.count), static_cast<double>(c.count),
                             score, band(score, cfg.psi_warn, cfg.psi_alert)});
}

inline void sort_findings(std::vector<DriftFinding>& findings) {
  std::stable_sort(findings.begin(), findings.end(), [](const DriftFinding& a, const DriftFinding& b) {
    if (a.feature != b.feature) return a.feature < b.feature;
    return to_string(a.check) < to_string(b.check);
  });
}

}  // namespace detail

inline Json to_json(const DriftFinding& f) {
  auto value = [](const FindingValue& v) { return std::visit([](const auto& x) { return Json(x); }, v); };
  return {{"feature", f.feature},
          {"check", std::string(to_string(f.check))},
          {"baseline_value", value(f.baseline_value)},
          {"current_value", value(f.current_value)},
          {"score", f.score},
          {"status", std::string(to_string(f.status))}};
}

/// Report document minus report_id and created_at; hashed for the id.
inline Json report_identity_document(const DriftReport& r) {
  Json findings = Json::array();
  for (const auto& f : r.findings) findings.push_back(to_json(f));
  return {{"baseline_id", r.baseline_id},
          {"current_summary_id", r.current_summary_id},
          {"findings", findings},
          {"checks_total", r.checks_total},
          {"alerts_total", r.alerts_total},
          {"warns_total", r.warns_total},
          {"overall_drift_pct", r.overall_drift_pct},
          {"drift_budget_pct", r.drift_budget_pct},
          {"verdict", std::string(to_string(r.verdict))}};
}

inline Json to_json(const DriftReport& r) {
  Json doc = report_identity_document(r);
  doc["report_id"] = r.report_id;
  doc["created_at"] = r.created_at;
  return doc;
}

namespace detail {

template <typename E>
E enum_from(const std::string& s, std::initializer_list<E> all) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  throw CorruptError("unknown enum value '" + s + "'");
}

inline FindingValue finding_value_from(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  return j.get<double>();
}

}  // namespace detail

/// Aggregates and verdict. Only non-schema findings count as checks; the
/// verdict fails when the alerting share exceeds the budget (strictly) or a
/// breaking schema change (missing column, kind flip) alerts.
inline void finalize_report(DriftReport& r, double accepted_pct) {
  r.checks_total = r.alerts_total = r.warns_total = 0;
  bool breaking = false;
  for (const auto& f : r.findings) {
    if (is_schema_check(f.check)) {
      if ((f.check == Check::MissingColumn || f.check == Check::KindChanged) && f.status == Status::Alert) {
        breaking = true;
      }
      continue;
    }
    ++r.checks_total;
    if (f.status == Status::Alert) ++r.alerts_total;
    if (f.status == Status::Warn) ++r.warns_total;
  }
  r.overall_drift_pct = r.checks_total > 0
                            ? 100.0 * static_cast<double>(r.alerts_total) / static_cast<double>(r.checks_total)
                            : 0.0;
  r.drift_budget_pct = accepted_pct;
  r.verdict = (r.overall_drift_pct > accepted_pct || breaking) ? Verdict::Fail : Verdict::Pass;
  r.report_id = canonical_hash(report_identity_document(r));
}

inline DriftReport report_from_json(const Json& j) {
  DriftReport r;
  try {
    r.report_id = j.at("report_id").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.baseline_id = j.at("baseline_id").get<std::string>();
    r.current_summary_id = j.at("current_summary_id").get<std::string>();
    for (const auto& f : j.at("findings")) {
      DriftFinding d;
      d.feature = f.at("feature").get<std::string>();
      d.check = detail::enum_from(f.at("check").get<std::string>(),
                                  {Check::Psi, Check::MeanRelChange, Check::StddevRelChange,
                                   Check::MissingRateDelta, Check::MissingColumn, Check::NewColumn,
                                   Check::KindChanged, Check::NewCategories});
      d.baseline_value = detail::finding_value_from(f.at("baseline_value"));
      d.current_value = detail::finding_value_from(f.at("current_value"));
      d.score = f.at("score").get<double>();
      d.status = detail::enum_from(f.at("status").get<std::string>(), {Status::Ok, Status::Warn, Status::Alert});
      r.findings.push_back(std::move(d));
    }
    r.checks_total = j.at("checks_total").get<std::int64_t>();
    r.alerts_total = j.at("alerts_total").get<std::int64_t>();
    r.warns_total = j.at("warns_total").get<std::int64_t>();
    r.overall_drift_pct = j.at("overall_drift_pct").get<double>();
    r.drift_budget_pct = j.at("drift_budget_pct").get<double>();
    r.verdict = detail::enum_from(j.at("verdict").get<std::string>(), {Verdict::Pass, Verdict::Fail});
  } catch (const Json::exception& e) {
    throw CorruptError(std::string("malformed report document: ") + e.what());
  }
  if (canonical_hash(report_identity_document(r)) != r.report_id) {
    throw CorruptError("report_id does not match content");
  }
  return r;
}

/// Benchmarks `cur` against `base`. `cur` must have been summarized with
/// `base` as reference so shared numeric features share bins.
inline DriftReport compare(const DatasetSummary& base, const DatasetSummary& cur, const DriftConfig& cfg) {
  DriftReport r;
  r.baseline_id = base.summary_id;
  r.current_summary_id = cur.summary_id;
  r.findings = schema_diff(base, cur);
  for (const auto& [name, kind] : cur.schema) {
    auto bit = base.features.find(name);
    if (bit == base.features.end()) continue;
    const auto& b = bit->second;
    const auto& c = cur.features.at(name);
    if (kind_of(b) != kind_of(c)) continue;
    switch (kind) {
      case FeatureKind::Numerical:
        detail::numeric_checks(name, std::get<NumericSummary>(b), std::get<NumericSummary>(c), cfg, r.findings);
        break;
      case FeatureKind::Categorical:
        detail::categorical_checks(name, std::get<CategoricalSummary>(b), std::get<CategoricalSummary>(c), cfg,
                                   r.findings);
        break;
      case FeatureKind::Text:
        break;
    }
    r.findings.push_back(detail::missing_rate_finding(name, b, base.record_count, c, cur.record_count, cfg));
  }
  detail::sort_findings(r.findings);
  finalize_report(r, cfg.overall_drift_accepted_pct);
  r.created_at = utc_now_iso8601();
  return r;
}

}  // namespace driftwatch
