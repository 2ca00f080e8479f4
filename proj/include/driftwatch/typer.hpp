#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "driftwatch/config.hpp"
#include "driftwatch/feature_kind.hpp"
#include "driftwatch/ingest.hpp"

namespace driftwatch {

/// Feature name → kind, in table column order.
using FeatureKindMap = std::vector<std::pair<std::string, FeatureKind>>;

/// Strict decimal parser: optional sign, digits with an optional decimal
/// point, optional exponent. No whitespace, thousands separators, hex,
/// inf or nan. Returns nullopt for anything else or a non-finite result.
inline std::optional<double> parse_number(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < n && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  if (i < n && s[i] == '.') {
    ++i;
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  }
  if (digits == 0) return std::nullopt;
  if (i < n && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < n && s[i] >= '0' && s[i] <= '9') ++i, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
  }
  if (i != n) return std::nullopt;

  std::string_view body = s;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/// Numeric value of a cell: Numbers as-is, Text when it parses strictly.
inline std::optional<double> cell_number(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* s = std::get_if<std::string>(&c)) return parse_number(*s);
  return std::nullopt;
}

/// String identity of a non-missing cell, used for distinct counts and
/// category labels.
inline std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return {};
}

inline FeatureKind infer_kind(std::span<const Cell> column, const DriftConfig& cfg) {
  std::size_t present = 0;
  std::size_t numeric = 0;
  std::unordered_set<std::string> distinct;
  for (const auto& cell : column) {
    if (is_missing(cell)) continue;
    ++present;
    if (cell_number(cell)) ++numeric;
    distinct.insert(cell_text(cell));
  }
  if (present == 0) return FeatureKind::Text;

  const double r = static_cast<double>(present);
  const double d = static_cast<double>(distinct.size());
  const bool numeric_candidate = static_cast<double>(numeric) / r >= cfg.numeric_parse_ratio;
  const bool categorical = distinct.size() <= static_cast<std::size_t>(cfg.categorical_distinct_cap) ||
                           d / r <= cfg.categorical_ratio;
  if (categorical) return FeatureKind::Categorical;
  return numeric_candidate ? FeatureKind::Numerical : FeatureKind::Text;
}

/// Kind per column in column order; `feature_kinds` overrides in the
/// config win over inference.
inline FeatureKindMap categorize_features(const Table& table, const DriftConfig& cfg) {
  FeatureKindMap kinds;
  kinds.reserve(table.columns().size());
  for (const auto& col : table.columns()) {
    if (auto it = cfg.feature_kinds.find(col.name); it != cfg.feature_kinds.end()) {
      kinds.emplace_back(col.name, it->second);
    } else {
      kinds.emplace_back(col.name, infer_kind(col.values, cfg));
    }
  }
  return kinds;
}

}  // namespace driftwatch
