#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace driftwatch {

enum class FeatureKind { Numerical, Categorical, Text };

inline std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Numerical:
      return "numerical";
    case FeatureKind::Categorical:
      return "categorical";
    case FeatureKind::Text:
      return "text";
  }
  return "text";
}

inline std::optional<FeatureKind> parse_feature_kind(std::string_view s) {
  if (s == "numerical") return FeatureKind::Numerical;
  if (s == "categorical") return FeatureKind::Categorical;
  if (s == "text") return FeatureKind::Text;
  return std::nullopt;
}

}  // namespace driftwatch
