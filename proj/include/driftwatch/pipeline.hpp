#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "driftwatch/benchmark.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/summarizer.hpp"
#include "driftwatch/typer.hpp"

namespace driftwatch {

// The end-to-end flows shared by the CLI and the server, so both produce
// the same documents for the same inputs.

inline DatasetSummary profile_table(const Table& table, const DriftConfig& cfg,
                                    std::optional<std::string> name = std::nullopt) {
  auto summary = summarize(table, categorize_features(table, cfg), cfg);
  summary.name = std::move(name);
  return summary;
}

inline DatasetSummary profile_bytes(std::string_view bytes, DataFormat format, const DriftConfig& cfg,
                                    std::optional<std::string> name = std::nullopt) {
  return profile_table(read_table(bytes, format), cfg, std::move(name));
}

/// Types and summarizes the current batch with the baseline as binning
/// reference, then benchmarks it.
inline DriftReport validate_table(const DatasetSummary& baseline, const Table& current, const DriftConfig& cfg) {
  const auto current_summary = summarize(current, categorize_features(current, cfg), cfg, &baseline);
  return compare(baseline, current_summary, cfg);
}

inline DriftReport validate_bytes(const DatasetSummary& baseline, std::string_view bytes, DataFormat format,
                                  const DriftConfig& cfg) {
  return validate_table(baseline, read_table(bytes, format), cfg);
}

}  // namespace driftwatch
