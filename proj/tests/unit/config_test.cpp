#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "driftwatch/config.hpp"
#include "test_util.hpp"

namespace driftwatch {
namespace {

TEST(Config, AbsentSourceYieldsDefaults) {
  const auto cfg = load_config();
  EXPECT_EQ(cfg.categorical_distinct_cap, 20);
  EXPECT_DOUBLE_EQ(cfg.categorical_ratio, 0.05);
  EXPECT_DOUBLE_EQ(cfg.numeric_parse_ratio, 0.99);
  EXPECT_EQ(cfg.histogram_bins, 10);
  EXPECT_DOUBLE_EQ(cfg.psi_warn, 0.10);
  EXPECT_DOUBLE_EQ(cfg.psi_alert, 0.25);
  EXPECT_DOUBLE_EQ(cfg.rel_change_warn, 0.10);
  EXPECT_DOUBLE_EQ(cfg.rel_change_alert, 0.30);
  EXPECT_DOUBLE_EQ(cfg.missing_rate_delta_alert, 0.05);
  EXPECT_DOUBLE_EQ(cfg.overall_drift_accepted_pct, 20.0);
  EXPECT_DOUBLE_EQ(cfg.psi_smoothing_eps, 1e-4);
  EXPECT_DOUBLE_EQ(cfg.alpha, 0.05);
  EXPECT_DOUBLE_EQ(cfg.degradation_tolerance, 0.10);
  EXPECT_FALSE(cfg.notify_url.has_value());
  EXPECT_EQ(cfg.top_k_categories, 20);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, SingleKeyOverlay) {
  const auto cfg = load_config(R"({"psi_alert":0.5})");
  DriftConfig expected;
  expected.psi_alert = 0.5;
  EXPECT_EQ(cfg, expected);
}

TEST(Config, WarnAboveAlertIsRejected) {
  try {
    load_config(R"({"psi_warn":0.4,"psi_alert":0.2})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("psi_warn > psi_alert"), std::string::npos);
  }
}

TEST(Config, UnknownKeyNamesTheKey) {
  try {
    load_config(R"({"psi_alrt":0.5})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("psi_alrt"), std::string::npos);
  }
}

TEST(Config, OutOfRangeNamesKeyAndRange) {
  try {
    load_config(R"({"alpha":1.5})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpha"), std::string::npos);
    EXPECT_NE(msg.find("(0, 1)"), std::string::npos);
  }
}

TEST(Config, MalformedJsonReportsLineAndColumn) {
  try {
    load_config("{\n  \"psi_alert\": 0.5,\n  oops\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
  }
}

TEST(Config, NonObjectAndWrongTypesAreRejected) {
  EXPECT_THROW(load_config("[1,2]"), ConfigError);
  EXPECT_THROW(load_config(R"({"histogram_bins":2.5})"), ConfigError);
  EXPECT_THROW(load_config(R"({"psi_warn":"high"})"), ConfigError);
  EXPECT_THROW(load_config(R"({"feature_kinds":{"a":"date"}})"), ConfigError);
}

TEST(Config, FeatureKindOverridesParse) {
  const auto cfg = load_config(R"({"feature_kinds":{"zip":"categorical","notes":"text"}})");
  ASSERT_EQ(cfg.feature_kinds.size(), 2u);
  EXPECT_EQ(cfg.feature_kinds.at("zip"), FeatureKind::Categorical);
  EXPECT_EQ(cfg.feature_kinds.at("notes"), FeatureKind::Text);
}

TEST(MergeOverrides, EmptyIsIdentity) {
  const DriftConfig defaults;
  EXPECT_EQ(merge_overrides(defaults, Json::object()), defaults);
}

TEST(MergeOverrides, SingleOverlayLeavesInputUntouched) {
  const DriftConfig defaults;
  const auto merged = merge_overrides(defaults, Json{{"histogram_bins", 5}});
  EXPECT_EQ(merged.histogram_bins, 5);
  EXPECT_EQ(defaults.histogram_bins, 10);
}

TEST(MergeOverrides, ZeroBinsIsARangeError) {
  EXPECT_THROW(merge_overrides(DriftConfig{}, Json{{"histogram_bins", 0}}), ConfigError);
}

TEST(MergeOverrides, IsIdempotent) {
  const Json overrides = {{"psi_warn", 0.2}, {"top_k_categories", 7}, {"notify_url", "http://x/y"}};
  const auto once = merge_overrides(DriftConfig{}, overrides);
  EXPECT_EQ(merge_overrides(once, overrides), once);
}

TEST(ConfigProperty, SerializeLoadRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    DriftConfig c;
    c.categorical_distinct_cap = 1 + static_cast<std::int64_t>(rng() % 500);
    c.categorical_ratio = unit(rng);
    c.numeric_parse_ratio = unit(rng);
    c.histogram_bins = 1 + static_cast<std::int64_t>(rng() % 50);
    c.psi_warn = unit(rng);
    c.psi_alert = c.psi_warn + unit(rng);
    c.rel_change_warn = unit(rng);
    c.rel_change_alert = c.rel_change_warn + unit(rng);
    c.missing_rate_delta_alert = unit(rng);
    c.overall_drift_accepted_pct = 100.0 * unit(rng);
    c.psi_smoothing_eps = 1e-9 + unit(rng) * 0.01;
    c.alpha = 0.001 + unit(rng) * 0.5;
    c.degradation_tolerance = unit(rng);
    if (i % 2 == 0) c.notify_url = "http://127.0.0.1:9/hook" + std::to_string(i);
    c.top_k_categories = 1 + static_cast<std::int64_t>(rng() % 100);
    if (i % 3 == 0) c.feature_kinds["f" + std::to_string(i)] = FeatureKind::Numerical;
    validate(c);
    EXPECT_EQ(load_config(canonical_dump(to_json(c))), c);
  }
}

TEST(ConfigFile, ExplicitPathThenEnvThenDefaults) {
  testing::TempDir dir;
  const auto explicit_path = dir.path() / "a.json";
  const auto env_path = dir.path() / "b.json";
  std::ofstream(explicit_path) << R"({"histogram_bins":4})";
  std::ofstream(env_path) << R"({"histogram_bins":6})";

  ::unsetenv("DRIFTWATCH_CONFIG");
  EXPECT_EQ(load_config_file(std::nullopt).histogram_bins, 10);
  ::setenv("DRIFTWATCH_CONFIG", env_path.c_str(), 1);
  EXPECT_EQ(load_config_file(std::nullopt).histogram_bins, 6);
  EXPECT_EQ(load_config_file(explicit_path).histogram_bins, 4);
  ::unsetenv("DRIFTWATCH_CONFIG");
}

}  // namespace
}  // namespace driftwatch
