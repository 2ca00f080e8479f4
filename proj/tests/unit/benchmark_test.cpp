#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "driftwatch/benchmark.hpp"
#include "driftwatch/pipeline.hpp"
#include "test_util.hpp"

namespace driftwatch {
namespace {

using testing::number_cells;
using testing::text_cells;

TEST(Psi, IdenticalDistributionsScoreZero) {
  const std::vector<std::int64_t> p{50, 50};
  EXPECT_EQ(psi(p, p, 1e-4), 0.0);
}

TEST(Psi, HandEvaluatedTwoBinCase) {
  // (0.5-0.9)ln(0.5/0.9) + (0.5-0.1)ln(0.5/0.1), no zero bins to smooth.
  const std::vector<std::int64_t> p{5, 5};
  const std::vector<std::int64_t> q{9, 1};
  EXPECT_NEAR(psi(p, q, 1e-12), 0.8788898309344878, 1e-12);
}

TEST(Psi, ZeroBinsAreSmoothed) {
  const std::vector<std::int64_t> p{10, 0};
  const std::vector<std::int64_t> q{0, 10};
  const double v = psi(p, q, 1e-4);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 10.0);
}

TEST(Psi, Errors) {
  EXPECT_THROW(psi(std::vector<std::int64_t>{1, 2}, std::vector<std::int64_t>{1}, 1e-4), InvalidArgument);
  EXPECT_THROW(psi(std::vector<std::int64_t>{0, 0}, std::vector<std::int64_t>{1, 1}, 1e-4), InvalidArgument);
  EXPECT_THROW(psi(std::vector<std::int64_t>{1, 1}, std::vector<std::int64_t>{0, 0}, 1e-4), InvalidArgument);
}

TEST(PsiProperty, SymmetricAndNonNegative) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> bins(1, 20);
  std::uniform_int_distribution<int> count(0, 50);
  for (int i = 0; i < 1000; ++i) {
    const auto b = static_cast<std::size_t>(bins(rng));
    std::vector<std::int64_t> p(b), q(b);
    for (auto& c : p) c = count(rng);
    for (auto& c : q) c = count(rng);
    p[0] += 1;
    q[b - 1] += 1;
    const double pq = psi(p, q, 1e-4);
    EXPECT_EQ(pq, psi(q, p, 1e-4));
    EXPECT_GE(pq, 0.0);
    EXPECT_EQ(psi(p, p, 1e-4), 0.0);
  }
}

TEST(RelativeChange, Examples) {
  EXPECT_NEAR(relative_change(10.0, 12.0), 0.2, 1e-15);
  for (double x : {-3.0, 0.0, 1e-20, 7.5}) EXPECT_EQ(relative_change(x, x), 0.0);
  EXPECT_EQ(relative_change(0.0, 0.0), 0.0);
}

DatasetSummary summary_of(std::vector<Column> cols, std::size_t rows) {
  return profile_table(Table(std::move(cols), rows), DriftConfig{});
}

std::vector<Cell> numbers(std::size_t n, double offset = 0.0) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = offset + static_cast<double>(i);
  return number_cells(xs);
}

TEST(SchemaDiff, DroppedAndAddedColumns) {
  const auto base = summary_of({Column{"a", numbers(50)}, Column{"b", numbers(50)}}, 50);
  const auto cur = summary_of({Column{"b", numbers(50)}, Column{"c", numbers(50)}}, 50);
  const auto findings = schema_diff(base, cur);
  ASSERT_EQ(findings.size(), 2u);
  EXPECT_EQ(findings[0].feature, "a");
  EXPECT_EQ(findings[0].check, Check::MissingColumn);
  EXPECT_EQ(findings[0].status, Status::Alert);
  EXPECT_EQ(findings[1].feature, "c");
  EXPECT_EQ(findings[1].check, Check::NewColumn);
  EXPECT_EQ(findings[1].status, Status::Warn);
}

TEST(SchemaDiff, IdenticalSchemasHaveNoFindings) {
  const auto s = summary_of({Column{"a", numbers(2)}, Column{"k", text_cells({"x", "y"})}}, 2);
  EXPECT_TRUE(schema_diff(s, s).empty());
}

TEST(SchemaDiff, KindFlipIsAnAlert) {
  std::vector<std::string> words;
  for (int i = 0; i < 50; ++i) words.push_back("w" + std::to_string(i));
  const auto base = summary_of({Column{"a", numbers(50)}}, 50);
  const auto cur = summary_of({Column{"a", text_cells(words)}}, 50);
  const auto findings = schema_diff(base, cur);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].check, Check::KindChanged);
  EXPECT_EQ(findings[0].status, Status::Alert);
  EXPECT_EQ(std::get<std::string>(findings[0].baseline_value), "numerical");
  EXPECT_EQ(std::get<std::string>(findings[0].current_value), "text");
}

TEST(SchemaDiff, NewCategoriesWarn) {
  const auto base = summary_of({Column{"k", text_cells({"a", "b", "a"})}}, 3);
  const auto cur = summary_of({Column{"k", text_cells({"a", "z", "a"})}}, 3);
  const auto findings = schema_diff(base, cur);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].check, Check::NewCategories);
  EXPECT_EQ(findings[0].status, Status::Warn);
  EXPECT_EQ(std::get<std::string>(findings[0].current_value), "z");
}

TEST(Compare, SelfComparisonIsClean) {
  std::mt19937_64 rng(21);
  const auto s = profile_table(testing::random_table(rng), DriftConfig{});
  const auto r = compare(s, s, DriftConfig{});
  EXPECT_EQ(r.alerts_total, 0);
  EXPECT_EQ(r.warns_total, 0);
  EXPECT_EQ(r.overall_drift_pct, 0.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  for (const auto& f : r.findings) EXPECT_EQ(f.status, Status::Ok);
}

TEST(FinalizeReport, ExactlyAtBudgetPasses) {
  DriftReport r;
  for (int i = 0; i < 10; ++i) {
    r.findings.push_back(DriftFinding{"f" + std::to_string(i), Check::Psi, 0.0, 0.0, 0.0,
                                      i < 2 ? Status::Alert : Status::Ok});
  }
  finalize_report(r, 20.0);
  EXPECT_EQ(r.checks_total, 10);
  EXPECT_EQ(r.alerts_total, 2);
  EXPECT_DOUBLE_EQ(r.overall_drift_pct, 20.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  r.findings[2].status = Status::Alert;
  finalize_report(r, 20.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
}

TEST(FinalizeReport, BreakingSchemaChangeFailsRegardlessOfBudget) {
  DriftReport r;
  r.findings.push_back(DriftFinding{"gone", Check::MissingColumn, std::string("numerical"), std::string("absent"),
                                    1.0, Status::Alert});
  finalize_report(r, 100.0);
  EXPECT_EQ(r.checks_total, 0);
  EXPECT_EQ(r.overall_drift_pct, 0.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);

  DriftReport additive;
  additive.findings.push_back(
      DriftFinding{"extra", Check::NewColumn, std::string("absent"), std::string("text"), 1.0, Status::Warn});
  finalize_report(additive, 20.0);
  EXPECT_EQ(additive.verdict, Verdict::Pass);
}

TEST(Compare, ShiftedNormalAlertsAndFails) {
  std::mt19937_64 rng(42);
  const auto base_x = testing::normal_sample(rng, 10000, 0.0, 1.0);
  const auto cur_x = testing::normal_sample(rng, 10000, 3.0, 1.0);
  const auto base = profile_table(testing::single_numeric("x", base_x), DriftConfig{});
  const auto r = validate_table(base, testing::single_numeric("x", cur_x), DriftConfig{});
  auto psi_finding = std::find_if(r.findings.begin(), r.findings.end(),
                                  [](const DriftFinding& f) { return f.check == Check::Psi; });
  ASSERT_NE(psi_finding, r.findings.end());
  EXPECT_GT(psi_finding->score, 0.25);
  EXPECT_EQ(psi_finding->status, Status::Alert);
  EXPECT_EQ(r.verdict, Verdict::Fail);
}

TEST(Compare, UnbinnedCurrentSummaryIsRejected) {
  std::mt19937_64 rng(43);
  const auto base = profile_table(testing::single_numeric("x", testing::normal_sample(rng, 500, 0, 1)), DriftConfig{});
  const auto cur = profile_table(testing::single_numeric("x", testing::normal_sample(rng, 500, 1, 1)), DriftConfig{});
  try {
    compare(base, cur, DriftConfig{});
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("re-bin"), std::string::npos);
  }
}

TEST(Compare, CategoricalPsiUsesBaselineBucketsPlusOther) {
  std::vector<std::string> base_vals, cur_vals;
  for (int i = 0; i < 100; ++i) base_vals.push_back(i < 50 ? "a" : (i < 80 ? "b" : "c"));
  for (int i = 0; i < 100; ++i) cur_vals.push_back(i < 20 ? "a" : (i < 40 ? "b" : (i < 60 ? "c" : "d")));
  const auto base = summary_of({Column{"k", text_cells(base_vals)}}, 100);
  const auto r = validate_table(base, Table({Column{"k", text_cells(cur_vals)}}, 100), DriftConfig{});
  auto it = std::find_if(r.findings.begin(), r.findings.end(),
                         [](const DriftFinding& f) { return f.check == Check::Psi; });
  ASSERT_NE(it, r.findings.end());
  // Buckets a, b, c, other: base (.5,.3,.2,0) vs cur (.2,.2,.2,.4); the
  // empty baseline "other" is floored at eps and renormalized.
  const double eps = 1e-4;
  const double norm = 1.0 + eps;
  const double p[] = {0.5 / norm, 0.3 / norm, 0.2 / norm, eps / norm};
  const double q[] = {0.2, 0.2, 0.2, 0.4};
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) expected += (p[i] - q[i]) * std::log(p[i] / q[i]);
  EXPECT_NEAR(it->score, expected, 1e-12);
  EXPECT_EQ(it->status, Status::Alert);
}

TEST(Compare, MissingRateDeltaHasNoWarnBand) {
  std::vector<Cell> base(100, Cell{std::string("w")});
  std::vector<Cell> cur = base;
  for (int i = 0; i < 4; ++i) cur[static_cast<std::size_t>(i)] = Missing{};
  DriftConfig cfg;
  cfg.feature_kinds["t"] = FeatureKind::Text;
  const auto b = profile_table(Table({Column{"t", base}}, 100), cfg);
  auto r = validate_table(b, Table({Column{"t", cur}}, 100), cfg);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].check, Check::MissingRateDelta);
  EXPECT_EQ(r.findings[0].status, Status::Ok);
  for (int i = 4; i < 6; ++i) cur[static_cast<std::size_t>(i)] = Missing{};
  r = validate_table(b, Table({Column{"t", cur}}, 100), cfg);
  EXPECT_EQ(r.findings[0].status, Status::Alert);
}

TEST(CompareProperty, SortedDeterministicAndRecomputable) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = testing::random_table(rng);
    const auto b = testing::random_table(rng);
    const auto base = profile_table(a, DriftConfig{});
    DriftReport r1, r2;
    try {
      r1 = validate_table(base, b, DriftConfig{});
      r2 = validate_table(base, b, DriftConfig{});
    } catch (const InvalidArgument&) {
      FAIL() << "validate_table must bin against the baseline";
    }
    EXPECT_EQ(r1.report_id, r2.report_id);
    EXPECT_TRUE(std::is_sorted(r1.findings.begin(), r1.findings.end(), [](const auto& x, const auto& y) {
      return std::pair{x.feature, std::string(to_string(x.check))} < std::pair{y.feature, std::string(to_string(y.check))};
    }));
    std::int64_t checks = 0, alerts = 0;
    for (const auto& f : r1.findings) {
      if (is_schema_check(f.check)) continue;
      ++checks;
      if (f.status == Status::Alert) ++alerts;
      if (f.check == Check::Psi || f.check == Check::MeanRelChange || f.check == Check::StddevRelChange) {
        EXPECT_GE(f.score, 0.0);
      }
    }
    EXPECT_EQ(r1.checks_total, checks);
    EXPECT_DOUBLE_EQ(r1.overall_drift_pct, checks ? 100.0 * alerts / checks : 0.0);
    EXPECT_EQ(report_from_json(to_json(r1)), r1);
  }
}

TEST(CompareProperty, PsiMonotoneInMeanShift) {
  std::mt19937_64 rng(4242);
  const auto base_x = testing::normal_sample(rng, 10000, 0.0, 1.0);
  const auto noise = testing::normal_sample(rng, 10000, 0.0, 1.0);
  const auto base = profile_table(testing::single_numeric("x", base_x), DriftConfig{});
  double previous = -1.0;
  for (double shift : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    std::vector<double> cur(noise);
    for (auto& v : cur) v += shift;
    const auto r = validate_table(base, testing::single_numeric("x", cur), DriftConfig{});
    const auto it = std::find_if(r.findings.begin(), r.findings.end(),
                                 [](const DriftFinding& f) { return f.check == Check::Psi; });
    EXPECT_GT(it->score, previous) << "shift " << shift;
    previous = it->score;
  }
}

}  // namespace
}  // namespace driftwatch
