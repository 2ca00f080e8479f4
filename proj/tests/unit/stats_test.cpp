#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <random>

#include "driftwatch/stats.hpp"

namespace driftwatch {
namespace {

double boost_t_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double boost_z_two_sided(double z) {
  boost::math::normal dist;
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

TEST(IncompleteBeta, MatchesBoost) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shape(0.05, 60.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double a = shape(rng), b = shape(rng), x = unit(rng);
    EXPECT_NEAR(regularized_incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10) << a << " " << b << " " << x;
  }
  EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
}

TEST(WelchT, IdenticalSamples) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const auto r = welch_t_test(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(WelchT, ShiftedByOne) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 3, 4, 5, 6};
  const auto r = welch_t_test(a, b);
  EXPECT_NEAR(r.statistic, -1.0, 1e-12);
  ASSERT_TRUE(r.df.has_value());
  EXPECT_NEAR(*r.df, 8.0, 1e-12);
  // scipy.stats.ttest_ind(a, b, equal_var=False).pvalue
  EXPECT_NEAR(r.p_value, 0.34659350708733416, 1e-9);
  EXPECT_NEAR(r.p_value, boost_t_two_sided(-1.0, 8.0), 1e-9);
  EXPECT_EQ(r.method, TestMethod::WelchT);
}

TEST(WelchT, DegenerateZeroVariance) {
  const std::vector<double> a{2, 2, 2};
  const std::vector<double> b{5, 5};
  const auto same = welch_t_test(a, a);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  const auto diff = welch_t_test(a, b);
  EXPECT_EQ(diff.statistic, -kInfiniteStatistic);
  EXPECT_EQ(diff.p_value, 0.0);
  EXPECT_EQ(welch_t_test(b, a).statistic, kInfiniteStatistic);
}

TEST(WelchT, TooFewSamples) {
  const std::vector<double> one{1.0};
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(welch_t_test(one, two), InvalidArgument);
  EXPECT_THROW(welch_t_test(two, one), InvalidArgument);
}

TEST(WelchTProperty, ScaleInvariantAndAntisymmetric) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(2, 60);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 300; ++i) {
    std::normal_distribution<double> da(0.0, 1.0), db(0.3, 2.0);
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    for (auto& x : a) x = da(rng);
    for (auto& x : b) x = db(rng);
    const auto r = welch_t_test(a, b);
    const double c = scale(rng);
    auto as = a, bs = b;
    for (auto& x : as) x *= c;
    for (auto& x : bs) x *= c;
    const auto rs = welch_t_test(as, bs);
    EXPECT_NEAR(rs.statistic, r.statistic, 1e-9 * std::max(1.0, std::abs(r.statistic)));
    EXPECT_NEAR(*rs.df, *r.df, 1e-9 * *r.df);
    EXPECT_NEAR(rs.p_value, r.p_value, 1e-9);
    const auto swapped = welch_t_test(b, a);
    EXPECT_EQ(swapped.statistic, -r.statistic);
    EXPECT_EQ(swapped.p_value, r.p_value);
  }
}

TEST(WelchTProperty, MatchesBoostReference) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> size(2, 200);
  for (int i = 0; i < 200; ++i) {
    std::normal_distribution<double> da(0.0, 1.0 + i % 5), db(0.2 * (i % 7), 1.5);
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    for (auto& x : a) x = da(rng);
    for (auto& x : b) x = db(rng);
    const auto r = welch_t_test(a, b);
    EXPECT_NEAR(r.p_value, boost_t_two_sided(r.statistic, *r.df), 1e-9);
  }
}

TEST(TwoProportion, Identical) {
  const auto r = two_proportion_test(50, 100, 50, 100);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-15);
  EXPECT_FALSE(r.df.has_value());
  EXPECT_EQ(r.method, TestMethod::TwoProportionZ);
}

TEST(TwoProportion, SixtyVersusFifty) {
  const auto r = two_proportion_test(60, 100, 50, 100);
  // Pooled 0.55: z = 0.1 / sqrt(0.55 * 0.45 * 0.02).
  EXPECT_NEAR(r.statistic, 0.1 / std::sqrt(0.55 * 0.45 * 0.02), 1e-12);
  EXPECT_NEAR(r.statistic, 1.4213381090374024, 1e-12);
  EXPECT_NEAR(r.p_value, 0.1552184896846841, 1e-9);
  EXPECT_NEAR(r.p_value, boost_z_two_sided(r.statistic), 1e-12);
}

TEST(TwoProportion, DegenerateAndErrors) {
  EXPECT_EQ(two_proportion_test(0, 10, 0, 20).p_value, 1.0);
  EXPECT_EQ(two_proportion_test(10, 10, 20, 20).statistic, 0.0);
  EXPECT_THROW(two_proportion_test(0, 0, 1, 2), InvalidArgument);
  EXPECT_THROW(two_proportion_test(3, 2, 1, 2), InvalidArgument);
  EXPECT_THROW(two_proportion_test(-1, 2, 1, 2), InvalidArgument);
}

TEST(TwoProportionProperty, AntisymmetricAndMatchesBoost) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::int64_t> trials(1, 5000);
  for (int i = 0; i < 500; ++i) {
    const auto na = trials(rng), nb = trials(rng);
    const auto sa = std::uniform_int_distribution<std::int64_t>(0, na)(rng);
    const auto sb = std::uniform_int_distribution<std::int64_t>(0, nb)(rng);
    const auto r = two_proportion_test(sa, na, sb, nb);
    const auto s = two_proportion_test(sb, nb, sa, na);
    EXPECT_EQ(s.statistic, -r.statistic);
    EXPECT_EQ(s.p_value, r.p_value);
    EXPECT_NEAR(r.p_value, boost_z_two_sided(r.statistic), 1e-12);
  }
}

TEST(StatsProperty, PValuesStayInUnitInterval) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  std::uniform_int_distribution<int> size(2, 30);
  std::uniform_int_distribution<std::int64_t> trials(1, 1000000);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    const double spread = std::pow(10.0, static_cast<double>(rng() % 12) - 6.0);
    for (auto& x : a) x = wide(rng) * spread;
    for (auto& x : b) x = wide(rng) * spread;
    if (i % 10 == 0) std::fill(a.begin(), a.end(), 1.0);
    const auto w = welch_t_test(a, b);
    EXPECT_GE(w.p_value, 0.0);
    EXPECT_LE(w.p_value, 1.0);

    const auto na = trials(rng), nb = trials(rng);
    const auto z = two_proportion_test(std::uniform_int_distribution<std::int64_t>(0, na)(rng), na,
                                       std::uniform_int_distribution<std::int64_t>(0, nb)(rng), nb);
    EXPECT_GE(z.p_value, 0.0);
    EXPECT_LE(z.p_value, 1.0);
  }
}

}  // namespace
}  // namespace driftwatch
