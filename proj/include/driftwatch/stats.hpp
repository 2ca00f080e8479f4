#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "driftwatch/error.hpp"

namespace driftwatch {

enum class TestMethod { WelchT, TwoProportionZ };

inline std::string_view to_string(TestMethod m) {
  return m == TestMethod::WelchT ? "welch_t" : "two_proportion_z";
}

struct TestResult {
  double statistic = 0.0;
  std::optional<double> df;
  double p_value = 1.0;
  TestMethod method = TestMethod::WelchT;
};

// Stand-in for an infinite test statistic in serialized documents.
inline constexpr double kInfiniteStatistic = 1e308;

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz's method.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0.
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fast for x < (a+1)/(a+b+2); use the
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Welch's unequal-variance t-test, two-sided.
inline TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("welch t-test needs at least 2 samples per group");
  auto moments = [](std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(xs.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;

  TestResult r;
  r.method = TestMethod::WelchT;
  if (sa + sb == 0.0) {
    // Both groups constant: the difference is either exact or absent.
    r.df = na + nb - 2.0;
    if (ma == mb) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = ma > mb ? kInfiniteStatistic : -kInfiniteStatistic;
      r.p_value = 0.0;
    }
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(sa + sb);
  const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.df = df;
  r.p_value = student_t_two_sided_p(r.statistic, df);
  return r;
}

/// Pooled two-proportion z-test, two-sided.
inline TestResult two_proportion_test(std::int64_t successes_a, std::int64_t trials_a, std::int64_t successes_b,
                                      std::int64_t trials_b) {
  if (trials_a < 1 || trials_b < 1) throw InvalidArgument("two-proportion test needs at least one trial per group");
  if (successes_a < 0 || successes_b < 0 || successes_a > trials_a || successes_b > trials_b) {
    throw InvalidArgument("successes must lie in [0, trials]");
  }
  const double na = static_cast<double>(trials_a);
  const double nb = static_cast<double>(trials_b);
  const double pa = static_cast<double>(successes_a) / na;
  const double pb = static_cast<double>(successes_b) / nb;
  const double pooled = static_cast<double>(successes_a + successes_b) / (na + nb);
  TestResult r;
  r.method = TestMethod::TwoProportionZ;
  if (pooled <= 0.0 || pooled >= 1.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.statistic = (pa - pb) / std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  // 2 * (1 - Phi(|z|)) without the cancellation.
  r.p_value = std::clamp(std::erfc(std::abs(r.statistic) / std::sqrt(2.0)), 0.0, 1.0);
  return r;
}

}  // namespace driftwatch
