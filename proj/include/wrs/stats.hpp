#pragma once

#include <cstddef>
#include <span>

namespace wrs::stats {

struct CampaignSummary {
  double best = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator; 0 for a single run
  std::size_t n_runs = 0;
};

/// Throws std::invalid_argument for an empty sample.
CampaignSummary summarize(std::span<const double> run_bests);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double standard_error = 0.0;
  double p_value = 1.0;  // two-sided
  /// Zero pooled variance with unequal means: t is infinite and p is 0.
  bool degenerate = false;
};

/// Student's two-sample t-test with pooled variance, df = |a| + |b| - 2.
/// Throws std::invalid_argument unless both samples have >= 2 elements.
TTestResult pooled_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), by Lentz's continued fraction.
/// `y` must equal 1 - x; passing it separately keeps precision near x = 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution function.
double student_t_cdf(double t, double df);

/// P(|T| >= |t|) for T ~ t(df).
double student_t_two_sided(double t, double df);

}  // namespace wrs::stats
