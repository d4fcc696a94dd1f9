#pragma once

#include <span>
#include <stdexcept>

namespace detrl {

double mean(std::span<const double> xs);

// Sample standard deviation (divisor n-1).
double sample_stddev(std::span<const double> xs);

// 100 * std / mean, as a percentage. mean == 0 is a domain error; callers
// that need a flag instead use rel_std_or_nan.
double rel_std(double mean_value, double std_value);
double rel_std_or_nan(double mean_value, double std_value);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double x, double d1, double d2);

struct VarianceTestResult {
  double statistic = 1.0;  // larger sample variance over smaller
  double p_value = 1.0;    // two-sided
  bool significant = false;
  bool degenerate = false;  // a zero-variance sample was involved
};

// Two-sample F-test for equality of variances. The larger variance goes on
// top; p = 2*(1 - F_cdf(statistic)) clamped to [0,1]; significant iff
// p < alpha. Zero variance in both samples yields an equal-variance verdict
// flagged as degenerate.
VarianceTestResult variance_test(std::span<const double> scores_a,
                                 std::span<const double> scores_b,
                                 double alpha);

}  // namespace detrl
