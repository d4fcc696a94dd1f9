#include <doctest.h>

#include <cmath>
#include <vector>

#include "detrl/stats.hpp"

using namespace detrl;

namespace {

// Numeric-integration oracle for the F distribution: Simpson's rule over
// the density, independent of the incomplete-beta route used by f_cdf.
double f_pdf(double x, double d1, double d2) {
  const double log_b = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) -
                       std::lgamma((d1 + d2) / 2);
  const double log_pdf = (d1 / 2) * std::log(d1 / d2) +
                         (d1 / 2 - 1) * std::log(x) -
                         ((d1 + d2) / 2) * std::log1p(d1 * x / d2) - log_b;
  return std::exp(log_pdf);
}

double f_cdf_by_quadrature(double x, double d1, double d2) {
  const int n = 200000;  // even
  const double h = x / n;
  double sum = 0.0;  // f_pdf may blow up at 0 for d1 < 2; cases avoid that
  for (int i = 1; i < n; ++i)
    sum += f_pdf(i * h, d1, d2) * (i % 2 == 1 ? 4.0 : 2.0);
  sum += f_pdf(x, d1, d2);
  if (d1 >= 2) sum += f_pdf(1e-12, d1, d2);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("mean and sample stddev basics") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(xs) == doctest::Approx(2.5));
  CHECK(sample_stddev(xs) ==
        doctest::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0)));
  CHECK_THROWS_AS(mean(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(sample_stddev(std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("relative standard deviation matches published derived values") {
  // Derived columns: 100*std/mean within +-0.05 percentage points.
  CHECK(std::fabs(rel_std(126.5, 15.7) - 12.41) < 0.05);
  CHECK(std::fabs(rel_std(108.6, 47.4) - 43.61) < 0.05);
  CHECK(rel_std(146.7, 0.0) == 0.0);
  CHECK(rel_std(5.0, 5.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(rel_std(0.0, 1.0), std::domain_error);
  CHECK(std::isnan(rel_std_or_nan(0.0, 1.0)));
}

TEST_CASE("f_cdf agrees with the quadrature oracle on fixed cases") {
  const struct {
    double x, d1, d2;
  } cases[] = {{1.0, 4, 4}, {2.5, 4, 4}, {3.0, 6, 4}};
  for (const auto& c : cases) {
    INFO("x=", c.x, " d1=", c.d1, " d2=", c.d2);
    const double numeric = f_cdf_by_quadrature(c.x, c.d1, c.d2);
    CHECK(std::fabs(f_cdf(c.x, c.d1, c.d2) - numeric) < 1e-6);
  }
}

TEST_CASE("f_cdf edge behavior") {
  CHECK(f_cdf(0.0, 4, 4) == 0.0);
  CHECK(f_cdf(-1.0, 4, 4) == 0.0);
  CHECK(f_cdf(1e9, 4, 4) == doctest::Approx(1.0));
  // Symmetry: P(F <= 1) with equal dof is exactly 1/2.
  CHECK(f_cdf(1.0, 4, 4) == doctest::Approx(0.5));
}

TEST_CASE("variance test: identical samples are not significant") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
  const auto r = variance_test(a, a, 0.1);
  CHECK(r.statistic == doctest::Approx(1.0));
  CHECK_FALSE(r.significant);
  CHECK_FALSE(r.degenerate);
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("variance test: zero variance branches are flagged") {
  const std::vector<double> flat = {2.0, 2.0, 2.0, 2.0, 2.0};
  const std::vector<double> spread = {1.0, 2.0, 3.0, 4.0, 5.0};
  const auto both = variance_test(flat, flat, 0.1);
  CHECK(both.degenerate);
  CHECK_FALSE(both.significant);
  const auto one = variance_test(flat, spread, 0.1);
  CHECK(one.degenerate);
  CHECK(one.significant);
  CHECK(one.p_value == 0.0);
}

TEST_CASE("variance test: clearly different variances are significant") {
  const std::vector<double> tight = {10.0, 10.1, 9.9, 10.05, 9.95};
  const std::vector<double> wide = {2.0, 18.0, 5.0, 15.0, 10.0};
  const auto r = variance_test(tight, wide, 0.1);
  CHECK(r.statistic > 1.0);
  CHECK(r.significant);
  CHECK_THROWS_AS(variance_test(std::vector<double>{1.0}, wide, 0.1),
                  std::invalid_argument);
}
