#include "detrl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace detrl {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2)
    throw std::invalid_argument("sample stddev needs >= 2 values");
  // A constant sample has deviation exactly 0. Computing it through the
  // mean can leave 1-ulp residue (sum/n rounds), which would break the
  // identical-runs-have-std-0.0 contract.
  bool constant = true;
  for (double x : xs)
    if (x != xs.front()) constant = false;
  if (constant) return 0.0;
  const double m = mean(xs);
  double sq = 0.0;
  for (double x : xs) {
    const double d = x - m;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

double rel_std(double mean_value, double std_value) {
  if (mean_value == 0.0)
    throw std::domain_error("relative standard deviation undefined for mean 0");
  return 100.0 * std_value / mean_value;
}

double rel_std_or_nan(double mean_value, double std_value) {
  if (mean_value == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * std_value / mean_value;
}

namespace {

// Continued fraction for I_x(a,b), modified Lentz.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (d1 <= 0.0 || d2 <= 0.0)
    throw std::invalid_argument("degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  return regularized_incomplete_beta(d1 / 2.0, d2 / 2.0,
                                     d1 * x / (d1 * x + d2));
}

VarianceTestResult variance_test(std::span<const double> scores_a,
                                 std::span<const double> scores_b,
                                 double alpha) {
  if (scores_a.size() < 2 || scores_b.size() < 2)
    throw std::invalid_argument("variance test needs >= 2 values per sample");
  const double sa = sample_stddev(scores_a);
  const double sb = sample_stddev(scores_b);
  const double va = sa * sa;
  const double vb = sb * sb;

  VarianceTestResult result;
  if (va == 0.0 && vb == 0.0) {
    result.degenerate = true;  // equal-variance verdict by convention
    return result;
  }
  double v_num = va, v_den = vb;
  double df_num = static_cast<double>(scores_a.size() - 1);
  double df_den = static_cast<double>(scores_b.size() - 1);
  if (vb > va) {
    std::swap(v_num, v_den);
    std::swap(df_num, df_den);
  }
  if (v_den == 0.0) {
    result.statistic = std::numeric_limits<double>::infinity();
    result.p_value = 0.0;
    result.significant = true;
    result.degenerate = true;
    return result;
  }
  result.statistic = v_num / v_den;
  result.p_value =
      std::min(1.0, 2.0 * (1.0 - f_cdf(result.statistic, df_num, df_den)));
  result.significant = result.p_value < alpha;
  return result;
}

}  // namespace detrl
