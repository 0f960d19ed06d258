#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "oann/errors.hpp"

namespace oann {

// Small statistics toolbox: Poisson tails for dummy-slot sizing, chi-square
// goodness of fit and two-sample Kolmogorov-Smirnov for the trace audits.

namespace detail {

/// Regularized lower incomplete gamma P(a, x) by series expansion (x < a+1).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction (x >= a+1).
inline double gamma_q_cont_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw UsageError("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cont_fraction(a, x);
}

/// Upper tail p-value of a chi-square statistic with `dof` degrees of freedom.
inline double chi_square_p_value(double statistic, double dof) {
  return gamma_q(dof / 2.0, statistic / 2.0);
}

/// Pearson statistic of observed counts against the uniform distribution.
inline double chi_square_uniform_statistic(const std::vector<uint64_t>& counts) {
  if (counts.empty()) throw UsageError("chi_square: empty counts");
  uint64_t total = 0;
  for (auto c : counts) total += c;
  const double expected =
      static_cast<double>(total) / static_cast<double>(counts.size());
  if (expected <= 0.0) return 0.0;
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

/// Pr[Poisson(lambda) > s], summed directly in extended precision.
inline double poisson_tail(double lambda, uint64_t s) {
  if (lambda < 0.0) throw UsageError("poisson_tail: negative rate");
  long double pmf = std::exp(static_cast<long double>(-lambda));
  long double cdf = pmf;
  for (uint64_t k = 1; k <= s; ++k) {
    pmf *= static_cast<long double>(lambda) / static_cast<long double>(k);
    cdf += pmf;
  }
  long double tail = 1.0L - cdf;
  if (tail < 0.0L) tail = 0.0L;
  return static_cast<double>(tail);
}

/// Smallest s with Pr[Poisson(lambda) > s] <= tail_bound.
inline uint64_t poisson_upper_quantile(double lambda, double tail_bound) {
  if (!(tail_bound > 0.0 && tail_bound < 1.0))
    throw UsageError("poisson_upper_quantile: bound must be in (0,1)");
  long double pmf = std::exp(static_cast<long double>(-lambda));
  long double cdf = pmf;
  uint64_t s = 0;
  const long double target = 1.0L - static_cast<long double>(tail_bound);
  // The tail of a Poisson decays super-exponentially; the scan is short.
  while (cdf < target) {
    ++s;
    pmf *= static_cast<long double>(lambda) / static_cast<long double>(s);
    cdf += pmf;
    if (s > 1000000) throw UsageError("poisson_upper_quantile: no convergence");
  }
  return s;
}

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UsageError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

/// Rejection threshold for the two-sample KS test at significance alpha.
inline double ks_threshold(size_t n, size_t m, double alpha) {
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt(static_cast<double>(n + m) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n-1 denominator).
inline double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace oann
