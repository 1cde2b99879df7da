#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace sls::stats {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double log_2pi = 1.8378770664093454835606594728112353;

// Standard normal CDF.
inline double norm_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// log of the standard normal CDF, stable in the far left tail where erfc
// underflows (|z| beyond ~37).
inline double log_norm_cdf(double z) {
  if (z > -37.0) {
    const double p = norm_cdf(z);
    if (p > 0.0) return std::log(p);
  }
  // Asymptotic expansion of Mills ratio: Phi(z) ~ phi(z)/(-z) * (1 - 1/z^2 + 3/z^4)
  const double z2 = z * z;
  const double corr = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2);
  return -0.5 * z2 - 0.5 * log_2pi - std::log(-z) + std::log(corr);
}

// Gaussian log density with variance parameterization.
inline double log_pdf_normal(double x, double mean, double var) {
  if (!(var > 0.0)) return neg_inf;
  const double d = x - mean;
  return -0.5 * (log_2pi + std::log(var)) - 0.5 * d * d / var;
}

// Lognormal: log X ~ N(mu, var), support x > 0.
inline double log_pdf_lognormal(double x, double mu, double var) {
  if (!(x > 0.0) || !(var > 0.0)) return neg_inf;
  const double lx = std::log(x);
  return -lx + log_pdf_normal(lx, mu, var);
}

// Normal truncated to (0, inf), including the normalization Phi(mean/sd).
inline double log_pdf_truncnorm_pos(double x, double mean, double var) {
  if (!(x > 0.0) || !(var > 0.0)) return neg_inf;
  const double sd = std::sqrt(var);
  return log_pdf_normal(x, mean, var) - log_norm_cdf(mean / sd);
}

// Inverse gamma with density b^a / Gamma(a) x^{-a-1} exp(-b/x).
inline double log_pdf_inv_gamma(double x, double shape, double scale) {
  if (!(x > 0.0) || !(shape > 0.0) || !(scale > 0.0)) return neg_inf;
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double sd(std::span<const double> v) { return std::sqrt(variance(v)); }

// Type-7 (linear interpolation) empirical quantile of an unsorted sample.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - std::floor(h);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

// Sample median; even n uses the mean of the two central order statistics.
inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double median_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace sls::stats
