#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "cdkit/error.hpp"

namespace cdkit {

/// P(K > lambda) for the limiting Kolmogorov distribution.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, fast for small lambda.
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double term = std::exp(c * (2 * k - 1) * (2 * k - 1));
      sum += term;
      if (term < 1e-10 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-10 * std::fabs(sum)) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// sup |F_m - U| for the empirical law F_m of u against U(0, 1).
inline double ks_statistic(std::span<const double> u) {
  require(!u.empty(), ErrorKind::domain, "the KS statistic needs at least one value");
  std::vector<double> sorted(u.begin(), u.end());
  for (double v : sorted) {
    require(v >= 0.0 && v <= 1.0, ErrorKind::domain, "KS uniformity test values must lie in [0, 1]");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - sorted[i], sorted[i] - static_cast<double>(i) / n));
  }
  return d;
}

/// Two-sided one-sample KS test of u against U(0, 1), asymptotic p-value.
inline KsResult ks_uniform(std::span<const double> u) {
  require(u.size() >= 10, ErrorKind::domain, "the KS test needs at least 10 values");
  const double d = ks_statistic(u);
  return {d, kolmogorov_sf(std::sqrt(static_cast<double>(u.size())) * d)};
}

}  // namespace cdkit
