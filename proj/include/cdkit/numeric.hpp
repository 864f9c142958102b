#pragma once

// Root finding, one-dimensional maximization, fixed-rule quadrature and
// deterministic summation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdkit/error.hpp"

namespace cdkit::numeric {

/// Pairwise summation. Order is fixed by the input layout, so the result does
/// not depend on how the inputs were produced.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

struct Bracket {
  double lo;
  double hi;
};

/// Grows [lo, hi] geometrically until f changes sign (f increasing assumed
/// for the direction of growth). Bounds are clipped to [lower_limit, upper_limit].
inline Bracket expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                              double lower_limit = -std::numeric_limits<double>::infinity(),
                              double upper_limit = std::numeric_limits<double>::infinity()) {
  double width = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && f(lo) > 0.0; ++i) {
    hi = lo;
    lo = std::max(lo - width, lower_limit);
    width *= 2.0;
    if (lo == lower_limit) break;
  }
  width = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && f(hi) < 0.0; ++i) {
    lo = hi;
    hi = std::min(hi + width, upper_limit);
    width *= 2.0;
    if (hi == upper_limit) break;
  }
  return {lo, hi};
}

/// Bisection on a nondecreasing f for the smallest x with f(x) >= 0 (to
/// within floating-point resolution). Returns the right end of the final
/// bracket, so f(result) >= 0 whenever f(hi) >= 0 on entry.
inline double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                                double xtol = 0.0) {
  for (int i = 0; i < 2000; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= xtol) break;
    if (f(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Brent's method for a root of f in [lo, hi]; f(lo) and f(hi) must differ in sign.
inline double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  require((fa < 0.0) != (fb < 0.0), ErrorKind::optimization_failure, "brent_root: root not bracketed");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

/// Safeguarded Newton iteration for value(x) = target with value increasing.
/// `eval` returns {value(x), value'(x)}; the bracket [lo, hi] must contain
/// the solution.
inline double newton_bracketed(const std::function<std::pair<double, double>(double)>& eval, double target, double lo,
                               double hi, double x0, double rel_tol = 1e-15) {
  double x = std::clamp(x0, lo, hi);
  for (int iter = 0; iter < 300; ++iter) {
    const auto [v, d] = eval(x);
    const double g = v - target;
    if (g == 0.0) return x;
    if (g > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double next = (d > 0.0 && std::isfinite(d)) ? x - g / d : lo + 0.5 * (hi - lo);
    if (!(next > lo && next < hi)) next = lo + 0.5 * (hi - lo);
    const double scale = std::max(std::fabs(x), 1e-300);
    if (std::fabs(next - x) <= rel_tol * scale) return next;
    if (hi - lo <= rel_tol * scale) return next;
    x = next;
  }
  return x;
}

inline double newton_bracketed(const std::function<double(double)>& value, const std::function<double(double)>& slope,
                               double target, double lo, double hi, double x0, double rel_tol = 1e-15) {
  return newton_bracketed([&](double x) { return std::pair{value(x), slope(x)}; }, target, lo, hi, x0, rel_tol);
}

/// Golden-section search for the maximizer of a unimodal f on [lo, hi].
inline double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol = 1e-8) {
  constexpr double inv_phi = 0.61803398874989484820;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * std::max(1.0, std::fabs(a) + std::fabs(b))) {
    // >= keeps the left candidate on ties, so plateaus resolve to the smaller x
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
    if (b - a < 1e-300) break;
  }
  return 0.5 * (a + b);
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(int n) {
  require(n >= 1, ErrorKind::domain, "gauss_legendre needs n >= 1");
  QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline double integrate_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                       const QuadratureRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * pairwise_sum(terms);
}

/// Composite midpoint rule with n cells on [a, b].
inline double integrate_midpoint(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = f(a + (i + 0.5) * h);
  return h * pairwise_sum(terms);
}

}  // namespace cdkit::numeric
