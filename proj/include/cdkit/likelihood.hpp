#pragma once

// Profile likelihoods normalized to unit area, read as asymptotic CDs, and
// the matching normal (Wald) CD N(theta_hat, i_n / n).

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdkit/cd.hpp"
#include "cdkit/error.hpp"
#include "cdkit/numeric.hpp"
#include "cdkit/parallel.hpp"
#include "cdkit/special.hpp"

namespace cdkit {

/// log L(theta, eta); eta is ignored for models without a nuisance parameter.
using LogLikelihood = std::function<double(double theta, double eta)>;

struct NuisanceBounds {
  double lo;
  double hi;
};

struct ProfileCurve {
  std::vector<double> grid;
  std::vector<double> ell_star;  // l(theta) - l(theta_hat) <= 0
  double theta_hat = 0.0;
  double i_n = 0.0;  // 1 / i_n = -l''(theta_hat) / n
  double c_n = 0.0;  // trapezoid integral of exp(ell_star) over the grid
  std::size_t n = 0;
};

namespace detail {

class Profiler {
 public:
  Profiler(LogLikelihood loglik, std::optional<NuisanceBounds> nuisance)
      : loglik_(std::move(loglik)), nuisance_(nuisance) {}

  double operator()(double theta) const {
    if (!nuisance_) return checked(theta, 0.0);
    const auto [lo, hi] = *nuisance_;
    const double eta = numeric::golden_section_maximize([&](double e) { return checked(theta, e); }, lo, hi, 1e-8);
    const double edge = 1e-6 * (hi - lo);
    if (eta - lo < edge || hi - eta < edge) {
      fail(ErrorKind::optimization_failure,
           "nuisance maximum not bracketed at theta = " + std::to_string(theta));
    }
    return checked(theta, eta);
  }

 private:
  double checked(double theta, double eta) const {
    const double v = loglik_(theta, eta);
    require(!std::isnan(v) && v < kInfinity, ErrorKind::domain,
            "log-likelihood is not finite at theta = " + std::to_string(theta));
    return v;
  }

  LogLikelihood loglik_;
  std::optional<NuisanceBounds> nuisance_;
};

}  // namespace detail

/// Profiles the log-likelihood on a uniform grid over the window, maximizing
/// the nuisance (if any) at each grid point by golden-section search.
inline ProfileCurve profile_curve(const LogLikelihood& loglik, Interval window, std::size_t grid_size, std::size_t n,
                                  std::optional<NuisanceBounds> nuisance = std::nullopt) {
  require(grid_size >= 64, ErrorKind::domain, "profile grid needs at least 64 points");
  require(window.lo < window.hi && std::isfinite(window.lo) && std::isfinite(window.hi), ErrorKind::domain,
          "profile window must be a finite nondegenerate interval");
  require(n >= 1, ErrorKind::domain, "sample size must be positive");
  if (nuisance) {
    require(nuisance->lo < nuisance->hi, ErrorKind::domain, "nuisance bounds must be an interval");
  }
  const detail::Profiler profile(loglik, nuisance);

  ProfileCurve c;
  c.n = n;
  c.grid.resize(grid_size);
  std::vector<double> ell(grid_size);
  const double h = (window.hi - window.lo) / static_cast<double>(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) {
    c.grid[i] = i + 1 == grid_size ? window.hi : window.lo + h * static_cast<double>(i);
  }
  parallel_for(grid_size, [&](std::size_t i) { ell[i] = profile(c.grid[i]); });

  const std::size_t best = static_cast<std::size_t>(std::max_element(ell.begin(), ell.end()) - ell.begin());
  if (best == 0 || best + 1 == grid_size) {
    fail(ErrorKind::window_too_narrow, "profile maximum lies on the window edge");
  }
  // Vertex of the parabola through the best grid point and its neighbours,
  // repeated on a shrinking stencil around each new vertex.
  double theta_hat = c.grid[best];
  double top = ell[best];
  double fm = ell[best - 1], fp = ell[best + 1], step = h;
  for (int round = 0; round < 5; ++round) {
    const double curvature = fp - 2.0 * top + fm;
    if (!(curvature < 0.0)) break;
    const double shift = -0.5 * step * (fp - fm) / curvature;
    if (std::fabs(shift) > step) break;
    const double candidate = theta_hat + shift;
    const double value = profile(candidate);
    if (value < top) break;
    theta_hat = candidate;
    top = value;
    step *= 0.125;
    fm = profile(theta_hat - step);
    fp = profile(theta_hat + step);
  }
  c.theta_hat = theta_hat;

  const double second = (profile(theta_hat + h) - 2.0 * top + profile(theta_hat - h)) / (h * h);
  require(second < 0.0, ErrorKind::optimization_failure, "log-likelihood is not concave at its maximum");
  c.i_n = -static_cast<double>(n) / second;

  c.ell_star.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) c.ell_star[i] = std::min(0.0, ell[i] - top);
  std::vector<double> panels(grid_size - 1);
  for (std::size_t i = 0; i + 1 < grid_size; ++i) {
    panels[i] = 0.5 * (c.grid[i + 1] - c.grid[i]) * (std::exp(c.ell_star[i]) + std::exp(c.ell_star[i + 1]));
  }
  c.c_n = numeric::pairwise_sum(panels);
  return c;
}

/// G(theta_i) = (integral of exp(ell_star) from the window start to theta_i) / c_n
/// by the trapezoid rule, as a grid CD on the window.
inline ConfidenceDistribution normalize_to_acd(const ProfileCurve& curve) {
  require(curve.grid.size() >= 2 && curve.grid.size() == curve.ell_star.size(), ErrorKind::domain,
          "malformed profile curve");
  require(curve.c_n > 0.0 && std::isfinite(curve.c_n), ErrorKind::domain, "normalizing constant must be positive");
  if (std::exp(curve.ell_star.front()) >= 1e-12 || std::exp(curve.ell_star.back()) >= 1e-12) {
    fail(ErrorKind::window_too_narrow, "likelihood has not decayed below 1e-12 at the window edges");
  }
  const std::size_t m = curve.grid.size();
  std::vector<double> values(m, 0.0);
  double running = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    running += 0.5 * (curve.grid[i] - curve.grid[i - 1]) *
               (std::exp(curve.ell_star[i - 1]) + std::exp(curve.ell_star[i]));
    values[i] = std::min(1.0, running / curve.c_n);
  }
  values.back() = 1.0;
  for (std::size_t i = 1; i < m; ++i) values[i] = std::max(values[i], values[i - 1]);
  return ConfidenceDistribution::grid(curve.grid, std::move(values), Support{curve.grid.front(), curve.grid.back()});
}

/// N(theta_hat, i_n / n) restricted and renormalized to the window.
inline ConfidenceDistribution wald_acd(double theta_hat, double i_n, std::size_t n, Interval window = {-kInfinity, kInfinity}) {
  require(n >= 1 && i_n > 0.0, ErrorKind::domain, "Wald CD needs n >= 1 and i_n > 0");
  require(window.lo <= theta_hat && theta_hat <= window.hi, ErrorKind::domain, "window must contain theta_hat");
  const double sd = std::sqrt(i_n / static_cast<double>(n));
  const double a = special::normal_cdf((window.lo - theta_hat) / sd);
  const double b = special::normal_cdf((window.hi - theta_hat) / sd);
  const double mass = b - a;
  require(mass > 0.0, ErrorKind::domain, "window carries no normal mass");
  AnalyticRepr r;
  r.cdf = [=](double x) { return (special::normal_cdf((x - theta_hat) / sd) - a) / mass; };
  r.density = [=](double x) { return special::normal_pdf((x - theta_hat) / sd) / (sd * mass); };
  r.quantile = [=](double s) { return theta_hat + sd * special::normal_quantile(a + s * mass); };
  if (a == 0.0 && b == 1.0) {
    r.log_cdf = [=](double x) { return special::normal_log_cdf((x - theta_hat) / sd); };
    r.log_sf = [=](double x) { return special::normal_log_cdf(-(x - theta_hat) / sd); };
  }
  Support s{window.lo, window.hi};
  if (!(s.lo < s.hi)) s = {-kInfinity, kInfinity};
  return ConfidenceDistribution::analytic(s, std::move(r));
}

struct ProfileAcd {
  ProfileCurve curve;
  ConfidenceDistribution cd;
};

/// Profiles on `initial_window`, recentres on theta_hat +- 10 sqrt(i_n / n)
/// (clipped to the parameter support), and widens that half-width x2 up to
/// three times while the likelihood has not decayed at the edges.
inline ProfileAcd profile_acd(const LogLikelihood& loglik, std::size_t n, Interval initial_window,
                              Support parameter_support = {}, std::optional<NuisanceBounds> nuisance = std::nullopt,
                              std::size_t grid_size = 512) {
  const ProfileCurve first = profile_curve(loglik, initial_window, grid_size, n, nuisance);
  const double se = std::sqrt(first.i_n / static_cast<double>(n));
  const double inset = 1e-9 * std::max(1.0, std::fabs(first.theta_hat));
  double half_width = 10.0 * se;
  for (int attempt = 0;; ++attempt) {
    Interval w{first.theta_hat - half_width, first.theta_hat + half_width};
    if (std::isfinite(parameter_support.lo)) w.lo = std::max(w.lo, parameter_support.lo + inset);
    if (std::isfinite(parameter_support.hi)) w.hi = std::min(w.hi, parameter_support.hi - inset);
    try {
      ProfileCurve curve = profile_curve(loglik, w, grid_size, n, nuisance);
      auto cd = normalize_to_acd(curve);
      return {std::move(curve), std::move(cd)};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::window_too_narrow || attempt == 3) throw;
    }
    half_width *= 2.0;
  }
}

}  // namespace cdkit
