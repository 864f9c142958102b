#pragma once

// Precision of CDs: loss dispersion, integrated risk against the truth
// indicator, Bahadur slopes, and paired Monte Carlo stochastic dominance.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cdkit/cd.hpp"
#include "cdkit/error.hpp"
#include "cdkit/inference.hpp"
#include "cdkit/numeric.hpp"
#include "cdkit/simlab.hpp"
#include "cdkit/special.hpp"

namespace cdkit {

/// phi(x, theta): nonincreasing in x below theta, nondecreasing above.
struct LossSpec {
  std::string name;
  std::function<double(double x, double theta)> phi;
};

inline LossSpec squared_error() {
  return {"squared-error", [](double x, double t) { return (x - t) * (x - t); }};
}

inline LossSpec absolute_error() {
  return {"absolute", [](double x, double t) { return std::fabs(x - t); }};
}

/// Spot-checks that the loss is smallest at x = theta on a small grid.
inline void validate_loss(const LossSpec& loss, double theta) {
  require(static_cast<bool>(loss.phi), ErrorKind::config, "loss has no phi");
  const double at = loss.phi(theta, theta);
  require(at >= 0.0, ErrorKind::domain, "loss must be nonnegative");
  double prev_lo = at, prev_hi = at;
  for (double step : {1e-3, 0.1, 0.5, 1.0, 2.0, 10.0}) {
    const double lo = loss.phi(theta - step, theta), hi = loss.phi(theta + step, theta);
    require(lo >= prev_lo && hi >= prev_hi, ErrorKind::domain, "loss '" + loss.name + "' is not valley-shaped");
    prev_lo = lo;
    prev_hi = hi;
  }
}

/// The inner integral of phi(x, theta0) dH(x) for one realized CD. Analytic
/// CDs use a 2048-node midpoint rule in normal scores; grid CDs integrate each
/// linear segment (split at theta0) by Gauss-Legendre; samples sum exactly.
inline double sample_dispersion(const ConfidenceDistribution& h, const LossSpec& loss, double theta0) {
  validate_loss(loss, theta0);
  auto phi = [&](double x) { return loss.phi(x, theta0); };
  if (const auto* s = std::get_if<SampleRepr>(&h.repr())) {
    std::vector<double> terms(s->atoms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = s->weights[i] * phi(s->atoms[i]);
    return numeric::pairwise_sum(terms);
  }
  if (const auto* g = std::get_if<GridRepr>(&h.repr())) {
    std::vector<double> terms{g->value.front() * phi(g->theta.front()), (1.0 - g->value.back()) * phi(g->theta.back())};
    static const auto rule = numeric::gauss_legendre(16);
    for (std::size_t i = 0; i + 1 < g->theta.size(); ++i) {
      const double a = g->theta[i], b = g->theta[i + 1];
      const double slope = (g->value[i + 1] - g->value[i]) / (b - a);
      if (slope == 0.0) continue;
      std::vector<Interval> pieces{{a, b}};
      if (a < theta0 && theta0 < b) pieces = {{a, theta0}, {theta0, b}};
      for (const auto& p : pieces) terms.push_back(slope * numeric::integrate_gauss_legendre(phi, p.lo, p.hi, rule));
    }
    return numeric::pairwise_sum(terms);
  }
  detail::require_tail_integrable(h, phi);
  constexpr int kNodes = 2048;
  constexpr double kZ = 7.5;
  const double dz = 2.0 * kZ / kNodes;
  std::vector<double> terms(kNodes);
  double weight = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double z = -kZ + (i + 0.5) * dz;
    const double w = special::normal_pdf(z) * dz;
    terms[static_cast<std::size_t>(i)] = w * phi(h.quantile(special::normal_cdf(z)));
    weight += w;
  }
  return numeric::pairwise_sum(terms) / weight;
}

/// Outer expectation of sample_dispersion over the generator's datasets.
inline McEstimate mc_dispersion(const CdGenerator& gen, const LossSpec& loss, std::size_t reps) {
  require(reps >= 100, ErrorKind::domain, "Monte Carlo experiments need reps >= 100");
  return mc_average(gen, reps, [&](const ConfidenceDistribution& h) { return sample_dispersion(h, loss, gen.theta0); });
}

/// Weight measure W for the risk functional: a density on a finite window, or
/// a unit point mass at `window.lo` when `point_mass` is set.
struct WeightMeasure {
  std::function<double(double)> density;
  Interval window{0.0, 0.0};
  bool point_mass = false;
};

inline WeightMeasure gaussian_weight(double center, double sd = 1.0) {
  return {[=](double x) { return special::normal_pdf((x - center) / sd) / sd; },
          {center - 8.0 * sd, center + 8.0 * sd},
          false};
}

inline WeightMeasure uniform_weight(double lo, double hi) {
  require(lo < hi, ErrorKind::domain, "uniform weight needs lo < hi");
  return {[=](double) { return 1.0 / (hi - lo); }, {lo, hi}, false};
}

inline WeightMeasure point_mass_weight(double at) { return {{}, {at, at}, true}; }

struct RiskSpec {
  std::function<double(double)> psi = [](double v) { return v; };
  WeightMeasure weight;
};

inline std::function<double(double)> psi_identity() {
  return [](double v) { return v; };
}

inline std::function<double(double)> psi_square() {
  return [](double v) { return v * v; };
}

/// Integral of psi(|H(x) - 1{x >= theta0}|) dW(x) for one CD. A point-mass W
/// at theta0 uses the larger one-sided limit, max(psi(H), psi(1 - H)).
inline double risk_integrand(const ConfidenceDistribution& h, const RiskSpec& spec, double theta0) {
  const auto& w = spec.weight;
  if (w.point_mass) {
    const double x = w.window.lo;
    const double v = cd_eval(h, x);
    if (x == theta0) return std::max(spec.psi(v), spec.psi(1.0 - v));
    return spec.psi(std::fabs(v - (x >= theta0 ? 1.0 : 0.0)));
  }
  require(std::isfinite(w.window.lo) && std::isfinite(w.window.hi) && w.window.lo < w.window.hi, ErrorKind::domain,
          "risk weight needs a finite window");
  auto f = [&](double x) { return spec.psi(std::fabs(cd_eval(h, x) - (x >= theta0 ? 1.0 : 0.0))) * w.density(x); };
  static const auto rule = numeric::gauss_legendre(128);
  const double lo = w.window.lo, hi = w.window.hi;
  if (lo < theta0 && theta0 < hi) {
    return numeric::integrate_gauss_legendre(f, lo, theta0, rule) + numeric::integrate_gauss_legendre(f, theta0, hi, rule);
  }
  static const auto whole = numeric::gauss_legendre(256);
  return numeric::integrate_gauss_legendre(f, lo, hi, whole);
}

inline McEstimate risk(const CdGenerator& gen, const RiskSpec& spec, std::size_t reps) {
  require(reps >= 100, ErrorKind::domain, "Monte Carlo experiments need reps >= 100");
  return mc_average(gen, reps, [&](const ConfidenceDistribution& h) { return risk_integrand(h, spec, gen.theta0); });
}

struct BahadurSlopes {
  double left = 0.0;   // (1/n) log H(theta0 - eps)
  double right = 0.0;  // (1/n) log (1 - H(theta0 + eps))
  bool left_empty = false;
  bool right_empty = false;
};

/// Bahadur slopes evaluated in log space; a tail with no mass gives -inf and
/// sets the matching flag.
inline BahadurSlopes bahadur_slopes(const ConfidenceDistribution& h, double theta0, double eps, std::size_t n) {
  require(eps > 0.0 && n >= 1, ErrorKind::domain, "Bahadur slopes need eps > 0 and n >= 1");
  const double nn = static_cast<double>(n);
  const double ll = h.log_cdf(theta0 - eps);
  const double lr = h.log_sf(theta0 + eps);
  BahadurSlopes out;
  out.left_empty = ll == -kInfinity;
  out.right_empty = lr == -kInfinity;
  out.left = out.left_empty ? -kInfinity : std::min(0.0, ll / nn);
  out.right = out.right_empty ? -kInfinity : std::min(0.0, lr / nn);
  return out;
}

enum class Verdict { first_dominates, second_dominates, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::first_dominates:
      return "1 dominates";
    case Verdict::second_dominates:
      return "2 dominates";
    default:
      return "inconclusive";
  }
}

struct TailComparison {
  std::vector<double> ecdf1;  // ECDF of the generator-1 statistic on the grid
  std::vector<double> ecdf2;
  bool first_within_tolerance = false;   // ecdf1 >= ecdf2 - tol everywhere
  bool second_within_tolerance = false;  // ecdf2 >= ecdf1 - tol everywhere
  double area = 0.0;                     // sum over the grid of ecdf1 - ecdf2
  Verdict verdict = Verdict::inconclusive;
};

struct EpsComparison {
  double eps = 0.0;
  TailComparison left;   // statistic H(theta0 - eps)
  TailComparison right;  // statistic 1 - H(theta0 + eps)
  Verdict verdict = Verdict::inconclusive;
};

struct DominanceReport {
  std::vector<double> grid;  // 0.01 .. 0.99
  double tolerance = 0.0;    // 2 * DKW(reps, 0.05)
  std::size_t reps = 0;
  std::size_t failed = 0;
  std::vector<EpsComparison> per_eps;
  Verdict verdict = Verdict::inconclusive;
  bool interval_widths_consistent = true;  // only checked when generator 1 dominates
};

namespace detail {

inline double dkw_half_width(double m, double alpha) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * m)); }

inline std::vector<double> ecdf_on(std::vector<double> values, const std::vector<double>& grid) {
  std::sort(values.begin(), values.end());
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto it = std::upper_bound(values.begin(), values.end(), grid[k]);
    out[k] = static_cast<double>(it - values.begin()) / static_cast<double>(values.size());
  }
  return out;
}

inline TailComparison compare_tail(const std::vector<double>& s1, const std::vector<double>& s2,
                                   const std::vector<double>& grid, double tol) {
  TailComparison t;
  t.ecdf1 = ecdf_on(s1, grid);
  t.ecdf2 = ecdf_on(s2, grid);
  double min12 = 0.0, min21 = 0.0;
  std::vector<double> diffs(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    diffs[k] = t.ecdf1[k] - t.ecdf2[k];
    min12 = std::min(min12, diffs[k]);
    min21 = std::min(min21, -diffs[k]);
  }
  t.area = numeric::pairwise_sum(diffs);
  t.first_within_tolerance = min12 >= -tol;
  t.second_within_tolerance = min21 >= -tol;
  if (t.first_within_tolerance && !t.second_within_tolerance) {
    t.verdict = Verdict::first_dominates;
  } else if (t.second_within_tolerance && !t.first_within_tolerance) {
    t.verdict = Verdict::second_dominates;
  } else if (t.first_within_tolerance && t.second_within_tolerance && t.area != 0.0) {
    t.verdict = t.area > 0.0 ? Verdict::first_dominates : Verdict::second_dominates;
  }
  return t;
}

inline Verdict combine(const std::vector<Verdict>& vs) {
  if (vs.empty()) return Verdict::inconclusive;
  for (Verdict v : vs) {
    if (v != vs.front()) return Verdict::inconclusive;
  }
  return vs.front();
}

/// Checks that the ECDF of a lies left of the ECDF of b (within tol) at every
/// pooled sample point.
inline bool stochastically_smaller(std::vector<double> a, std::vector<double> b, double tol) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  for (double x : pooled) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / na;
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / nb;
    if (fa < fb - tol) return false;
  }
  return true;
}

}  // namespace detail

/// Paired comparison: replicate r builds both CDs from generator 1's dataset
/// and auxiliary stream. For each eps the ECDFs of H(theta0 - eps) and
/// 1 - H(theta0 + eps) are compared on a 99-point grid. A smaller statistic
/// (ECDF above) is better. When both directions are within tolerance the
/// sign of the summed ECDF gap decides, and identical ECDFs are inconclusive.
inline DominanceReport dominance_mc(const CdGenerator& gen1, const CdGenerator& gen2, double theta0,
                                    const std::vector<double>& eps_grid, std::size_t reps) {
  require(reps >= 100, ErrorKind::domain, "Monte Carlo experiments need reps >= 100");
  require(!eps_grid.empty(), ErrorKind::domain, "need at least one eps");
  for (double e : eps_grid) require(e > 0.0, ErrorKind::domain, "eps values must be positive");
  {
    const Dataset a = gen1.dataset(0), b = gen2.dataset(0);
    require(a.x.size() == b.x.size() && a.y.size() == b.y.size(), ErrorKind::pairing,
            "generators produce datasets of different shapes");
  }
  const std::size_t k = eps_grid.size();
  const std::vector<double> quantile_levels{0.25, 0.5, 0.75};
  struct Row {
    bool ok = false;
    std::vector<double> l1, l2, r1, r2;
    std::vector<double> w1, w2;  // |H^{-1}(t) - theta0|
  };
  std::vector<Row> rows(reps);
  parallel_for(reps, [&](std::size_t r) {
    try {
      const Dataset d = gen1.dataset(r);
      const auto aux = gen1.aux_stream(r);
      const auto h1 = gen1.build(d, aux);
      const auto h2 = gen2.build(d, aux);
      Row row;
      for (double e : eps_grid) {
        row.l1.push_back(cd_eval(h1, theta0 - e));
        row.l2.push_back(cd_eval(h2, theta0 - e));
        row.r1.push_back(1.0 - cd_eval(h1, theta0 + e));
        row.r2.push_back(1.0 - cd_eval(h2, theta0 + e));
      }
      for (double t : quantile_levels) {
        row.w1.push_back(std::fabs(cd_quantile(h1, t) - theta0));
        row.w2.push_back(std::fabs(cd_quantile(h2, t) - theta0));
      }
      row.ok = true;
      rows[r] = std::move(row);
    } catch (const Error&) {
      rows[r] = Row{};
    }
  });

  DominanceReport rep;
  for (int i = 1; i <= 99; ++i) rep.grid.push_back(i / 100.0);
  std::vector<const Row*> good;
  for (const auto& row : rows) {
    if (row.ok) good.push_back(&row);
  }
  rep.reps = good.size();
  rep.failed = reps - good.size();
  require(rep.reps >= 100, ErrorKind::insufficient_replicates, "fewer than 100 paired replicates succeeded");
  rep.tolerance = 2.0 * detail::dkw_half_width(static_cast<double>(rep.reps), 0.05);

  auto column = [&](auto member, std::size_t j) {
    std::vector<double> out;
    out.reserve(good.size());
    for (const Row* row : good) out.push_back(((*row).*member)[j]);
    return out;
  };
  std::vector<Verdict> verdicts;
  for (std::size_t j = 0; j < k; ++j) {
    EpsComparison c;
    c.eps = eps_grid[j];
    c.left = detail::compare_tail(column(&Row::l1, j), column(&Row::l2, j), rep.grid, rep.tolerance);
    c.right = detail::compare_tail(column(&Row::r1, j), column(&Row::r2, j), rep.grid, rep.tolerance);
    c.verdict = detail::combine({c.left.verdict, c.right.verdict});
    verdicts.push_back(c.verdict);
    rep.per_eps.push_back(std::move(c));
  }
  rep.verdict = detail::combine(verdicts);
  if (rep.verdict == Verdict::first_dominates) {
    for (std::size_t j = 0; j < quantile_levels.size(); ++j) {
      rep.interval_widths_consistent = rep.interval_widths_consistent &&
                                       detail::stochastically_smaller(column(&Row::w1, j), column(&Row::w2, j), rep.tolerance);
    }
  }
  return rep;
}

}  // namespace cdkit
