#pragma once

// The confidence-distribution value type. A CD is a distribution function on
// the parameter space built from data; it is stored in one of three forms:
//   - analytic: a cdf evaluator, optionally with density, inverse and log tails;
//   - grid: knots (theta_i, H_i) with monotone linear interpolation;
//   - weighted sample: atoms with nonnegative weights summing to one.
// Values are immutable once built and share their payload on copy.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cdkit/distributions.hpp"
#include "cdkit/error.hpp"
#include "cdkit/numeric.hpp"
#include "cdkit/rng.hpp"

namespace cdkit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// The parameter space, an interval of the real line (edges may be infinite).
struct Support {
  double lo = -kInfinity;
  double hi = kInfinity;

  bool contains(double x) const { return x >= lo && x <= hi; }
  friend bool operator==(const Support&, const Support&) = default;
};

using RealFn = std::function<double(double)>;

struct AnalyticRepr {
  RealFn cdf;
  RealFn density;   // optional
  RealFn quantile;  // optional; must be the generalized inverse of cdf
  RealFn log_cdf;   // optional; log H(x) without underflow
  RealFn log_sf;    // optional; log(1 - H(x)) without underflow
};

struct GridRepr {
  std::vector<double> theta;
  std::vector<double> value;
};

struct SampleRepr {
  std::vector<double> atoms;
  std::vector<double> weights;
  std::vector<double> cumulative;
};

using CdRepr = std::variant<AnalyticRepr, GridRepr, SampleRepr>;

class ConfidenceDistribution {
 public:
  static ConfidenceDistribution analytic(Support support, AnalyticRepr repr) {
    require(static_cast<bool>(repr.cdf), ErrorKind::domain, "analytic CD needs a cdf evaluator");
    require(support.lo < support.hi, ErrorKind::domain, "support must be a nondegenerate interval");
    return ConfidenceDistribution(support, std::move(repr));
  }

  /// Knots must have strictly increasing abscissae and nondecreasing values in
  /// [0, 1]. A single knot is a point mass at that abscissa.
  static ConfidenceDistribution grid(std::vector<double> theta, std::vector<double> value,
                                     std::optional<Support> support = std::nullopt) {
    require(!theta.empty() && theta.size() == value.size(), ErrorKind::domain,
            "grid needs equally many (>= 1) abscissae and values");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      require(std::isfinite(theta[i]) && std::isfinite(value[i]), ErrorKind::domain, "grid entries must be finite");
      require(value[i] >= 0.0 && value[i] <= 1.0, ErrorKind::domain, "grid values must lie in [0, 1]");
      if (i > 0) {
        require(theta[i] > theta[i - 1], ErrorKind::domain, "grid abscissae must be strictly increasing");
        require(value[i] >= value[i - 1], ErrorKind::monotonicity_violation, "grid values must be nondecreasing");
      }
    }
    const Support s = support.value_or(Support{theta.front(), theta.back()});
    return ConfidenceDistribution(s, GridRepr{std::move(theta), std::move(value)});
  }

  static ConfidenceDistribution weighted_sample(std::vector<double> atoms, std::vector<double> weights) {
    require(!atoms.empty() && atoms.size() == weights.size(), ErrorKind::domain,
            "weighted sample needs equally many (>= 1) atoms and weights");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      require(std::isfinite(atoms[i]), ErrorKind::domain, "atoms must be finite");
      require(weights[i] >= 0.0 && std::isfinite(weights[i]), ErrorKind::domain, "weights must be nonnegative");
    }
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    SampleRepr r;
    r.atoms.reserve(atoms.size());
    r.weights.reserve(atoms.size());
    for (std::size_t i : order) {
      r.atoms.push_back(atoms[i]);
      r.weights.push_back(weights[i]);
    }
    const double total = numeric::pairwise_sum(r.weights);
    require(total > 0.0, ErrorKind::domain, "weights must not all be zero");
    // Equal weights (however scaled) get cumulative values k/m exactly, so a
    // resample CD reads back from disk unchanged; otherwise the raw partial
    // sums are divided once by the total.
    r.cumulative.resize(r.weights.size());
    const bool equal = std::all_of(r.weights.begin(), r.weights.end(), [&](double w) { return w == r.weights.front(); });
    if (equal) {
      const double m = static_cast<double>(r.weights.size());
      for (std::size_t i = 0; i < r.cumulative.size(); ++i) r.cumulative[i] = static_cast<double>(i + 1) / m;
    } else {
      std::partial_sum(r.weights.begin(), r.weights.end(), r.cumulative.begin());
      for (double& c : r.cumulative) c = std::min(1.0, c / total);
    }
    r.cumulative.back() = 1.0;
    for (double& w : r.weights) w /= total;
    const Support s{r.atoms.front(), r.atoms.back()};
    return ConfidenceDistribution(s, std::move(r));
  }

  static ConfidenceDistribution equal_weight_sample(std::vector<double> atoms) {
    std::vector<double> w(atoms.size(), 1.0);
    return weighted_sample(std::move(atoms), std::move(w));
  }

  const Support& support() const { return support_; }
  const CdRepr& repr() const { return *repr_; }
  bool is_analytic() const { return std::holds_alternative<AnalyticRepr>(*repr_); }
  bool is_grid() const { return std::holds_alternative<GridRepr>(*repr_); }
  bool is_sample() const { return std::holds_alternative<SampleRepr>(*repr_); }

  /// H(x), clamped to [0, 1].
  double eval(double x) const {
    require(!std::isnan(x), ErrorKind::domain, "cd_eval at NaN");
    if (const auto* a = std::get_if<AnalyticRepr>(repr_.get())) {
      if (x < support_.lo) return 0.0;
      if (x >= support_.hi) return 1.0;
      return std::clamp(a->cdf(x), 0.0, 1.0);
    }
    if (const auto* g = std::get_if<GridRepr>(repr_.get())) {
      if (g->theta.size() == 1) return x < g->theta.front() ? 0.0 : 1.0;
      if (x <= g->theta.front()) return g->value.front();
      if (x >= g->theta.back()) return g->value.back();
      const auto it = std::upper_bound(g->theta.begin(), g->theta.end(), x);
      const std::size_t j = static_cast<std::size_t>(it - g->theta.begin());
      const double t = (x - g->theta[j - 1]) / (g->theta[j] - g->theta[j - 1]);
      return std::clamp(g->value[j - 1] + t * (g->value[j] - g->value[j - 1]), 0.0, 1.0);
    }
    const auto& s = std::get<SampleRepr>(*repr_);
    const auto it = std::upper_bound(s.atoms.begin(), s.atoms.end(), x);
    if (it == s.atoms.begin()) return 0.0;
    return s.cumulative[static_cast<std::size_t>(it - s.atoms.begin()) - 1];
  }

  /// Generalized inverse inf{x : H(x) >= s}.
  double quantile(double s) const {
    require(s > 0.0 && s < 1.0, ErrorKind::domain, "CD quantile level must lie in (0, 1)");
    if (const auto* a = std::get_if<AnalyticRepr>(repr_.get())) {
      if (a->quantile) return a->quantile(s);
      return invert_analytic(s);
    }
    if (const auto* g = std::get_if<GridRepr>(repr_.get())) {
      const auto it = std::lower_bound(g->value.begin(), g->value.end(), s);
      if (it == g->value.end()) return g->theta.back();
      const std::size_t j = static_cast<std::size_t>(it - g->value.begin());
      if (j == 0) return g->theta.front();
      const double dv = g->value[j] - g->value[j - 1];
      const double t = (s - g->value[j - 1]) / dv;
      return g->theta[j - 1] + t * (g->theta[j] - g->theta[j - 1]);
    }
    const auto& r = std::get<SampleRepr>(*repr_);
    const auto it = std::lower_bound(r.cumulative.begin(), r.cumulative.end(), s - 1e-12);
    const std::size_t j = std::min(static_cast<std::size_t>(it - r.cumulative.begin()), r.atoms.size() - 1);
    return r.atoms[j];
  }

  /// h(x) = H'(x). Analytic derivative when supplied, slope of the active
  /// segment for grids, central difference otherwise.
  double density(double x) const {
    if (const auto* a = std::get_if<AnalyticRepr>(repr_.get())) {
      if (x < support_.lo || x > support_.hi) return 0.0;
      if (a->density) return std::max(0.0, a->density(x));
      const double h = std::max(1e-6, 1e-6 * std::fabs(x));
      return std::max(0.0, (eval(x + h) - eval(x - h)) / (2.0 * h));
    }
    if (const auto* g = std::get_if<GridRepr>(repr_.get())) {
      if (x < g->theta.front() || x >= g->theta.back()) return 0.0;
      const auto it = std::upper_bound(g->theta.begin(), g->theta.end(), x);
      const std::size_t j = static_cast<std::size_t>(it - g->theta.begin());
      return std::max(0.0, (g->value[j] - g->value[j - 1]) / (g->theta[j] - g->theta[j - 1]));
    }
    fail(ErrorKind::unsupported_representation, "weighted-sample CD has no density");
  }

  bool has_log_tails() const {
    const auto* a = std::get_if<AnalyticRepr>(repr_.get());
    return a && a->log_cdf && a->log_sf;
  }

  /// log H(x); exact in the far tail when the representation provides it.
  double log_cdf(double x) const {
    if (const auto* a = std::get_if<AnalyticRepr>(repr_.get()); a && a->log_cdf) {
      if (x < support_.lo) return -kInfinity;
      if (x >= support_.hi) return 0.0;
      return std::min(0.0, a->log_cdf(x));
    }
    return std::log(eval(x));
  }

  /// log(1 - H(x)).
  double log_sf(double x) const {
    if (const auto* a = std::get_if<AnalyticRepr>(repr_.get()); a && a->log_sf) {
      if (x < support_.lo) return 0.0;
      if (x >= support_.hi) return -kInfinity;
      return std::min(0.0, a->log_sf(x));
    }
    return std::log1p(-eval(x));
  }

 private:
  ConfidenceDistribution(Support support, CdRepr repr)
      : support_(support), repr_(std::make_shared<const CdRepr>(std::move(repr))) {}

  double invert_analytic(double s) const {
    auto gap = [&](double x) { return eval(x) - s; };
    double lo = std::isfinite(support_.lo) ? support_.lo : std::min(-1.0, support_.hi - 1.0);
    double hi = std::isfinite(support_.hi) ? support_.hi : std::max(1.0, support_.lo + 1.0);
    for (double step = 1.0; !std::isfinite(support_.lo) && gap(lo) >= 0.0 && step < 1e300; step *= 2.0) lo -= step;
    for (double step = 1.0; !std::isfinite(support_.hi) && gap(hi) < 0.0 && step < 1e300; step *= 2.0) hi += step;
    return numeric::bisect_increasing(gap, lo, hi);
  }

  Support support_;
  std::shared_ptr<const CdRepr> repr_;
};

inline double cd_eval(const ConfidenceDistribution& h, double x) { return h.eval(x); }
inline double cd_quantile(const ConfidenceDistribution& h, double s) { return h.quantile(s); }
inline double cd_density(const ConfidenceDistribution& h, double x) { return h.density(x); }

/// A CD with its law expressed through a reference distribution: H(x) = F((x - center)/scale).
inline ConfidenceDistribution location_scale_cd(const DistKind& law, double center, double scale,
                                                Support support = {}) {
  require(scale > 0.0 && std::isfinite(scale), ErrorKind::parameter_domain, "scale must be positive");
  validate(law);
  AnalyticRepr r;
  r.cdf = [law, center, scale](double x) { return cdf(law, (x - center) / scale); };
  r.density = [law, center, scale](double x) { return density(law, (x - center) / scale) / scale; };
  r.quantile = [law, center, scale](double s) { return center + scale * quantile(law, s); };
  r.log_cdf = [law, center, scale](double x) { return log_tail(law, (x - center) / scale, Side::lower); };
  r.log_sf = [law, center, scale](double x) { return log_tail(law, (x - center) / scale, Side::upper); };
  return ConfidenceDistribution::analytic(support, std::move(r));
}

/// Draws xi = H^{-1}(U) from a CD. Single consumer: each call advances the stream.
class CdRandomVariable {
 public:
  CdRandomVariable(ConfidenceDistribution source, RngStream stream) : source_(std::move(source)), engine_(stream) {}

  std::vector<double> sample(std::size_t m) {
    std::vector<double> out(m);
    for (auto& v : out) v = source_.quantile(engine_.uniform());
    return out;
  }

  const ConfidenceDistribution& source() const { return source_; }

 private:
  ConfidenceDistribution source_;
  RngEngine engine_;
};

inline std::vector<double> cd_sample(CdRandomVariable& rv, std::size_t m) { return rv.sample(m); }

enum class Direction { increasing, decreasing };

/// The CD of g(theta) for strictly monotone g. Weighted samples map atom by
/// atom; other forms become analytic with g^{-1} from `inverse` or by
/// bracketed root finding.
inline ConfidenceDistribution transform_cd(const ConfidenceDistribution& h, RealFn g, Direction direction,
                                           RealFn inverse = {}) {
  const bool increasing = direction == Direction::increasing;
  // Spot check on 101 points across the central 0.001-0.999 quantile range.
  const double q_lo = h.quantile(0.001);
  const double q_hi = h.quantile(0.999);
  if (q_hi > q_lo) {
    double prev = g(q_lo);
    for (int i = 1; i <= 100; ++i) {
      const double v = g(q_lo + (q_hi - q_lo) * i / 100.0);
      const bool ok = increasing ? v > prev : v < prev;
      require(ok, ErrorKind::monotonicity_violation,
              "transform is not strictly " + std::string(increasing ? "increasing" : "decreasing") +
                  " on the CD's central range");
      prev = v;
    }
  }

  if (const auto* s = std::get_if<SampleRepr>(&h.repr())) {
    std::vector<double> atoms(s->atoms.size());
    std::transform(s->atoms.begin(), s->atoms.end(), atoms.begin(), g);
    return ConfidenceDistribution::weighted_sample(std::move(atoms), s->weights);
  }

  const Support src = h.support();
  auto edge = [&](double x, bool upper_edge) {
    const double v = g(x);
    if (!std::isnan(v)) return v;
    return (upper_edge == increasing) ? kInfinity : -kInfinity;
  };
  const double a = edge(src.lo, false);
  const double b = edge(src.hi, true);
  const Support image{std::min(a, b), std::max(a, b)};

  if (!inverse) {
    inverse = [h, g, increasing, src](double x) {
      auto gap = [&](double t) { return increasing ? g(t) - x : x - g(t); };
      double lo = std::max(h.quantile(0.25), std::nextafter(src.lo, kInfinity));
      double hi = std::min(h.quantile(0.75), std::nextafter(src.hi, -kInfinity));
      if (!(hi > lo)) hi = lo + 1.0;
      const auto br = numeric::expand_bracket(gap, lo, hi, std::nextafter(src.lo, kInfinity),
                                              std::nextafter(src.hi, -kInfinity));
      if (gap(br.lo) > 0.0) return br.lo;
      if (gap(br.hi) < 0.0) return br.hi;
      return numeric::brent_root(gap, br.lo, br.hi, 1e-15);
    };
  }

  AnalyticRepr r;
  r.cdf = [h, inverse, increasing](double x) {
    const double t = inverse(x);
    return increasing ? h.eval(t) : 1.0 - h.eval(t);
  };
  r.quantile = [h, g, increasing](double s) { return g(h.quantile(increasing ? s : 1.0 - s)); };
  return ConfidenceDistribution::analytic(image, std::move(r));
}

struct Interval {
  double lo;
  double hi;
};

/// Equal-tailed region (H^{-1}(alpha/2), H^{-1}(1 - alpha/2)), alpha = 1 - level.
inline Interval central_interval(const ConfidenceDistribution& h, double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::domain, "interval level must lie in (0, 1)");
  const double alpha = 1.0 - level;
  return {h.quantile(0.5 * alpha), h.quantile(1.0 - 0.5 * alpha)};
}

}  // namespace cdkit
