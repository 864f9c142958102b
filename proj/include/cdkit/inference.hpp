#pragma once

// Point estimates from a CD (median, mean, mode) and the strong, weak, and
// intersection-union supports of a null region.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "cdkit/cd.hpp"
#include "cdkit/error.hpp"
#include "cdkit/numeric.hpp"
#include "cdkit/special.hpp"

namespace cdkit {

/// A null region: disjoint closed intervals (infinite ends allowed) or a
/// finite set of points. Both lists are kept sorted.
class NullRegion {
 public:
  static NullRegion intervals(std::vector<Interval> parts) {
    require(!parts.empty(), ErrorKind::domain, "null region needs at least one interval");
    for (const auto& p : parts) {
      require(!std::isnan(p.lo) && !std::isnan(p.hi) && p.lo <= p.hi, ErrorKind::domain,
              "null region interval must satisfy lo <= hi");
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < parts.size(); ++i) {
      require(parts[i - 1].hi < parts[i].lo, ErrorKind::domain, "null region intervals must be disjoint");
    }
    NullRegion r;
    r.parts_ = std::move(parts);
    return r;
  }

  static NullRegion points(std::vector<double> thetas) {
    require(!thetas.empty(), ErrorKind::domain, "null region needs at least one point");
    for (double t : thetas) require(std::isfinite(t), ErrorKind::domain, "null region points must be finite");
    std::sort(thetas.begin(), thetas.end());
    require(std::adjacent_find(thetas.begin(), thetas.end()) == thetas.end(), ErrorKind::domain,
            "null region points must be distinct");
    NullRegion r;
    r.is_points_ = true;
    r.points_ = std::move(thetas);
    return r;
  }

  bool is_points() const { return is_points_; }
  const std::vector<Interval>& interval_list() const { return parts_; }
  const std::vector<double>& point_list() const { return points_; }
  std::size_t size() const { return is_points_ ? points_.size() : parts_.size(); }

 private:
  NullRegion() = default;
  bool is_points_ = false;
  std::vector<Interval> parts_;
  std::vector<double> points_;
};

struct ComponentSupport {
  double p_s = 0.0;
  double p_w = 0.0;
};

struct SupportReport {
  double p_s = 0.0;
  double p_w = 0.0;
  double p_s_star = 0.0;  // only meaningful for interval regions
  bool points_region = false;
  std::vector<ComponentSupport> per_component;
};

namespace detail {

/// H(x-) : the CD mass strictly below x.
inline double eval_left(const ConfidenceDistribution& h, double x) {
  if (const auto* s = std::get_if<SampleRepr>(&h.repr())) {
    const auto it = std::lower_bound(s->atoms.begin(), s->atoms.end(), x);
    if (it == s->atoms.begin()) return 0.0;
    return s->cumulative[static_cast<std::size_t>(it - s->atoms.begin()) - 1];
  }
  if (x == -kInfinity) return 0.0;
  return h.eval(x);
}

inline double eval_ext(const ConfidenceDistribution& h, double x) {
  if (x == kInfinity) return 1.0;
  if (x == -kInfinity) return 0.0;
  return h.eval(x);
}

/// A quantile tail with s f(Q(s)) not decaying between s = 1e-6 and 1e-9
/// carries f-mass like |t|^-1 or heavier, so the integral of f diverges.
template <class F>
void require_tail_integrable(const ConfidenceDistribution& h, F f) {
  for (const bool upper : {false, true}) {
    const double q6 = h.quantile(upper ? 1.0 - 1e-6 : 1e-6);
    const double q9 = h.quantile(upper ? 1.0 - 1e-9 : 1e-9);
    const double near = 1e-6 * f(q6), far = 1e-9 * f(q9);
    if (!std::isfinite(far) || (far > 1e-12 && far >= 0.5 * near)) {
      fail(ErrorKind::nonintegrable, std::string("CD ") + (upper ? "upper" : "lower") + " tail is too heavy to integrate");
    }
  }
}

inline double two_min(double v) { return 2.0 * std::min(v, 1.0 - v); }

/// sup over theta in [lo, hi] of 2 min(H(theta), 1 - H(theta)).
inline double weak_on_interval(const ConfidenceDistribution& h, Interval c) {
  if (const auto* s = std::get_if<SampleRepr>(&h.repr())) {
    // H is a step function; on [lo, hi] it takes the value H(lo) and the
    // cumulative weights of atoms in (lo, hi]. Pick the values nearest 1/2.
    const double start = eval_ext(h, c.lo);
    const auto first = std::upper_bound(s->atoms.begin(), s->atoms.end(), c.lo);
    const auto last = std::upper_bound(s->atoms.begin(), s->atoms.end(), c.hi);
    const auto cb = s->cumulative.begin() + (first - s->atoms.begin());
    const auto ce = s->cumulative.begin() + (last - s->atoms.begin());
    double best = two_min(start);
    const auto above = std::lower_bound(cb, ce, 0.5);
    if (above != ce) best = std::max(best, two_min(*above));
    if (above != cb) best = std::max(best, two_min(*(above - 1)));
    return best;
  }
  const double median = h.quantile(0.5);
  if (c.lo <= median && median <= c.hi) return two_min(h.eval(median));
  return two_min(eval_ext(h, median < c.lo ? c.lo : c.hi));
}

}  // namespace detail

inline double cd_median(const ConfidenceDistribution& h) { return cd_quantile(h, 0.5); }

/// Mean of the CD. Analytic CDs integrate the quantile function in normal
/// scores, s = Phi(z) for z in [-7.5, 7.5], with a 1024-node midpoint rule.
/// Sample and grid CDs are finite mixtures of atoms and uniform segments and
/// use the exact sum.
inline double cd_mean(const ConfidenceDistribution& h) {
  if (const auto* s = std::get_if<SampleRepr>(&h.repr())) {
    std::vector<double> terms(s->atoms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = s->atoms[i] * s->weights[i];
    return numeric::pairwise_sum(terms);
  }
  if (const auto* g = std::get_if<GridRepr>(&h.repr())) {
    std::vector<double> terms{g->value.front() * g->theta.front(), (1.0 - g->value.back()) * g->theta.back()};
    for (std::size_t i = 0; i + 1 < g->theta.size(); ++i) {
      terms.push_back((g->value[i + 1] - g->value[i]) * 0.5 * (g->theta[i] + g->theta[i + 1]));
    }
    return numeric::pairwise_sum(terms);
  }
  detail::require_tail_integrable(h, [](double t) { return std::fabs(t); });
  constexpr int kNodes = 1024;
  constexpr double kZ = 7.5;
  const double dz = 2.0 * kZ / kNodes;
  std::vector<double> terms(kNodes);
  double weight = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double z = -kZ + (i + 0.5) * dz;
    const double w = special::normal_pdf(z) * dz;
    terms[static_cast<std::size_t>(i)] = w * h.quantile(special::normal_cdf(z));
    weight += w;
  }
  return numeric::pairwise_sum(terms) / weight;
}

/// Mode of the CD density. Grid CDs return the midpoint of the steepest
/// segment; analytic CDs use golden-section search between the 0.001 and
/// 0.999 quantiles.
inline double cd_mode(const ConfidenceDistribution& h) {
  if (h.is_sample()) fail(ErrorKind::unsupported_representation, "a weighted-sample CD has no density");
  if (const auto* g = std::get_if<GridRepr>(&h.repr())) {
    require(g->theta.size() >= 2, ErrorKind::unsupported_representation, "a point-mass grid CD has no density");
    std::size_t best = 0;
    double steepest = -1.0;
    for (std::size_t i = 0; i + 1 < g->theta.size(); ++i) {
      const double slope = (g->value[i + 1] - g->value[i]) / (g->theta[i + 1] - g->theta[i]);
      if (slope > steepest) {
        steepest = slope;
        best = i;
      }
    }
    return 0.5 * (g->theta[best] + g->theta[best + 1]);
  }
  const double lo = h.quantile(0.001), hi = h.quantile(0.999);
  return numeric::golden_section_maximize([&](double x) { return h.density(x); }, lo, hi, 1e-8);
}

/// CD content of the region. For points, this is the atom mass at each point
/// (zero for a continuous CD) and the report is flagged.
inline SupportReport support_report(const ConfidenceDistribution& h, const NullRegion& region) {
  SupportReport r;
  r.points_region = region.is_points();
  if (region.is_points()) {
    for (double t : region.point_list()) {
      r.per_component.push_back({h.eval(t) - detail::eval_left(h, t), detail::two_min(h.eval(t))});
    }
  } else {
    for (const auto& c : region.interval_list()) {
      const double content = std::max(0.0, detail::eval_ext(h, c.hi) - detail::eval_left(h, c.lo));
      r.per_component.push_back({content, detail::weak_on_interval(h, c)});
    }
  }
  std::vector<double> contents;
  for (const auto& c : r.per_component) {
    contents.push_back(c.p_s);
    r.p_w = std::max(r.p_w, c.p_w);
    r.p_s_star = std::max(r.p_s_star, c.p_s);
  }
  r.p_s = std::min(1.0, numeric::pairwise_sum(contents));
  return r;
}

inline double strong_support(const ConfidenceDistribution& h, const NullRegion& region) {
  return support_report(h, region).p_s;
}

inline double weak_support(const ConfidenceDistribution& h, const NullRegion& region) {
  return support_report(h, region).p_w;
}

inline double iut_support(const ConfidenceDistribution& h, const NullRegion& region) {
  require(!region.is_points(), ErrorKind::domain, "intersection-union support needs an interval region");
  return support_report(h, region).p_s_star;
}

/// Index of the region with the largest CD content; ties go to the lowest
/// index. The regions must tile the CD support up to total measure 1e-9.
inline std::size_t classify(const ConfidenceDistribution& h, const std::vector<NullRegion>& partition) {
  require(!partition.empty(), ErrorKind::partition_invalid, "empty partition");
  std::vector<Interval> all;
  for (const auto& region : partition) {
    for (const auto& c : region.interval_list()) all.push_back(c);
  }
  require(!all.empty(), ErrorKind::partition_invalid, "partition has no intervals");
  std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  const Support& s = h.support();
  auto gap = [](double a, double b) { return a == b ? 0.0 : b - a; };
  double gaps = std::max(0.0, gap(s.lo, all.front().lo));
  double overlaps = 0.0;
  double reach = all.front().hi;
  for (std::size_t i = 1; i < all.size(); ++i) {
    const double d = gap(reach, all[i].lo);
    if (d > 0.0) gaps += d;
    if (d < 0.0) overlaps += std::min(-d, gap(all[i].lo, std::min(reach, all[i].hi)));
    reach = std::max(reach, all[i].hi);
  }
  gaps += std::max(0.0, gap(reach, s.hi));
  require(!(gaps > 1e-9), ErrorKind::partition_invalid, "partition leaves part of the support uncovered");
  require(!(overlaps > 1e-9), ErrorKind::partition_invalid, "partition regions overlap");

  std::size_t best = 0;
  double best_content = -1.0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const double content = partition[i].is_points() ? 0.0 : strong_support(h, partition[i]);
    if (content > best_content) {
      best_content = content;
      best = i;
    }
  }
  return best;
}

}  // namespace cdkit
