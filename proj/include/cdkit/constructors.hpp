#pragma once

// CDs from data: the generic pivot substitution H(x) = G(psi(data, x)) and the
// closed-form constructions for normal means, normal variances, correlations
// (Fisher's z) plus the skewness-corrected studentized mean pivot.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cdkit/cd.hpp"
#include "cdkit/distributions.hpp"
#include "cdkit/error.hpp"
#include "cdkit/special.hpp"

namespace cdkit {

class DataSample {
 public:
  explicit DataSample(std::vector<double> values) : values_(std::move(values)) {
    require(values_.size() >= 2, ErrorKind::domain, "a data sample needs n >= 2");
    for (double v : values_) require(std::isfinite(v), ErrorKind::domain, "data values must be finite");
    const double n = static_cast<double>(values_.size());
    mean_ = numeric::pairwise_sum(values_) / n;
    std::vector<double> sq(values_.size()), cube(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double d = values_[i] - mean_;
      sq[i] = d * d;
      cube[i] = d * d * d;
    }
    const double ss = numeric::pairwise_sum(sq);
    sd_ = std::sqrt(ss / (n - 1.0));
    const double m3 = numeric::pairwise_sum(cube) / n;
    skewness_ = sd_ > 0.0 ? m3 / (sd_ * sd_ * sd_) : 0.0;
  }

  std::span<const double> values() const { return values_; }
  std::size_t n() const { return values_.size(); }
  double mean() const { return mean_; }
  /// Standard deviation with divisor n - 1.
  double sd() const { return sd_; }
  /// m3 / sd^3 with the third central moment taken over n.
  double skewness() const { return skewness_; }

 private:
  std::vector<double> values_;
  double mean_ = 0.0;
  double sd_ = 0.0;
  double skewness_ = 0.0;
};

class PairedSample {
 public:
  PairedSample(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    require(x_.size() == y_.size(), ErrorKind::domain, "paired sample columns differ in length");
    require(x_.size() >= 4, ErrorKind::domain, "a paired sample needs n >= 4");
    const double n = static_cast<double>(x_.size());
    const double mx = numeric::pairwise_sum(x_) / n;
    const double my = numeric::pairwise_sum(y_) / n;
    std::vector<double> sxx(x_.size()), syy(x_.size()), sxy(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      require(std::isfinite(x_[i]) && std::isfinite(y_[i]), ErrorKind::domain, "data values must be finite");
      sxx[i] = (x_[i] - mx) * (x_[i] - mx);
      syy[i] = (y_[i] - my) * (y_[i] - my);
      sxy[i] = (x_[i] - mx) * (y_[i] - my);
    }
    const double vx = numeric::pairwise_sum(sxx);
    const double vy = numeric::pairwise_sum(syy);
    require(vx > 0.0 && vy > 0.0, ErrorKind::degenerate_sample, "paired sample has a constant margin");
    r_ = std::clamp(numeric::pairwise_sum(sxy) / std::sqrt(vx * vy), -1.0, 1.0);
  }

  std::size_t n() const { return x_.size(); }
  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  double correlation() const { return r_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  double r_ = 0.0;
};

/// A pivot psi(data, theta), its monotone direction in theta, and its law.
template <class Data>
struct PivotSpec {
  std::function<double(const Data&, double)> psi;
  Direction direction = Direction::increasing;
  DistKind law = normal();
  Support support{};
};

/// Substitution: H(x) = G(psi(data, x)) for increasing psi, 1 - G(psi(data, x))
/// for decreasing psi. The monotone direction is spot-checked on 101 points
/// spanning the resulting CD's 0.001-0.999 quantile range.
template <class Data>
ConfidenceDistribution from_pivot(const PivotSpec<Data>& spec, const Data& data) {
  validate(spec.law);
  const bool increasing = spec.direction == Direction::increasing;
  const auto psi = spec.psi;
  const DistKind law = spec.law;
  AnalyticRepr r;
  r.cdf = [=](double x) { return increasing ? cdf(law, psi(data, x)) : sf(law, psi(data, x)); };
  r.log_cdf = [=](double x) { return log_tail(law, psi(data, x), increasing ? Side::lower : Side::upper); };
  r.log_sf = [=](double x) { return log_tail(law, psi(data, x), increasing ? Side::upper : Side::lower); };
  auto h = ConfidenceDistribution::analytic(spec.support, std::move(r));

  const double lo = h.quantile(0.001);
  const double hi = h.quantile(0.999);
  if (hi > lo) {
    double prev = psi(data, lo);
    for (int i = 1; i <= 100; ++i) {
      const double v = psi(data, lo + (hi - lo) * i / 100.0);
      require(increasing ? v > prev : v < prev, ErrorKind::monotonicity_violation,
              "pivot is not monotone in theta in the declared direction");
      prev = v;
    }
  }
  return h;
}

/// CD for a normal mean: Phi((x - xbar) / (sigma / sqrt n)) with sigma known,
/// F_{t, n-1}((x - xbar) / (s_n / sqrt n)) otherwise.
inline ConfidenceDistribution normal_mean_cd(const DataSample& data, std::optional<double> sigma = std::nullopt) {
  const double root_n = std::sqrt(static_cast<double>(data.n()));
  if (sigma) {
    require(*sigma > 0.0, ErrorKind::parameter_domain, "sigma must be positive");
    return location_scale_cd(normal(), data.mean(), *sigma / root_n);
  }
  require(data.sd() > 0.0, ErrorKind::degenerate_sample, "sample standard deviation is zero");
  return location_scale_cd(student_t(static_cast<double>(data.n() - 1)), data.mean(), data.sd() / root_n);
}

/// CD for a normal variance: H(x) = P(chi2_{n-1} >= (n - 1) s_n^2 / x) on (0, inf).
inline ConfidenceDistribution normal_variance_cd(const DataSample& data) {
  require(data.sd() > 0.0, ErrorKind::degenerate_sample, "sample standard deviation is zero");
  const double df = static_cast<double>(data.n() - 1);
  const double c = df * data.sd() * data.sd();
  const DistKind law = chi_square(df);
  AnalyticRepr r;
  r.cdf = [=](double x) { return x <= 0.0 ? 0.0 : sf(law, c / x); };
  r.density = [=](double x) { return x <= 0.0 ? 0.0 : density(law, c / x) * c / (x * x); };
  r.quantile = [=](double s) { return c / quantile_upper(law, s); };
  r.log_cdf = [=](double x) { return x <= 0.0 ? -kInfinity : log_tail(law, c / x, Side::upper); };
  r.log_sf = [=](double x) { return x <= 0.0 ? 0.0 : log_tail(law, c / x, Side::lower); };
  return ConfidenceDistribution::analytic(Support{0.0, kInfinity}, std::move(r));
}

/// Asymptotic CD for a correlation via Fisher's z:
/// H(x) = Phi(sqrt(n - 3) (atanh x - atanh r)) on (-1, 1).
inline ConfidenceDistribution fisher_z_corr_cd(const PairedSample& data) {
  const double r = data.correlation();
  require(std::fabs(r) < 1.0, ErrorKind::degenerate_sample, "sample correlation is +-1");
  const double z = std::atanh(r);
  const double k = std::sqrt(static_cast<double>(data.n()) - 3.0);
  AnalyticRepr rep;
  rep.cdf = [=](double x) { return special::normal_cdf(k * (std::atanh(x) - z)); };
  rep.density = [=](double x) { return special::normal_pdf(k * (std::atanh(x) - z)) * k / (1.0 - x * x); };
  rep.quantile = [=](double s) { return std::tanh(z + special::normal_quantile(s) / k); };
  rep.log_cdf = [=](double x) { return special::normal_log_cdf(k * (std::atanh(x) - z)); };
  rep.log_sf = [=](double x) { return special::normal_log_cdf(-k * (std::atanh(x) - z)); };
  return ConfidenceDistribution::analytic(Support{-1.0, 1.0}, std::move(rep));
}

/// Hall's skewness correction of a studentized statistic t:
/// t + (lambda / (6 sqrt n)) (2 t^2 + 1) + (lambda^2 / (27 n)) t^3.
inline double hall_transform(double t, double skewness, std::size_t n) {
  const double nn = static_cast<double>(n);
  const double a = skewness / (6.0 * std::sqrt(nn));
  const double b = skewness * skewness / (27.0 * nn);
  return t + a * (2.0 * t * t + 1.0) + b * t * t * t;
}

/// Inverse of hall_transform in t. With a = lambda / (6 sqrt n) the transform
/// equals a + ((1 + 2 a t)^3 - 1) / (6 a), so it is increasing and has a
/// closed-form inverse.
inline double hall_transform_inverse(double psi, double skewness, std::size_t n) {
  const double a = skewness / (6.0 * std::sqrt(static_cast<double>(n)));
  if (std::fabs(a) < 1e-12) return psi - a;
  return (std::cbrt(1.0 + 6.0 * a * (psi - a)) - 1.0) / (2.0 * a);
}

/// The corrected pivot at mean value mu, with t = sqrt(n) (xbar - mu) / s_n.
inline double hall_pivot(const DataSample& data, double mu) {
  require(data.sd() > 0.0, ErrorKind::degenerate_sample, "sample standard deviation is zero");
  const double t = std::sqrt(static_cast<double>(data.n())) * (data.mean() - mu) / data.sd();
  return hall_transform(t, data.skewness(), data.n());
}

}  // namespace cdkit
