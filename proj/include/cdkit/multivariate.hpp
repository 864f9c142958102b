#pragma once

// Joint CDs in R^k stored as clouds of draws of the CD random vector:
// projections, smooth transforms, data depth, and centrality.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cdkit/cd.hpp"
#include "cdkit/error.hpp"
#include "cdkit/ks.hpp"
#include "cdkit/parallel.hpp"
#include "cdkit/rng.hpp"
#include "cdkit/special.hpp"

namespace cdkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// theta_hat, A_n and the condition number of A_n for clouds built from a pivot.
struct PivotProvenance {
  Vector theta_hat;
  Matrix a;
  double condition = 1.0;
};

/// A k-dimensional CD as m draws (one per row).
class MultiCd {
 public:
  explicit MultiCd(Matrix cloud, std::optional<PivotProvenance> provenance = std::nullopt)
      : cloud_(std::move(cloud)), provenance_(std::move(provenance)) {
    require(cloud_.rows() >= 1 && cloud_.cols() >= 1, ErrorKind::domain, "a cloud needs at least one point");
    require(cloud_.allFinite(), ErrorKind::domain, "cloud values must be finite");
  }

  Eigen::Index dim() const { return cloud_.cols(); }
  Eigen::Index size() const { return cloud_.rows(); }
  const Matrix& cloud() const { return cloud_; }
  Vector point(Eigen::Index i) const { return cloud_.row(i).transpose(); }
  const std::optional<PivotProvenance>& provenance() const { return provenance_; }

 private:
  Matrix cloud_;
  std::optional<PivotProvenance> provenance_;
};

/// Draws one eta from G_n using the supplied engine.
using EtaSampler = std::function<Vector(RngEngine&)>;

inline EtaSampler standard_normal_sampler(Eigen::Index k) {
  return [k](RngEngine& engine) {
    Vector v(k);
    for (Eigen::Index j = 0; j < k; ++j) v(j) = special::normal_quantile(engine.uniform());
    return v;
  };
}

inline double condition_number(const Matrix& a) {
  const Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : kInfinity;
}

/// Cloud of m draws theta_hat - A^{-1} eta; draw i uses stream.substream(i).
inline MultiCd lcd_from_pivot(const Vector& theta_hat, const Matrix& a, const EtaSampler& eta, std::size_t m,
                              RngStream stream) {
  const Eigen::Index k = theta_hat.size();
  require(k >= 1 && a.rows() == k && a.cols() == k, ErrorKind::domain, "A must be a k x k matrix");
  require(m >= 1000, ErrorKind::domain, "a pivot cloud needs m >= 1000 draws");
  const double cond = condition_number(a);
  require(std::isfinite(cond) && cond < 1e14, ErrorKind::linear_algebra, "A is singular or numerically singular");
  const Eigen::PartialPivLU<Matrix> lu(a);
  Matrix cloud(static_cast<Eigen::Index>(m), k);
  parallel_for(m, [&](std::size_t i) {
    RngEngine engine(stream.substream(i));
    const Vector e = eta(engine);
    require(e.size() == k, ErrorKind::domain, "eta sampler returned the wrong dimension");
    cloud.row(static_cast<Eigen::Index>(i)) = (theta_hat - lu.solve(e)).transpose();
  });
  return MultiCd(std::move(cloud), PivotProvenance{theta_hat, a, cond});
}

/// The CD of lambda' xi, as an equal-weight sample.
inline ConfidenceDistribution project(const MultiCd& mcd, const Vector& lambda) {
  require(lambda.size() == mcd.dim(), ErrorKind::domain, "lambda has the wrong dimension");
  require(lambda.squaredNorm() > 0.0, ErrorKind::domain, "lambda must be nonzero");
  const Vector values = mcd.cloud() * lambda;
  return ConfidenceDistribution::equal_weight_sample(std::vector<double>(values.data(), values.data() + values.size()));
}

/// Pointwise image cloud g(xi).
inline MultiCd transform_mcd(const MultiCd& mcd, const std::function<Vector(const Vector&)>& g) {
  const Vector first = g(mcd.point(0));
  require(first.size() >= 1, ErrorKind::map_domain, "map returned an empty vector");
  Matrix out(mcd.size(), first.size());
  parallel_for(static_cast<std::size_t>(mcd.size()), [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Vector y = i == 0 ? first : g(mcd.point(r));
    require(y.size() == first.size(), ErrorKind::map_domain, "map changed output dimension");
    require(y.allFinite(), ErrorKind::map_domain, "map is not finite on the cloud");
    out.row(r) = y.transpose();
  });
  return MultiCd(std::move(out));
}

struct DepthSpec {
  enum class Kind { mahalanobis, tukey };
  Kind kind = Kind::mahalanobis;
  int directions = 360;  // Tukey depth in two dimensions
};

inline std::string to_string(DepthSpec::Kind k) { return k == DepthSpec::Kind::mahalanobis ? "mahalanobis" : "tukey"; }

/// Depth relative to a fixed reference cloud. Mahalanobis depth uses the cloud
/// mean and covariance; Tukey depth is exact on the line and uses `directions`
/// equally spaced half-planes in two dimensions.
class DepthFunction {
 public:
  DepthFunction(DepthSpec spec, const MultiCd& reference) : spec_(spec), k_(reference.dim()), m_(reference.size()) {
    const Matrix& c = reference.cloud();
    if (spec.kind == DepthSpec::Kind::mahalanobis) {
      require(m_ > k_, ErrorKind::linear_algebra, "Mahalanobis depth needs more points than dimensions");
      center_ = c.colwise().mean().transpose();
      const Matrix centered = c.rowwise() - center_.transpose();
      const Matrix scatter = centered.transpose() * centered / static_cast<double>(m_ - 1);
      chol_.compute(scatter);
      require(chol_.info() == Eigen::Success, ErrorKind::linear_algebra, "cloud scatter is not positive definite");
      const Eigen::JacobiSVD<Matrix> svd(scatter);
      const auto& s = svd.singularValues();
      require(s(k_ - 1) > 1e-14 * s(0), ErrorKind::linear_algebra, "cloud scatter is singular");
      return;
    }
    require(k_ <= 2, ErrorKind::domain, "Tukey depth is available in one or two dimensions");
    if (k_ == 1) {
      projections_.emplace_back(c.col(0).data(), c.col(0).data() + m_);
      std::sort(projections_.back().begin(), projections_.back().end());
      return;
    }
    require(spec.directions >= 180, ErrorKind::domain, "two-dimensional Tukey depth needs at least 180 directions");
    for (int j = 0; j < spec.directions; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / spec.directions;
      Vector u(2);
      u << std::cos(angle), std::sin(angle);
      directions_.push_back(u);
      const Vector p = c * u;
      projections_.emplace_back(p.data(), p.data() + m_);
      std::sort(projections_.back().begin(), projections_.back().end());
    }
  }

  const DepthSpec& spec() const { return spec_; }
  Eigen::Index dim() const { return k_; }

  double operator()(const Vector& x) const {
    require(x.size() == k_, ErrorKind::domain, "depth query has the wrong dimension");
    if (spec_.kind == DepthSpec::Kind::mahalanobis) {
      const Vector d = x - center_;
      return 1.0 / (1.0 + d.dot(chol_.solve(d)));
    }
    const double m = static_cast<double>(m_);
    if (k_ == 1) {
      const auto& s = projections_.front();
      const double below_or_at = static_cast<double>(std::upper_bound(s.begin(), s.end(), x(0)) - s.begin());
      const double below = static_cast<double>(std::lower_bound(s.begin(), s.end(), x(0)) - s.begin());
      return std::min(below_or_at, m - below) / m;
    }
    double best = 1.0;
    for (std::size_t j = 0; j < directions_.size(); ++j) {
      // fraction of points y with u'y >= u'x
      const auto& s = projections_[j];
      const double t = directions_[j].dot(x);
      const double at_or_above = static_cast<double>(s.end() - std::lower_bound(s.begin(), s.end(), t));
      best = std::min(best, at_or_above / m);
    }
    return best;
  }

 private:
  DepthSpec spec_;
  Eigen::Index k_;
  Eigen::Index m_;
  Vector center_;
  Eigen::LLT<Matrix> chol_;
  std::vector<Vector> directions_;
  std::vector<std::vector<double>> projections_;
};

inline double depth(const DepthSpec& spec, const MultiCd& cloud, const Vector& x) {
  return DepthFunction(spec, cloud)(x);
}

/// C(x): fraction of the reference cloud whose depth is <= depth(x). Ties
/// count as "<=".
class Centrality {
 public:
  Centrality(DepthSpec spec, const MultiCd& reference) : depth_(spec, reference) {
    sorted_depths_.resize(static_cast<std::size_t>(reference.size()));
    parallel_for(sorted_depths_.size(),
                 [&](std::size_t i) { sorted_depths_[i] = depth_(reference.point(static_cast<Eigen::Index>(i))); });
    std::sort(sorted_depths_.begin(), sorted_depths_.end());
  }

  double depth(const Vector& x) const { return depth_(x); }

  double operator()(const Vector& x) const {
    const double d = depth_(x);
    const auto it = std::upper_bound(sorted_depths_.begin(), sorted_depths_.end(), d);
    return static_cast<double>(it - sorted_depths_.begin()) / static_cast<double>(sorted_depths_.size());
  }

  const std::vector<double>& sorted_depths() const { return sorted_depths_; }

 private:
  DepthFunction depth_;
  std::vector<double> sorted_depths_;
};

inline double centrality(const Centrality& cf, const Vector& x) { return cf(x); }

/// Membership of x in the central region {C >= 1 - level}.
inline bool central_region_test(const Centrality& cf, double level, const Vector& x) {
  require(level > 0.0 && level < 1.0, ErrorKind::domain, "level must lie in (0, 1)");
  return cf(x) >= 1.0 - level;
}

/// 2 min(H(x), 1 - H(x)).
inline double ccf_1d(const ConfidenceDistribution& h, double x) {
  const double v = cd_eval(h, x);
  return 2.0 * std::min(v, 1.0 - v);
}

/// Mean of a k-variate normal with known covariance. Replicate r draws its
/// data from RngStream{seed, r}.substream(0) and its cloud from .substream(1);
/// the cloud is x-bar - A^{-1} eta with A = sqrt(n) Sigma^{-1/2}.
struct GaussianMeanModel {
  Vector theta0;
  Matrix sigma;
  std::size_t n = 20;
  std::uint64_t seed = 1;

  void validate() const {
    require(theta0.size() >= 1 && sigma.rows() == theta0.size() && sigma.cols() == theta0.size(), ErrorKind::config,
            "sigma must be a k x k matrix matching theta0");
    require(n >= 2, ErrorKind::config, "n must be at least 2");
    require(sigma.isApprox(sigma.transpose()), ErrorKind::config, "sigma must be symmetric");
    require(Eigen::LLT<Matrix>(sigma).info() == Eigen::Success, ErrorKind::linear_algebra,
            "sigma must be positive definite");
  }

  Vector sample_mean(std::uint64_t rep) const {
    RngEngine engine(RngStream{seed, rep}.substream(0));
    const Matrix root = Eigen::LLT<Matrix>(sigma).matrixL();
    const auto eta = standard_normal_sampler(theta0.size());
    Vector total = Vector::Zero(theta0.size());
    for (std::size_t i = 0; i < n; ++i) total += theta0 + root * eta(engine);
    return total / static_cast<double>(n);
  }

  MultiCd cloud(std::uint64_t rep, std::size_t m) const {
    const Matrix a = std::sqrt(static_cast<double>(n)) * Eigen::SelfAdjointEigenSolver<Matrix>(sigma).operatorInverseSqrt();
    return lcd_from_pivot(sample_mean(rep), a, standard_normal_sampler(theta0.size()), m,
                          RngStream{seed, rep}.substream(1));
  }
};

struct MvCoverageReport {
  std::vector<double> centrality;  // C_r(theta0), one per replicate
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;
  std::vector<double> levels;
  std::vector<double> coverage;  // fraction of replicates with theta0 in the central region
  std::vector<double> se;
};

/// Monte Carlo calibration of the centrality function at theta0 and coverage
/// of the central regions {C >= 1 - level}.
inline MvCoverageReport mv_coverage(const GaussianMeanModel& model, const DepthSpec& spec,
                                    const std::vector<double>& levels, std::size_t reps, std::size_t m) {
  model.validate();
  require(reps >= 100, ErrorKind::domain, "Monte Carlo experiments need reps >= 100");
  for (double l : levels) require(l > 0.0 && l < 1.0, ErrorKind::domain, "levels must lie in (0, 1)");
  MvCoverageReport out;
  out.centrality.resize(reps);
  parallel_for(reps, [&](std::size_t r) {
    const Centrality cf(spec, model.cloud(r, m));
    out.centrality[r] = cf(model.theta0);
  });
  const KsResult ks = ks_uniform(out.centrality);
  out.ks_statistic = ks.statistic;
  out.ks_p_value = ks.p_value;
  out.levels = levels;
  for (double l : levels) {
    const double hits = static_cast<double>(
        std::count_if(out.centrality.begin(), out.centrality.end(), [&](double c) { return c >= 1.0 - l; }));
    const double p = hits / static_cast<double>(reps);
    out.coverage.push_back(p);
    out.se.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(reps)));
  }
  return out;
}

}  // namespace cdkit
