#pragma once

// Bootstrap-based asymptotic CDs: the raw bootstrap distribution, its
// reflection about the estimate, the bootstrap-t construction, and Hall's
// skewness-corrected studentized mean.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "cdkit/cd.hpp"
#include "cdkit/constructors.hpp"
#include "cdkit/error.hpp"
#include "cdkit/parallel.hpp"
#include "cdkit/rng.hpp"

namespace cdkit {

using Statistic = std::function<double(const DataSample&)>;

struct ResamplePlan {
  std::size_t B = 1000;
  RngStream stream{};
  Statistic statistic = [](const DataSample& d) { return d.mean(); };
  Statistic se_estimator;  // required for bootstrap-t
};

/// The usual plan for the mean: statistic xbar, standard error s_n / sqrt(n).
inline ResamplePlan mean_plan(std::size_t B, RngStream stream) {
  return {B, stream, [](const DataSample& d) { return d.mean(); },
          [](const DataSample& d) { return d.sd() / std::sqrt(static_cast<double>(d.n())); }};
}

struct ReplicateRecord {
  std::size_t index = 0;
  double theta = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();  // NaN when no se estimator
  bool usable = true;
};

struct ReplicateSet {
  std::vector<ReplicateRecord> records;
  std::size_t excluded = 0;

  std::size_t usable() const { return records.size() - excluded; }
};

namespace detail {

inline DataSample draw_resample(std::span<const double> values, const RngStream& stream) {
  RngEngine engine(stream);
  std::vector<double> out(values.size());
  for (auto& v : out) v = values[engine.below(values.size())];
  return DataSample(std::move(out));
}

}  // namespace detail

/// B i.i.d.-with-replacement resamples of size n. Replicate b reads its own
/// substream b of the plan's stream, so the set is the same for any worker count.
inline ReplicateSet resample(const DataSample& data, const ResamplePlan& plan) {
  require(plan.B >= 100, ErrorKind::domain, "a resample plan needs B >= 100");
  require(static_cast<bool>(plan.statistic), ErrorKind::domain, "a resample plan needs a statistic");
  ReplicateSet set;
  set.records.resize(plan.B);
  parallel_for(plan.B, [&](std::size_t b) {
    const DataSample star = detail::draw_resample(data.values(), plan.stream.substream(b));
    ReplicateRecord rec{b, plan.statistic(star)};
    if (plan.se_estimator) {
      rec.se = plan.se_estimator(star);
      rec.usable = rec.se > 0.0 && std::isfinite(rec.se);
    }
    rec.usable = rec.usable && std::isfinite(rec.theta);
    set.records[b] = rec;
  });
  for (const auto& r : set.records) set.excluded += r.usable ? 0 : 1;
  return set;
}

namespace detail {

inline void require_replicates(const ReplicateSet& set) {
  require(set.usable() >= 100, ErrorKind::insufficient_replicates,
          "need at least 100 usable replicates, have " + std::to_string(set.usable()));
}

}  // namespace detail

/// H(x) = P_B(theta_B <= x).
inline ConfidenceDistribution raw_bootstrap_cd(const ReplicateSet& set) {
  detail::require_replicates(set);
  std::vector<double> atoms;
  atoms.reserve(set.usable());
  for (const auto& r : set.records)
    if (r.usable) atoms.push_back(r.theta);
  return ConfidenceDistribution::equal_weight_sample(std::move(atoms));
}

/// H(x) = P_B(theta_B >= 2 theta_hat - x): atoms reflected about the estimate.
inline ConfidenceDistribution reflected_bootstrap_cd(const ReplicateSet& set, double theta_hat) {
  detail::require_replicates(set);
  std::vector<double> atoms;
  atoms.reserve(set.usable());
  for (const auto& r : set.records)
    if (r.usable) atoms.push_back(2.0 * theta_hat - r.theta);
  return ConfidenceDistribution::equal_weight_sample(std::move(atoms));
}

/// H(x) = 1 - G((theta_hat - x) / se_hat), G the law of the studentized
/// replicates (theta_B - theta_hat) / SE_B. Stored as the atoms
/// theta_hat - se_hat * t_b, which is the same function away from the atoms.
inline ConfidenceDistribution bootstrap_t_cd(const ReplicateSet& set, double theta_hat, double se_hat) {
  require(se_hat > 0.0 && std::isfinite(se_hat), ErrorKind::domain, "bootstrap-t needs se_hat > 0");
  detail::require_replicates(set);
  std::vector<double> atoms;
  atoms.reserve(set.usable());
  for (const auto& r : set.records) {
    if (!r.usable) continue;
    require(r.se > 0.0, ErrorKind::domain, "bootstrap-t needs a positive replicate standard error");
    atoms.push_back(theta_hat - se_hat * (r.theta - theta_hat) / r.se);
  }
  return ConfidenceDistribution::equal_weight_sample(std::move(atoms));
}

struct BootstrapCd {
  ConfidenceDistribution cd;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// H(x) = 1 - G_B(psi(data, x)) where psi is the skewness-corrected
/// studentized mean and G_B its bootstrap law. Each resample carries its own
/// mean, sd and skewness, centred at the data mean. Stored as the atoms
/// psi^{-1}(psi*_b) so that evaluation and quantiles stay exact.
inline BootstrapCd hall_bootstrap_cd(const DataSample& data, const ResamplePlan& plan) {
  require(data.n() >= 20, ErrorKind::domain, "the corrected pivot needs n >= 20");
  require(plan.B >= 100, ErrorKind::domain, "a resample plan needs B >= 100");
  require(data.sd() > 0.0, ErrorKind::degenerate_sample, "sample standard deviation is zero");
  const std::size_t n = data.n();
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> pivots(plan.B, std::numeric_limits<double>::quiet_NaN());
  parallel_for(plan.B, [&](std::size_t b) {
    const DataSample star = detail::draw_resample(data.values(), plan.stream.substream(b));
    if (!(star.sd() > 0.0)) return;
    const double t = root_n * (star.mean() - data.mean()) / star.sd();
    pivots[b] = hall_transform(t, star.skewness(), n);
  });
  std::vector<double> atoms;
  atoms.reserve(plan.B);
  for (double p : pivots) {
    if (std::isnan(p)) continue;
    const double t = hall_transform_inverse(p, data.skewness(), n);
    atoms.push_back(data.mean() - t * data.sd() / root_n);
  }
  BootstrapCd out{ConfidenceDistribution::grid({0.0}, {1.0}), atoms.size(), plan.B - atoms.size()};
  require(out.used >= 100, ErrorKind::insufficient_replicates,
          "need at least 100 usable replicates, have " + std::to_string(out.used));
  out.cd = ConfidenceDistribution::equal_weight_sample(std::move(atoms));
  return out;
}

}  // namespace cdkit
