#pragma once

// Seeded Monte Carlo experiments over CD generators: calibration of H(theta0),
// interval coverage, and estimator consistency.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdkit/bootstrap.hpp"
#include "cdkit/cd.hpp"
#include "cdkit/constructors.hpp"
#include "cdkit/error.hpp"
#include "cdkit/inference.hpp"
#include "cdkit/ks.hpp"
#include "cdkit/likelihood.hpp"
#include "cdkit/numeric.hpp"
#include "cdkit/parallel.hpp"
#include "cdkit/rng.hpp"

namespace cdkit {

/// One simulated dataset. `y` is empty except for paired models.
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
};

/// Replicate index -> dataset -> CD, under a known true parameter. Replicate
/// r draws its data from RngStream{seed, r}.substream(0); constructors that
/// resample use RngStream{seed, r}.substream(1).
struct CdGenerator {
  std::string name;
  double theta0 = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::function<Dataset(RngStream)> simulate;
  std::function<ConfidenceDistribution(const Dataset&, RngStream)> build;

  RngStream data_stream(std::uint64_t rep) const { return RngStream{seed, rep}.substream(0); }
  RngStream aux_stream(std::uint64_t rep) const { return RngStream{seed, rep}.substream(1); }
  Dataset dataset(std::uint64_t rep) const { return simulate(data_stream(rep)); }
  ConfidenceDistribution cd(std::uint64_t rep) const { return build(dataset(rep), aux_stream(rep)); }
};

struct GeneratorConfig {
  std::string model = "normal-mean-known-sigma";
  std::string constructor = "pivot";
  std::size_t n = 20;
  double theta0 = 0.0;
  std::uint64_t seed = 1;
  double sigma = 1.0;  // known or true sd of normal models
  std::size_t bootstrap_b = 1000;
};

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"normal-mean-known-sigma", "normal-mean-unknown-sigma", "normal-variance",
                                              "bivariate-normal-correlation", "exponential-rate"};
  return names;
}

inline const std::vector<std::string>& constructor_names() {
  static const std::vector<std::string> names{"pivot",     "bootstrap-raw", "bootstrap-reflected", "bootstrap-t",
                                              "bootstrap-hall", "likelihood", "wald"};
  return names;
}

namespace detail {

inline std::vector<double> normal_draws(RngEngine& engine, std::size_t n, double mean, double sd) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = mean + sd * special::normal_quantile(engine.uniform());
  return xs;
}

inline double sum_of(const std::vector<double>& xs) { return numeric::pairwise_sum(xs); }

inline ConfidenceDistribution bootstrap_cd(const std::string& kind, const DataSample& data, ResamplePlan plan) {
  if (kind == "bootstrap-hall") return hall_bootstrap_cd(data, plan).cd;
  const double theta_hat = plan.statistic(data);
  const auto set = resample(data, plan);
  if (kind == "bootstrap-raw") return raw_bootstrap_cd(set);
  if (kind == "bootstrap-reflected") return reflected_bootstrap_cd(set, theta_hat);
  require(static_cast<bool>(plan.se_estimator), ErrorKind::config, "bootstrap-t needs a standard error");
  return bootstrap_t_cd(set, theta_hat, plan.se_estimator(data));
}

[[noreturn]] inline void unsupported(const GeneratorConfig& c) {
  fail(ErrorKind::config, "constructor '" + c.constructor + "' is not available for model '" + c.model + "'");
}

inline bool is_bootstrap(const std::string& kind) { return kind.rfind("bootstrap-", 0) == 0; }

}  // namespace detail

/// Builds one of the preset generators. Throws ErrorKind::config for unknown
/// names or unsupported (model, constructor) pairs.
inline CdGenerator make_generator(const GeneratorConfig& c) {
  const auto& models = model_names();
  const auto& ctors = constructor_names();
  require(std::find(models.begin(), models.end(), c.model) != models.end(), ErrorKind::config,
          "unknown model '" + c.model + "'");
  require(std::find(ctors.begin(), ctors.end(), c.constructor) != ctors.end(), ErrorKind::config,
          "unknown constructor '" + c.constructor + "'");
  require(c.n >= 2, ErrorKind::config, "n must be at least 2");
  require(c.sigma > 0.0, ErrorKind::config, "sigma must be positive");
  require(c.bootstrap_b >= 100, ErrorKind::config, "bootstrap_b must be at least 100");

  CdGenerator g;
  g.name = c.model + "/" + c.constructor;
  g.theta0 = c.theta0;
  g.n = c.n;
  g.seed = c.seed;
  const std::size_t n = c.n;
  const double nn = static_cast<double>(n);
  const double sigma = c.sigma;
  const double theta0 = c.theta0;
  const std::string kind = c.constructor;
  const std::size_t B = c.bootstrap_b;

  if (c.model == "normal-mean-known-sigma" || c.model == "normal-mean-unknown-sigma") {
    const bool known = c.model == "normal-mean-known-sigma";
    g.simulate = [=](RngStream s) {
      RngEngine engine(s);
      return Dataset{detail::normal_draws(engine, n, theta0, sigma), {}};
    };
    g.build = [=](const Dataset& d, RngStream aux) -> ConfidenceDistribution {
      const DataSample data(d.x);
      if (kind == "pivot") return known ? normal_mean_cd(data, sigma) : normal_mean_cd(data);
      if (detail::is_bootstrap(kind)) return detail::bootstrap_cd(kind, data, mean_plan(B, aux));
      const double xbar = data.mean();
      if (kind == "wald") {
        const double var = known ? sigma * sigma : data.sd() * data.sd() * (nn - 1.0) / nn;
        return wald_acd(xbar, var, n);
      }
      // likelihood
      const double se = (known ? sigma : data.sd()) / std::sqrt(nn);
      const Interval start{xbar - 12.0 * se, xbar + 12.0 * se};
      if (known) {
        return profile_acd([=](double mu, double) { return -0.5 * nn * (mu - xbar) * (mu - xbar) / (sigma * sigma); },
                           n, start)
            .cd;
      }
      const std::vector<double> xs = d.x;
      const double s = data.sd();
      auto loglik = [xs](double mu, double sd) {
        std::vector<double> sq(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
        return -static_cast<double>(xs.size()) * std::log(sd) - 0.5 * numeric::pairwise_sum(sq) / (sd * sd);
      };
      return profile_acd(loglik, n, start, Support{}, NuisanceBounds{0.01 * s, 100.0 * s}).cd;
    };
    return g;
  }

  if (c.model == "normal-variance") {
    require(theta0 > 0.0, ErrorKind::config, "theta0 is a variance and must be positive");
    if (kind == "bootstrap-t" || kind == "bootstrap-hall") detail::unsupported(c);
    g.simulate = [=](RngStream s) {
      RngEngine engine(s);
      return Dataset{detail::normal_draws(engine, n, 0.0, std::sqrt(theta0)), {}};
    };
    g.build = [=](const Dataset& d, RngStream aux) -> ConfidenceDistribution {
      const DataSample data(d.x);
      if (kind == "pivot") return normal_variance_cd(data);
      const double v_hat = data.sd() * data.sd() * (nn - 1.0) / nn;  // maximum likelihood
      if (detail::is_bootstrap(kind)) {
        ResamplePlan plan;
        plan.B = B;
        plan.stream = aux;
        plan.statistic = [](const DataSample& s) { return s.sd() * s.sd(); };
        return detail::bootstrap_cd(kind, data, plan);
      }
      if (kind == "wald") return wald_acd(v_hat, 2.0 * v_hat * v_hat, n, {0.0, kInfinity});
      const double ss = v_hat * nn;
      auto loglik = [=](double v, double) { return -0.5 * nn * std::log(v) - 0.5 * ss / v; };
      return profile_acd(loglik, n, {0.2 * v_hat, 4.0 * v_hat}, Support{0.0, kInfinity}).cd;
    };
    return g;
  }

  if (c.model == "bivariate-normal-correlation") {
    require(theta0 > -1.0 && theta0 < 1.0, ErrorKind::config, "theta0 is a correlation and must lie in (-1, 1)");
    require(n >= 4, ErrorKind::config, "the correlation model needs n >= 4");
    if (kind != "pivot") detail::unsupported(c);
    g.simulate = [=](RngStream s) {
      RngEngine engine(s);
      Dataset d{std::vector<double>(n), std::vector<double>(n)};
      const double tail = std::sqrt(1.0 - theta0 * theta0);
      for (std::size_t i = 0; i < n; ++i) {
        const double z1 = special::normal_quantile(engine.uniform());
        const double z2 = special::normal_quantile(engine.uniform());
        d.x[i] = z1;
        d.y[i] = theta0 * z1 + tail * z2;
      }
      return d;
    };
    g.build = [](const Dataset& d, RngStream) { return fisher_z_corr_cd(PairedSample(d.x, d.y)); };
    return g;
  }

  // exponential-rate
  require(theta0 > 0.0, ErrorKind::config, "theta0 is a rate and must be positive");
  if (kind == "bootstrap-t" || kind == "bootstrap-hall") detail::unsupported(c);
  g.simulate = [=](RngStream s) {
    RngEngine engine(s);
    std::vector<double> xs(n);
    for (auto& x : xs) x = -std::log(engine.uniform()) / theta0;
    return Dataset{xs, {}};
  };
  g.build = [=](const Dataset& d, RngStream aux) -> ConfidenceDistribution {
    const double total = detail::sum_of(d.x);
    require(total > 0.0, ErrorKind::degenerate_sample, "exponential sample sums to zero");
    const double rate_hat = nn / total;
    if (kind == "pivot") {
      // 2 theta S ~ chi-square with 2n degrees of freedom
      PivotSpec<double> spec{[](const double& s, double theta) { return 2.0 * theta * s; }, Direction::increasing,
                             chi_square(2.0 * nn), Support{0.0, kInfinity}};
      return from_pivot(spec, total);
    }
    if (detail::is_bootstrap(kind)) {
      ResamplePlan plan;
      plan.B = B;
      plan.stream = aux;
      plan.statistic = [](const DataSample& s) { return 1.0 / s.mean(); };
      return detail::bootstrap_cd(kind, DataSample(d.x), plan);
    }
    if (kind == "wald") return wald_acd(rate_hat, rate_hat * rate_hat, n, {0.0, kInfinity});
    auto loglik = [=](double theta, double) { return nn * std::log(theta) - theta * total; };
    return profile_acd(loglik, n, {0.2 * rate_hat, 3.0 * rate_hat}, Support{0.0, kInfinity}).cd;
  };
  return g;
}

/// Mean and standard error of a per-replicate statistic; replicates whose
/// construction throws cdkit::Error are counted and left out.
struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t used = 0;
  std::size_t failed = 0;
};

namespace detail {

struct ReplicateOutcome {
  bool ok = false;
  double value = 0.0;
};

template <class Fn>
std::vector<ReplicateOutcome> run_replicates(std::size_t reps, Fn&& fn) {
  std::vector<ReplicateOutcome> out(reps);
  parallel_for(reps, [&](std::size_t r) {
    try {
      out[r] = {true, fn(r)};
    } catch (const Error&) {
      out[r] = {false, 0.0};
    }
  });
  return out;
}

inline McEstimate summarize(const std::vector<ReplicateOutcome>& outcomes) {
  McEstimate e;
  std::vector<double> values;
  for (const auto& o : outcomes) {
    if (o.ok) values.push_back(o.value);
  }
  e.used = values.size();
  e.failed = outcomes.size() - values.size();
  if (values.empty()) return e;
  e.mean = numeric::mean(values);
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - e.mean) * (values[i] - e.mean);
    e.se = std::sqrt(numeric::pairwise_sum(sq) / static_cast<double>(values.size() - 1) /
                     static_cast<double>(values.size()));
  }
  return e;
}

}  // namespace detail

/// Monte Carlo mean of stat(H_r) over replicates r = 0..reps-1.
inline McEstimate mc_average(const CdGenerator& gen, std::size_t reps,
                             const std::function<double(const ConfidenceDistribution&)>& stat) {
  require(reps >= 1, ErrorKind::domain, "need at least one replicate");
  return detail::summarize(detail::run_replicates(reps, [&](std::size_t r) { return stat(gen.cd(r)); }));
}

struct CoverageEntry {
  double level = 0.0;
  double coverage = 0.0;
  double se = 0.0;
};

struct CalibrationReport {
  std::vector<double> u_values;  // H_r(theta0) for the replicates that succeeded
  std::vector<std::size_t> u_replicates;
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;
  std::vector<CoverageEntry> coverage;
  double median_unbiasedness = 0.0;  // fraction of replicates with M_n <= theta0
  std::size_t failed = 0;
};

inline std::vector<double> default_levels() { return {0.5, 0.8, 0.9, 0.95}; }

namespace detail {

struct ReplicateCalibration {
  bool ok = false;
  double u = 0.0;
  bool median_below = false;
  std::vector<char> covered;
};

inline std::vector<CoverageEntry> coverage_table(const std::vector<ReplicateCalibration>& rows,
                                                 const std::vector<double>& levels) {
  std::vector<CoverageEntry> table;
  std::size_t used = 0;
  for (const auto& r : rows) used += r.ok;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& r : rows) hits += r.ok && r.covered[k];
    const double p = used ? static_cast<double>(hits) / static_cast<double>(used) : 0.0;
    table.push_back({levels[k], p, used ? std::sqrt(p * (1.0 - p) / static_cast<double>(used)) : 0.0});
  }
  return table;
}

inline std::vector<ReplicateCalibration> calibration_rows(const CdGenerator& gen, const std::vector<double>& levels,
                                                          std::size_t reps) {
  require(reps >= 100, ErrorKind::domain, "Monte Carlo experiments need reps >= 100");
  for (double level : levels) {
    require(level > 0.0 && level < 1.0, ErrorKind::domain, "coverage levels must lie in (0, 1)");
  }
  std::vector<ReplicateCalibration> rows(reps);
  parallel_for(reps, [&](std::size_t r) {
    try {
      const auto h = gen.cd(r);
      ReplicateCalibration row;
      row.u = cd_eval(h, gen.theta0);
      row.median_below = cd_median(h) <= gen.theta0;
      for (double level : levels) {
        const auto ci = central_interval(h, level);
        row.covered.push_back(ci.lo <= gen.theta0 && gen.theta0 <= ci.hi);
      }
      row.ok = true;
      rows[r] = std::move(row);
    } catch (const Error&) {
      rows[r] = ReplicateCalibration{};
    }
  });
  return rows;
}

}  // namespace detail

/// Draws `reps` CDs and tests H_r(theta0) for uniformity by KS.
inline CalibrationReport calibrate(const CdGenerator& gen, std::size_t reps,
                                   const std::vector<double>& levels = default_levels()) {
  const auto rows = detail::calibration_rows(gen, levels, reps);
  CalibrationReport rep;
  std::size_t below = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].ok) {
      ++rep.failed;
      continue;
    }
    rep.u_values.push_back(rows[r].u);
    rep.u_replicates.push_back(r);
    below += rows[r].median_below;
  }
  require(rep.u_values.size() >= 10, ErrorKind::insufficient_replicates,
          "fewer than 10 replicates produced a CD");
  const auto ks = ks_uniform(rep.u_values);
  rep.ks_statistic = ks.statistic;
  rep.ks_p_value = ks.p_value;
  rep.coverage = detail::coverage_table(rows, levels);
  rep.median_unbiasedness = static_cast<double>(below) / static_cast<double>(rep.u_values.size());
  return rep;
}

/// Empirical frequency of theta0 in the central interval at each level.
inline std::vector<CoverageEntry> coverage(const CdGenerator& gen, const std::vector<double>& levels,
                                           std::size_t reps) {
  return detail::coverage_table(detail::calibration_rows(gen, levels, reps), levels);
}

struct ConsistencyReport {
  McEstimate median_error;  // E|M_n - theta0|
  McEstimate mean_error;    // E|mean of H - theta0|
  McEstimate mode_error;    // E|mode of H - theta0|
};

inline ConsistencyReport consistency(const CdGenerator& gen, std::size_t reps) {
  require(reps >= 100, ErrorKind::domain, "Monte Carlo experiments need reps >= 100");
  std::vector<std::array<double, 3>> errs(reps);
  auto outcomes = detail::run_replicates(reps, [&](std::size_t r) {
    const auto h = gen.cd(r);
    errs[r] = {std::fabs(cd_median(h) - gen.theta0), std::fabs(cd_mean(h) - gen.theta0),
               std::fabs(cd_mode(h) - gen.theta0)};
    return 0.0;
  });
  ConsistencyReport out;
  McEstimate* slots[3] = {&out.median_error, &out.mean_error, &out.mode_error};
  for (std::size_t k = 0; k < 3; ++k) {
    auto column = outcomes;
    for (std::size_t r = 0; r < reps; ++r) column[r].value = errs[r][k];
    *slots[k] = detail::summarize(column);
  }
  return out;
}

}  // namespace cdkit
