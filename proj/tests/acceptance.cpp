// Acceptance run: one PASS/FAIL line per criterion, exit status = number of
// failed criteria. Every experiment derives its seed from kMasterSeed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cdkit/bootstrap.hpp"
#include "cdkit/compare.hpp"
#include "cdkit/constructors.hpp"
#include "cdkit/inference.hpp"
#include "cdkit/io.hpp"
#include "cdkit/ks.hpp"
#include "cdkit/likelihood.hpp"
#include "cdkit/multivariate.hpp"
#include "cdkit/simlab.hpp"
#include "oracles.hpp"

using namespace cdkit;

namespace {

constexpr std::uint64_t kMasterSeed = 20261018;

std::uint64_t seed_for(int criterion, int part = 0) { return kMasterSeed + 1000 * criterion + part; }

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

GeneratorConfig config(const std::string& model, const std::string& ctor, std::size_t n, double theta0,
                       std::uint64_t seed, std::size_t b = 1000) {
  GeneratorConfig c;
  c.model = model;
  c.constructor = ctor;
  c.n = n;
  c.theta0 = theta0;
  c.seed = seed;
  c.bootstrap_b = b;
  return c;
}

struct Paired {
  double mean = 0.0;
  double se = 0.0;
};

Paired mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

// ---- criteria ----

Outcome calibration() {
  Outcome o;
  const char* names[] = {"z", "t", "chi2"};
  const GeneratorConfig cs[] = {config("normal-mean-known-sigma", "pivot", 20, 0.0, seed_for(1, 0)),
                                config("normal-mean-unknown-sigma", "pivot", 20, 0.0, seed_for(1, 1)),
                                config("normal-variance", "pivot", 20, 1.0, seed_for(1, 2))};
  for (int i = 0; i < 3; ++i) {
    const auto report = calibrate(make_generator(cs[i]), 5000);
    o.check(report.ks_p_value > 0.01, std::string(names[i]) + fmt(" KS p=%.4f", report.ks_p_value));
  }
  return o;
}

Outcome median_unbiasedness() {
  Outcome o;
  const auto report = calibrate(make_generator(config("normal-variance", "pivot", 20, 1.0, seed_for(2, 0))), 5000);
  const double band = 3.0 * std::sqrt(0.25 / 5000.0);
  o.check(std::fabs(report.median_unbiasedness - 0.5) <= band,
          fmt("P(M<=theta0)=%.4f (0.5+-%.4f)", report.median_unbiasedness, band));
  // E of the mean of the inverse-chi-square CD: (n-1) E[s^2] / (n-3)
  const std::size_t n = 5;
  const double sigma2 = 1.0;
  const double expected = (n - 1.0) * sigma2 / (n - 3.0);
  const auto est = mc_average(make_generator(config("normal-variance", "pivot", n, sigma2, seed_for(2, 1))), 5000,
                              [](const ConfidenceDistribution& h) { return cd_mean(h); });
  o.check(std::fabs(est.mean - expected) <= 3.0 * est.se,
          fmt("n=5 CD-mean avg=%.4f vs %.4f (3se=%.4f)", est.mean, expected, 3.0 * est.se));
  return o;
}

Outcome ks_risk_constant() {
  Outcome o;
  const GeneratorConfig cs[] = {config("normal-mean-known-sigma", "pivot", 10, 0.0, seed_for(3, 0)),
                                config("normal-mean-unknown-sigma", "pivot", 10, 0.0, seed_for(3, 1)),
                                config("normal-variance", "pivot", 10, 1.5, seed_for(3, 2))};
  for (const auto& c : cs) {
    const auto g = make_generator(c);
    const auto est = mc_average(g, 5000, [&](const ConfidenceDistribution& h) {
      const double v = cd_eval(h, g.theta0);
      return std::max(v, 1.0 - v);
    });
    o.check(std::fabs(est.mean - 0.75) <= 0.01, c.model + fmt(" %.4f", est.mean));
  }
  return o;
}

Outcome dispersion_ordering() {
  Outcome o;
  const std::size_t n = 10, reps = 5000;
  const double sigma = 1.0;
  const auto z = make_generator(config("normal-mean-known-sigma", "pivot", n, 0.0, seed_for(4)));
  const auto t = make_generator(config("normal-mean-unknown-sigma", "pivot", n, 0.0, seed_for(4)));
  std::vector<double> dz(reps), diff(reps);
  parallel_for(reps, [&](std::size_t r) {
    const Dataset d = z.dataset(r);
    const double a = sample_dispersion(z.build(d, z.aux_stream(r)), squared_error(), 0.0);
    const double b = sample_dispersion(t.build(d, t.aux_stream(r)), squared_error(), 0.0);
    dz[r] = a;
    diff[r] = b - a;
  });
  const Paired gap = mean_and_se(diff);
  o.check(gap.mean > 2.0 * gap.se, fmt("t-z gap=%.5f (2se=%.5f)", gap.mean, 2.0 * gap.se));
  // E int (theta - theta0)^2 dH = sigma^2/n (spread) + sigma^2/n (E (xbar - theta0)^2)
  const double expected = 2.0 * sigma * sigma / static_cast<double>(n);
  const Paired zd = mean_and_se(dz);
  o.check(std::fabs(zd.mean - expected) <= 3.0 * zd.se, fmt("z=%.5f vs %.3f (3se=%.5f)", zd.mean, expected, 3.0 * zd.se));
  return o;
}

Outcome bahadur() {
  Outcome o;
  {
    const std::size_t n = 1000000;
    const auto h = location_scale_cd(normal(), 0.0, 1.0 / std::sqrt(static_cast<double>(n)));
    const double slope = bahadur_slopes(h, 0.0, 1.0, n).left;
    o.check(std::fabs(slope + 0.5) <= 1e-4, fmt("z slope n=1e6 %.7f", slope));
  }
  const double limit = -0.5 * std::log(2.0);
  std::vector<double> gaps;
  double at_10k = 0.0;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const double nn = static_cast<double>(n);
    // t-CD with xbar = theta0 and s = 1, evaluated at eps = 1
    const auto h = location_scale_cd(student_t(nn - 1.0), 0.0, 1.0 / std::sqrt(nn));
    const double slope = bahadur_slopes(h, 0.0, 1.0, n).left;
    gaps.push_back(std::fabs(slope - limit));
    at_10k = slope;
  }
  o.check(std::fabs(at_10k - limit) <= 0.05 * std::fabs(limit), fmt("t slope n=1e4 %.5f vs %.5f", at_10k, limit));
  o.check(gaps[0] > gaps[1] && gaps[1] > gaps[2], fmt("gaps %.2e %.2e %.2e", gaps[0], gaps[1], gaps[2]));
  return o;
}

Outcome support_theorems() {
  Outcome o;
  {
    RngEngine engine(RngStream{seed_for(6, 0), 0});
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double center = 4.0 * engine.uniform() - 2.0, scale = 0.1 + 2.0 * engine.uniform();
      ConfidenceDistribution h = location_scale_cd(normal(), center, scale);
      if (trial % 3 == 1) h = location_scale_cd(student_t(1.0 + 10.0 * engine.uniform()), center, scale);
      if (trial % 3 == 2) {
        std::vector<double> atoms(50);
        for (auto& a : atoms) a = center + scale * special::normal_quantile(engine.uniform());
        h = ConfidenceDistribution::equal_weight_sample(atoms);
      }
      std::vector<double> cuts(2 + 2 * engine.below(3));
      for (auto& c : cuts) c = center + 3.0 * scale * (2.0 * engine.uniform() - 1.0);
      std::sort(cuts.begin(), cuts.end());
      std::vector<Interval> parts;
      for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) parts.push_back({cuts[i], cuts[i + 1]});
      if (engine.uniform() < 0.5) parts.front().lo = -kInfinity;
      if (engine.uniform() < 0.5) parts.back().hi = kInfinity;
      const auto r = support_report(h, NullRegion::intervals(parts));
      violations += !(r.p_s <= r.p_w);
    }
    o.check(violations == 0, fmt("p_s<=p_w violations %.0f/1000", violations));
  }
  {
    const std::size_t reps = 5000;
    std::vector<double> ps(reps);
    for (std::uint64_t r = 0; r < reps; ++r) {
      const DataSample data(draw(RngStream{seed_for(6, 1), r}, normal(0.0, 1.0), 20));
      ps[r] = strong_support(normal_mean_cd(data, 1.0), NullRegion::intervals({{-kInfinity, 0.0}}));
    }
    for (double alpha : {0.05, 0.5}) {
      const double rate = static_cast<double>(std::count_if(ps.begin(), ps.end(), [&](double p) { return p <= alpha; })) /
                          static_cast<double>(reps);
      const double band = 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
      o.check(std::fabs(rate - alpha) <= band, fmt("size(%.2f)=%.4f", alpha, rate));
    }
  }
  {
    const auto region = NullRegion::intervals({{-kInfinity, 0.0}, {1.0, 2.0}});
    double worst = 0.0;
    for (double theta : {0.0, 1.0, 1.5, 2.0}) {
      int hits = 0;
      for (std::uint64_t r = 0; r < 2000; ++r) {
        const DataSample data(draw(RngStream{seed_for(6, 2), r}, normal(theta, 1.0), 200));
        hits += strong_support(normal_mean_cd(data), region) <= 0.05;
      }
      worst = std::max(worst, hits / 2000.0);
    }
    o.check(worst >= 0.03 && worst <= 0.07, fmt("union size=%.4f", worst));
  }
  {
    std::vector<double> pw(2000);
    for (std::uint64_t r = 0; r < pw.size(); ++r) {
      const DataSample data(draw(RngStream{seed_for(6, 3), r}, normal(0.0, 1.0), 200));
      pw[r] = weak_support(normal_mean_cd(data), NullRegion::points({0.0, 1.0}));
    }
    const double p = ks_uniform(pw).p_value;
    o.check(p > 0.001, fmt("point-null KS p=%.4f", p));
  }
  return o;
}

Outcome profile_likelihood() {
  Outcome o;
  auto acd = [](std::size_t n, std::uint64_t seed, std::uint64_t rep) {
    RngEngine engine(RngStream{seed, rep});
    const double nn = static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += -std::log(engine.uniform());
    const double guess = nn / total;
    return profile_acd([=](double theta, double) { return nn * std::log(theta) - theta * total; }, n,
                       {0.2 * guess, 3.0 * guess}, Support{0.0, kInfinity});
  };
  std::vector<double> average;
  for (std::size_t n : {25u, 100u, 400u}) {
    std::vector<double> dist(200);
    parallel_for(dist.size(), [&](std::size_t r) {
      const auto p = acd(n, seed_for(7, static_cast<int>(n)), r);
      const auto wald = wald_acd(p.curve.theta_hat, p.curve.i_n, n, {p.curve.grid.front(), p.curve.grid.back()});
      double worst = 0.0;
      for (double t : p.curve.grid) worst = std::max(worst, std::fabs(cd_eval(p.cd, t) - cd_eval(wald, t)));
      dist[r] = worst;
    });
    average.push_back(mean_and_se(dist).mean);
  }
  o.check(average[0] > average[1] && average[1] > average[2],
          fmt("sup-dist %.4f %.4f %.4f", average[0], average[1], average[2]));
  o.check(average[2] < 0.03, fmt("n=400 %.4f<0.03", average[2]));
  const auto report = calibrate(make_generator(config("exponential-rate", "likelihood", 200, 1.0, seed_for(7, 1))), 2000);
  o.check(report.ks_p_value > 0.001, fmt("calibration n=200 KS p=%.5f", report.ks_p_value));
  return o;
}

Outcome multivariate() {
  Outcome o;
  GaussianMeanModel model;
  model.theta0 = Vector(2);
  model.theta0 << 1.0, -0.5;
  model.sigma = Matrix(2, 2);
  model.sigma << 2.0, 0.6, 0.6, 1.0;
  model.n = 30;
  model.seed = seed_for(8, 0);
  const auto report = mv_coverage(model, DepthSpec{}, {0.5, 0.9}, 2000, 2000);
  o.check(report.ks_p_value > 0.001, fmt("C(theta0) KS p=%.4f", report.ks_p_value));
  for (std::size_t i = 0; i < 2; ++i) {
    o.check(std::fabs(report.coverage[i] - report.levels[i]) <= 0.02,
            fmt("cover(%.1f)=%.4f", report.levels[i], report.coverage[i]));
  }
  // Standard normal cloud: C(x) = P(chi2_2 >= |x|^2) = exp(-|x|^2 / 2)
  const auto cloud = lcd_from_pivot(Vector::Zero(2), Matrix::Identity(2, 2), standard_normal_sampler(2), 20000,
                                    RngStream{seed_for(8, 1), 0});
  const Centrality cf(DepthSpec{}, cloud);
  const double r2 = 2.0 * std::log(2.0);
  const double expected = std::exp(-0.5 * r2);
  Vector x(2);
  x << std::sqrt(r2), 0.0;
  const double c = cf(x);
  o.check(std::fabs(c - expected) <= 0.02, fmt("C at |x|^2=2ln2: %.4f vs %.2f", c, expected));
  return o;
}

Outcome depth_formulas() {
  Outcome o;
  {
    RngEngine engine(RngStream{seed_for(9, 0), 0});
    const std::size_t m = 501;
    std::vector<double> xs(m);
    for (auto& v : xs) v = std::round(8.0 * special::normal_quantile(engine.uniform())) / 4.0;  // ties on purpose
    const MultiCd line(Eigen::Map<Matrix>(xs.data(), static_cast<Eigen::Index>(m), 1));
    const DepthSpec tukey{DepthSpec::Kind::tukey, 360};
    int mismatches = 0;
    std::vector<double> probes = xs;
    for (int i = 0; i < 200; ++i) probes.push_back(6.0 * engine.uniform() - 3.0);
    for (double x : probes) {
      const double at_most = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double v) { return v <= x; }));
      const double at_least = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double v) { return v >= x; }));
      const double expected = std::min(at_most, at_least) / static_cast<double>(m);
      mismatches += depth(tukey, line, Vector::Constant(1, x)) != expected;
    }
    o.check(mismatches == 0, fmt("1-D Tukey mismatches %.0f/%.0f", mismatches, static_cast<double>(probes.size())));
  }
  {
    const std::size_t m = 2000;
    const auto cloud = lcd_from_pivot(Vector::Zero(2), Matrix::Identity(2, 2), standard_normal_sampler(2), m,
                                      RngStream{seed_for(9, 1), 0});
    RngEngine engine(RngStream{seed_for(9, 2), 0});
    auto rotation = [](double a) {
      Matrix r(2, 2);
      r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      return r;
    };
    const double sampling = 2.0 / std::sqrt(static_cast<double>(m));
    const double grid = 2.0 * std::numbers::pi / 360.0;
    double worst_m = 0.0, worst_t = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Matrix d = Matrix::Zero(2, 2);
      d(0, 0) = 0.5 + 1.5 * engine.uniform();
      d(1, 1) = (engine.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + 1.5 * engine.uniform());
      const Matrix t = rotation(2.0 * std::numbers::pi * engine.uniform()) * d *
                       rotation(2.0 * std::numbers::pi * engine.uniform());
      Vector shift(2), x(2);
      shift << 4.0 * engine.uniform() - 2.0, 4.0 * engine.uniform() - 2.0;
      x << 3.0 * engine.uniform() - 1.5, 3.0 * engine.uniform() - 1.5;
      const MultiCd image((cloud.cloud() * t.transpose()).rowwise() + shift.transpose());
      const Vector tx = t * x + shift;
      worst_m = std::max(worst_m, std::fabs(depth(DepthSpec{}, cloud, x) - depth(DepthSpec{}, image, tx)));
      const DepthSpec tukey{DepthSpec::Kind::tukey, 360};
      worst_t = std::max(worst_t, std::fabs(depth(tukey, cloud, x) - depth(tukey, image, tx)));
    }
    o.check(worst_m <= sampling, fmt("affine mahalanobis %.4f<=%.4f", worst_m, sampling));
    o.check(worst_t <= sampling + grid, fmt("affine tukey %.4f<=%.4f", worst_t, sampling + grid));
  }
  return o;
}

Outcome bootstrap_variants() {
  Outcome o;
  int part = 0;
  for (const char* kind : {"bootstrap-raw", "bootstrap-reflected", "bootstrap-t", "bootstrap-hall"}) {
    const auto g = make_generator(config("normal-mean-unknown-sigma", kind, 100, 0.0, seed_for(10, part++), 1000));
    const auto table = coverage(g, {0.9}, 1000);
    o.check(table[0].coverage >= 0.85 && table[0].coverage <= 0.95,
            std::string(kind).substr(10) + fmt(" %.3f", table[0].coverage));
  }
  const DataSample data(draw(RngStream{seed_for(10, 9), 0}, normal(0.0, 1.0), 100));
  const auto set = resample(data, mean_plan(1000, RngStream{seed_for(10, 9), 1}));
  auto atom_mean = [](const ConfidenceDistribution& h) { return numeric::mean(std::get<SampleRepr>(h.repr()).atoms); };
  const double gap =
      std::fabs(atom_mean(raw_bootstrap_cd(set)) + atom_mean(reflected_bootstrap_cd(set, data.mean())) - 2.0 * data.mean());
  o.check(gap <= 1e-9, fmt("reflection gap %.1e", gap));
  return o;
}

std::string experiment_bytes() {
  std::ostringstream out;
  const auto boot = make_generator(config("normal-mean-unknown-sigma", "bootstrap-reflected", 20, 0.0, seed_for(11, 0), 200));
  const auto cal = calibrate(boot, 200);
  out << io::to_json(cal).dump() << '\n';
  io::write_u_values_csv(out, cal);
  const auto lik = make_generator(config("exponential-rate", "likelihood", 50, 2.0, seed_for(11, 1)));
  out << io::to_json(calibrate(lik, 100)).dump() << '\n';
  const auto z = make_generator(config("normal-mean-known-sigma", "pivot", 10, 0.0, seed_for(11, 2)));
  const auto t = make_generator(config("normal-mean-unknown-sigma", "pivot", 10, 0.0, seed_for(11, 2)));
  out << io::to_json(dominance_mc(z, t, 0.0, {0.25, 0.5}, 200)).dump() << '\n';
  out << io::to_json(mc_dispersion(t, squared_error(), 200)).dump() << '\n';
  GaussianMeanModel model;
  model.theta0 = Vector::Zero(2);
  model.sigma = Matrix::Identity(2, 2);
  model.n = 10;
  model.seed = seed_for(11, 3);
  out << io::to_json(mv_coverage(model, DepthSpec{DepthSpec::Kind::tukey, 360}, {0.5, 0.9}, 100, 1000)).dump() << '\n';
  return out.str();
}

Outcome determinism() {
  Outcome o;
  std::vector<std::string> runs;
  for (const char* threads : {"1", "4", "1", "7"}) {
    setenv("CDKIT_THREADS", threads, 1);
    runs.push_back(experiment_bytes());
  }
  unsetenv("CDKIT_THREADS");
  bool same = true;
  for (const auto& r : runs) same = same && r == runs.front();
  o.check(same, fmt("%.0f runs over thread caps 1,4,1,7, %.0f bytes each", static_cast<double>(runs.size()),
                    static_cast<double>(runs.front().size())));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{{1, "calibration", calibration},
                                        {2, "median unbiasedness", median_unbiasedness},
                                        {3, "KS-risk constant", ks_risk_constant},
                                        {4, "dispersion ordering", dispersion_ordering},
                                        {5, "Bahadur slopes", bahadur},
                                        {6, "support theorems", support_theorems},
                                        {7, "profile likelihood", profile_likelihood},
                                        {8, "multivariate centrality", multivariate},
                                        {9, "depth formulas", depth_formulas},
                                        {10, "bootstrap", bootstrap_variants},
                                        {11, "determinism", determinism}};
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failed += !out.pass;
    std::printf("%s %2d %s: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
