#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cdkit/constructors.hpp"
#include "cdkit/ks.hpp"
#include "cdkit/likelihood.hpp"
#include "oracles.hpp"

using namespace cdkit;

namespace {

std::vector<double> exponential_values(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  RngEngine engine(RngStream{seed, index});
  std::vector<double> xs(n);
  for (auto& x : xs) x = -std::log(engine.uniform());
  return xs;
}

LogLikelihood exponential_rate_loglik(std::size_t n, double mean) {
  const double nn = static_cast<double>(n);
  return [=](double theta, double) { return nn * std::log(theta) - theta * nn * mean; };
}

ProfileAcd exponential_acd(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  const auto xs = exponential_values(n, seed, index);
  const double m = DataSample(xs).mean();
  const double guess = 1.0 / m;
  return profile_acd(exponential_rate_loglik(n, m), n, {0.2 * guess, 3.0 * guess}, Support{0.0, kInfinity});
}

double sup_grid_distance(const ProfileAcd& p) {
  const auto wald = wald_acd(p.curve.theta_hat, p.curve.i_n, p.curve.n, {p.curve.grid.front(), p.curve.grid.back()});
  double worst = 0.0;
  for (double t : p.curve.grid) worst = std::max(worst, std::fabs(cd_eval(p.cd, t) - cd_eval(wald, t)));
  return worst;
}

}  // namespace

TEST(ProfileCurve, NormalMeanKnownSigmaIsExactQuadratic) {
  const double xbar = 0.3, sigma = 2.0;
  const std::size_t n = 40;
  auto loglik = [&](double theta, double) { return -0.5 * n * (theta - xbar) * (theta - xbar) / (sigma * sigma); };
  const auto c = profile_curve(loglik, {-1.7, 2.4}, 257, n);
  EXPECT_NEAR(c.theta_hat, xbar, 1e-9);
  EXPECT_NEAR(c.i_n, sigma * sigma, 1e-6);
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double d = c.grid[i] - xbar;
    EXPECT_NEAR(c.ell_star[i], -0.5 * n * d * d / (sigma * sigma), 1e-9);
  }
  EXPECT_LE(*std::max_element(c.ell_star.begin(), c.ell_star.end()), 0.0);
}

TEST(ProfileCurve, ExponentialRateMatchesClosedForm) {
  const auto xs = exponential_values(60, 11, 0);
  const double m = DataSample(xs).mean();
  const std::size_t n = xs.size();
  const auto c = profile_curve(exponential_rate_loglik(n, m), {0.3 / m, 2.5 / m}, 400, n);
  EXPECT_NEAR(c.theta_hat, 1.0 / m, 1e-6 / m);
  // i_n = theta^2 for the exponential rate
  EXPECT_NEAR(c.i_n, c.theta_hat * c.theta_hat, 1e-4 * c.i_n);
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double tm = c.grid[i] * m;
    EXPECT_NEAR(c.ell_star[i], n * (std::log(tm) - tm + 1.0), 1e-8 * (1.0 + std::fabs(c.ell_star[i])));
  }
}

TEST(ProfileCurve, UnknownSigmaProfileMaximizesAtSampleMean) {
  const auto xs = draw(RngStream{5, 1}, normal(1.0, 2.0), 30);
  const DataSample data(xs);
  auto loglik = [&](double mu, double sigma) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return -static_cast<double>(xs.size()) * std::log(sigma) - 0.5 * ss / (sigma * sigma);
  };
  const auto c = profile_curve(loglik, {data.mean() - 3.0, data.mean() + 3.0}, 301, xs.size(), NuisanceBounds{0.05, 50.0});
  EXPECT_NEAR(c.theta_hat, data.mean(), 1e-6);
}

TEST(ProfileCurve, NuisanceOnBoundaryIsOptimizationFailure) {
  auto loglik = [](double theta, double eta) { return -theta * theta + eta; };
  try {
    profile_curve(loglik, {-1.0, 1.0}, 64, 10, NuisanceBounds{0.0, 1.0});
    FAIL() << "expected optimization failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::optimization_failure);
    EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos);
  }
}

TEST(ProfileCurve, RejectsSmallGridAndEdgeMaximum) {
  auto loglik = [](double theta, double) { return -theta * theta; };
  EXPECT_THROW(profile_curve(loglik, {-1.0, 1.0}, 63, 10), Error);
  try {
    profile_curve(loglik, {0.5, 2.0}, 64, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::window_too_narrow);
  }
}

TEST(NormalizeToAcd, KnownSigmaNormalMeanMatchesPhi) {
  const double xbar = -0.4, sigma = 1.5;
  const std::size_t n = 25;
  const double se = sigma / std::sqrt(static_cast<double>(n));
  auto loglik = [&](double theta, double) { return -0.5 * n * (theta - xbar) * (theta - xbar) / (sigma * sigma); };
  const auto c = profile_curve(loglik, {xbar - 10.0 * se, xbar + 10.0 * se}, 512, n);
  const auto g = normalize_to_acd(c);
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = xbar - 8.0 * se + 16.0 * se * i / 2000.0;
    worst = std::max(worst, std::fabs(cd_eval(g, x) - oracle::normal_cdf((x - xbar) / se)));
  }
  EXPECT_LT(worst, 1e-4);
  const auto& grid = std::get<GridRepr>(g.repr());
  EXPECT_GE(grid.value.back(), 1.0 - 1e-9);
  EXPECT_LE(grid.value.back(), 1.0);
}

TEST(NormalizeToAcd, SpreadShrinksAtRootNRate) {
  // Synthetic Gaussian log-likelihood curves with unit information.
  std::vector<double> spread;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const double se = 1.0 / std::sqrt(static_cast<double>(n));
    auto loglik = [n](double theta, double) { return -0.5 * n * (theta - 1.0) * (theta - 1.0); };
    const auto g = normalize_to_acd(profile_curve(loglik, {1.0 - 10.0 * se, 1.0 + 10.0 * se}, 512, n));
    spread.push_back(cd_quantile(g, 0.95) - cd_quantile(g, 0.05));
  }
  for (std::size_t k = 1; k < spread.size(); ++k) {
    EXPECT_NEAR(spread[k] / spread[k - 1], 1.0 / std::sqrt(10.0), 0.1 / std::sqrt(10.0));
  }
}

TEST(NormalizeToAcd, NormalizingConstantForExponentialModel) {
  const auto p = exponential_acd(400, 21, 0);
  const double expected = std::sqrt(2.0 * M_PI * p.curve.i_n / 400.0);
  EXPECT_NEAR(p.curve.c_n, expected, 0.05 * expected);
  // independent check of c_n by adaptive quadrature of the closed-form profile
  const auto xs = exponential_values(400, 21, 0);
  const double m = DataSample(xs).mean();
  const double area = oracle::simpson(
      [&](double t) { return std::exp(400.0 * (std::log(t * m) - t * m + 1.0)); }, p.curve.grid.front(),
      p.curve.grid.back(), 1e-12);
  EXPECT_NEAR(p.curve.c_n, area, 1e-4 * area);
}

TEST(NormalizeToAcd, InsufficientDecayIsWindowTooNarrow) {
  auto loglik = [](double theta, double) { return -0.5 * theta * theta; };
  const auto c = profile_curve(loglik, {-3.0, 3.0}, 128, 1);
  try {
    normalize_to_acd(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::window_too_narrow);
  }
}

TEST(WaldAcd, Examples) {
  const double theta_hat = 2.0, i_n = 3.0;
  const std::size_t n = 12;
  const double sd = std::sqrt(i_n / n);
  const auto h = wald_acd(theta_hat, i_n, n);
  EXPECT_DOUBLE_EQ(cd_eval(h, theta_hat), 0.5);
  EXPECT_NEAR(cd_eval(h, theta_hat + 1.96 * sd), oracle::normal_cdf(1.96), 1e-12);
  EXPECT_NEAR(cd_eval(h, theta_hat + 1.96 * sd), 0.975, 3e-6);
  const auto half = wald_acd(theta_hat, i_n, n, {theta_hat, kInfinity});
  EXPECT_EQ(cd_eval(half, theta_hat), 0.0);
  EXPECT_NEAR(cd_eval(half, theta_hat + sd), 2.0 * (oracle::normal_cdf(1.0) - 0.5), 1e-12);
  EXPECT_THROW(wald_acd(theta_hat, i_n, n, {2.5, 3.0}), Error);
}

TEST(ProfileAcd, AutoWindowWidensFromNarrowStart) {
  const auto xs = exponential_values(100, 3, 0);
  const double m = DataSample(xs).mean();
  const auto p = profile_acd(exponential_rate_loglik(100, m), 100, {0.9 / m, 1.1 / m}, Support{0.0, kInfinity});
  EXPECT_NEAR(p.curve.theta_hat, 1.0 / m, 1e-6);
  EXPECT_LT(std::exp(p.curve.ell_star.front()), 1e-12);
  EXPECT_LT(std::exp(p.curve.ell_star.back()), 1e-12);
}

TEST(LikelihoodProperties, DistanceToWaldShrinksWithN) {
  std::vector<double> average;
  for (std::size_t n : {25u, 100u, 400u}) {
    double total = 0.0;
    for (std::uint64_t r = 0; r < 200; ++r) total += sup_grid_distance(exponential_acd(n, 4100 + n, r));
    average.push_back(total / 200.0);
  }
  EXPECT_GT(average[0], average[1]);
  EXPECT_GT(average[1], average[2]);
  EXPECT_LT(average[2], 0.03);
}

TEST(LikelihoodProperties, NormalizedLikelihoodIsCalibrated) {
  std::vector<double> u(2000);
  for (std::uint64_t r = 0; r < u.size(); ++r) u[r] = cd_eval(exponential_acd(200, 777, r).cd, 1.0);
  EXPECT_GT(ks_uniform(u).p_value, 0.001);
}

TEST(LikelihoodProperties, DeterministicUnderThreadCount) {
  const auto a = exponential_acd(80, 9, 2);
  const auto b = exponential_acd(80, 9, 2);
  EXPECT_EQ(a.curve.ell_star, b.curve.ell_star);
  EXPECT_EQ(a.curve.theta_hat, b.curve.theta_hat);
}
