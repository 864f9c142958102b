#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cdkit/constructors.hpp"
#include "oracles.hpp"

using namespace cdkit;

namespace {

DataSample standardized_sample(std::vector<double> raw, double mean = 0.0, double sd = 1.0) {
  const DataSample d(raw);
  for (double& v : raw) v = mean + sd * (v - d.mean()) / d.sd();
  return DataSample(raw);
}

PairedSample uncorrelated_pairs(int n) {
  std::vector<double> x, y;
  for (int i = 0; i < n; ++i) {
    const double v = -0.5 * (n - 1) + i;
    x.push_back(v);
    y.push_back(v * v);
  }
  return PairedSample(x, y);
}

}  // namespace

TEST(DataSample, Moments) {
  const DataSample d({1.0, 2.0, 3.0, 10.0});
  EXPECT_DOUBLE_EQ(d.mean(), 4.0);
  EXPECT_NEAR(d.sd(), std::sqrt(((9.0 + 4.0 + 1.0 + 36.0) / 3.0)), 1e-14);
  const double m3 = (-27.0 - 8.0 - 1.0 + 216.0) / 4.0;
  EXPECT_NEAR(d.skewness(), m3 / std::pow(d.sd(), 3), 1e-14);
  EXPECT_THROW(DataSample({1.0}), Error);
}

TEST(PairedSample, CorrelationAndDegeneracy) {
  EXPECT_NEAR(uncorrelated_pairs(28).correlation(), 0.0, 1e-15);
  EXPECT_NEAR(PairedSample({1, 2, 3, 4}, {2, 4, 6, 8.5}).correlation(), 0.99838144, 1e-8);  // numpy.corrcoef
  EXPECT_THROW(PairedSample({1, 2, 3}, {1, 2, 3}), Error);
  EXPECT_THROW(PairedSample({1, 1, 1, 1}, {1, 2, 3, 4}), Error);
}

TEST(FromPivot, StandardizedMeanPivotGivesNormalCd) {
  const auto data = standardized_sample({1.0, 4.0, 2.0, 7.0, 3.0}, 1.3, 0.8);
  const double sigma = 2.0;
  PivotSpec<DataSample> spec{
      [sigma](const DataSample& d, double theta) { return (d.mean() - theta) * std::sqrt(double(d.n())) / sigma; },
      Direction::decreasing, normal()};
  const auto h = from_pivot(spec, data);
  for (double x = -2.0; x <= 4.0; x += 0.1) {
    EXPECT_NEAR(cd_eval(h, x), oracle::normal_cdf((x - 1.3) * std::sqrt(5.0) / sigma), 1e-13) << x;
  }
}

TEST(FromPivot, IdentityPivotOnUnitInterval) {
  PivotSpec<int> spec{[](const int&, double theta) { return theta; }, Direction::increasing, uniform01(),
                      Support{0.0, 1.0}};
  const auto h = from_pivot(spec, 0);
  for (double x : {0.0, 0.1, 0.5, 0.77, 1.0}) EXPECT_DOUBLE_EQ(cd_eval(h, x), x);
}

TEST(FromPivot, DirectionConsistency) {
  const auto data = standardized_sample({0.2, 0.9, 1.7, -0.4}, 0.5, 1.0);
  auto psi = [](const DataSample& d, double theta) { return (theta - d.mean()) * 2.0; };
  const auto up = from_pivot(PivotSpec<DataSample>{psi, Direction::increasing, normal()}, data);
  const auto down = from_pivot(
      PivotSpec<DataSample>{[psi](const DataSample& d, double t) { return -psi(d, t); }, Direction::decreasing, normal()},
      data);
  for (double x = -3.0; x <= 4.0; x += 0.05) EXPECT_NEAR(cd_eval(up, x), cd_eval(down, x), 1e-12);
}

TEST(FromPivot, NonMonotonePivotIsRejected) {
  const auto data = standardized_sample({0.2, 0.9, 1.7, -0.4});
  PivotSpec<DataSample> spec{[](const DataSample& d, double t) { return (t - d.mean()) * (t - d.mean()); },
                             Direction::increasing, chi_square(1)};
  try {
    from_pivot(spec, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::monotonicity_violation);
  }
}

TEST(NormalMeanCd, KnownSigma) {
  const auto data = standardized_sample({3.0, 1.0, 2.0, 5.0}, 1.0, 0.7);
  const auto h = normal_mean_cd(data, 1.0);
  EXPECT_DOUBLE_EQ(cd_eval(h, 1.0), 0.5);
  EXPECT_NEAR(cd_eval(h, 1.98), oracle::normal_cdf(1.96), 1e-13);
  EXPECT_NEAR(cd_eval(h, 1.98), 0.97500, 1e-5);
  EXPECT_THROW(normal_mean_cd(data, 0.0), Error);
}

TEST(NormalMeanCd, UnknownSigmaUsesStudentT) {
  const auto data = standardized_sample({0.4, 2.0, -1.0, 0.3, 1.1}, 0.0, 1.0);
  const auto h = normal_mean_cd(data);
  const double t975 = oracle::bisect([](double t) { return oracle::t4_cdf(t) - 0.975; }, 0.0, 20.0);
  EXPECT_NEAR(cd_eval(h, t975 / std::sqrt(5.0)), 0.975, 1e-10);
  EXPECT_NEAR(cd_eval(h, 2.7764 / std::sqrt(5.0)), 0.975, 1e-4);
  EXPECT_THROW(normal_mean_cd(DataSample({2.0, 2.0, 2.0})), Error);
}

TEST(NormalVarianceCd, EdgesMedianAndMean) {
  const auto data = standardized_sample({0.1, 0.5, -0.7, 1.9, 0.2});
  const auto h = normal_variance_cd(data);
  EXPECT_EQ(cd_eval(h, -1.0), 0.0);
  EXPECT_EQ(cd_eval(h, 0.0), 0.0);
  EXPECT_GT(cd_eval(h, 1e6), 1.0 - 1e-9);
  const double median = oracle::bisect([](double x) { return oracle::chi_square_cdf_even(4, x) - 0.5; }, 0.0, 20.0);
  EXPECT_NEAR(cd_quantile(h, 0.5), 4.0 / median, 1e-10);
  // E[xi] = (n - 1) s^2 E[1 / chi2_4] = 4 / 2 = 2: the CD is median- but not mean-unbiased.
  const double mean = oracle::simpson([&](double v) { return std::exp(2.0 * v) * cd_density(h, std::exp(v)); },
                                      -20.0, 16.0, 1e-12);
  EXPECT_NEAR(mean, 2.0, 1e-4);
  EXPECT_GT(mean, cd_quantile(h, 0.5));
}

TEST(NormalVarianceCd, DensityMatchesDerivative) {
  const auto h = normal_variance_cd(standardized_sample({0.1, 0.5, -0.7, 1.9, 0.2, 3.0}));
  for (double x : {0.3, 0.8, 1.5, 4.0}) {
    const double fd = (cd_eval(h, x + 1e-6) - cd_eval(h, x - 1e-6)) / 2e-6;
    EXPECT_NEAR(cd_density(h, x), fd, 1e-6);
  }
}

TEST(FisherZ, Examples) {
  const auto h0 = fisher_z_corr_cd(uncorrelated_pairs(10));
  EXPECT_NEAR(cd_eval(h0, 0.0), 0.5, 1e-15);
  const auto h = fisher_z_corr_cd(uncorrelated_pairs(28));
  // sqrt(n - 3) = 5, so H(tanh(1.96 / 5)) = Phi(1.96) by direct inversion.
  EXPECT_NEAR(cd_eval(h, std::tanh(1.96 / 5.0)), oracle::normal_cdf(1.96), 1e-12);
  EXPECT_NEAR(cd_eval(h, std::tanh(1.96 / 5.0)), 0.975, 3e-6);
  double prev = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double v = cd_eval(h, -1.0 + 2.0 * i / 1000.0);
    EXPECT_GT(v, prev - 1e-15);
    prev = v;
  }
  EXPECT_EQ(cd_eval(h, -1.0), 0.0);
  EXPECT_EQ(cd_eval(h, 1.0), 1.0);
}

TEST(FisherZ, PerfectCorrelationIsDegenerate) {
  EXPECT_THROW(fisher_z_corr_cd(PairedSample({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10})), Error);
}

TEST(HallPivot, Examples) {
  const auto sym = standardized_sample({-2.0, -1.0, 0.0, 1.0, 2.0}, 0.0, 1.0);
  EXPECT_NEAR(sym.skewness(), 0.0, 1e-15);
  for (double mu : {-1.0, 0.0, 0.3}) {
    EXPECT_NEAR(hall_pivot(sym, mu), std::sqrt(5.0) * (0.0 - mu), 1e-14);
  }
  EXPECT_NEAR(hall_transform(0.0, 0.6, 25), 0.02, 1e-15);
  EXPECT_NEAR(hall_transform(1.3, 0.0, 25), 1.3, 1e-15);
}

TEST(HallPivot, MonotoneDecreasingInMean) {
  for (double lambda : {-1.0, -0.4, 0.0, 0.5, 1.0}) {
    for (std::size_t n : {20u, 50u, 200u}) {
      double prev = kInfinity;
      for (int i = 0; i <= 400; ++i) {
        const double t = -8.0 + 16.0 * (400 - i) / 400.0;  // t decreases as mu increases
        const double v = hall_transform(t, lambda, n);
        EXPECT_LT(v, prev);
        prev = v;
        EXPECT_NEAR(hall_transform_inverse(v, lambda, n), t, 1e-9 * std::max(1.0, std::fabs(t)));
      }
    }
  }
}

TEST(Constructors, OutputsAreMonotoneCdfs) {
  const auto data = standardized_sample({0.4, 2.0, -1.0, 0.3, 1.1, 0.8, -0.2}, 2.0, 1.5);
  for (const auto& h : {normal_mean_cd(data, 1.0), normal_mean_cd(data), normal_variance_cd(data),
                        fisher_z_corr_cd(PairedSample({1, 2, 3, 4, 5}, {1, 3, 2, 5, 4}))}) {
    const double lo = h.quantile(1e-4);
    const double hi = h.quantile(1.0 - 1e-4);
    double prev = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double v = cd_eval(h, lo + (hi - lo) * i / 1999.0);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}
