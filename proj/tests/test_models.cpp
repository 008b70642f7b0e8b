// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "ellslice/gaussian.hpp"
#include "ellslice/kernels.hpp"
#include "ellslice/models.hpp"
#include "expect_error.hpp"
#include "test_support.hpp"

using namespace ellslice;
using ellslice::testing::error_code;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double regression_oracle(const Eigen::VectorXd& y, const Eigen::VectorXd& f,
                         double s2) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double r = y(i) - f(i);
    total += -0.5 * std::log(2.0 * std::numbers::pi * s2) - r * r / (2.0 * s2);
  }
  return total;
}

double log_factorial(int k) {
  double s = 0.0;
  for (int j = 2; j <= k; ++j) s += std::log(static_cast<double>(j));
  return s;
}

std::filesystem::path mining_path() {
  return std::filesystem::path(ELLSLICE_DATA_DIR) / "mining_disasters.txt";
}

}  // namespace

// Regression ------------------------------------------------------------------

TEST(RegressionLogLik, ZeroResidualUnitNoise) {
  const RegressionData d{Eigen::VectorXd::Constant(4, 1.5), 1.0};
  EXPECT_NEAR(regression_log_lik(d, d.y), -2.0 * kLog2Pi, 1e-12);
}

TEST(RegressionLogLik, SinglePoint) {
  RegressionData d{Eigen::VectorXd::Constant(1, 2.0), 0.25};
  Eigen::VectorXd f = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_NEAR(regression_log_lik(d, f),
              -0.5 * std::log(2.0 * std::numbers::pi * 0.25) - 2.0, 1e-12);
}

TEST(RegressionLogLik, MatchesPerTermOracle) {
  RngStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double s2 = 0.05 + rng.uniform();
    RegressionData d{rng.standard_normal(3), s2};
    const Eigen::VectorXd f = rng.standard_normal(3);
    EXPECT_NEAR(regression_log_lik(d, f), regression_oracle(d.y, f, s2), 1e-12);
  }
}

TEST(RegressionLogLik, DecreasesWithResidual) {
  const RegressionData d{Eigen::VectorXd::Zero(2), 0.3};
  double prev = std::numeric_limits<double>::infinity();
  for (double r = 0.0; r < 5.0; r += 0.25) {
    const double v = regression_log_lik(d, Eigen::VectorXd::Constant(2, r));
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(RegressionLogLik, DimensionMismatch) {
  const RegressionData d{Eigen::VectorXd::Zero(3), 1.0};
  EXPECT_EQ(error_code([&] { regression_log_lik(d, Eigen::VectorXd::Zero(2)); }),
            Errc::DimensionMismatch);
}

TEST(RegressionModel, RejectsBadData) {
  EXPECT_EQ(error_code([] {
              RegressionModel m(RegressionData{Eigen::VectorXd::Zero(2), 0.0});
            }),
            Errc::InvalidConfig);
  EXPECT_EQ(error_code([] { RegressionModel m(RegressionData{}); }),
            Errc::InvalidConfig);
}

// Classification --------------------------------------------------------------

TEST(ClassificationLogLik, LogisticAtZero) {
  Eigen::VectorXd labels(4);
  labels << 1, -1, 1, 1;
  const ClassificationData d{labels, Link::Logistic};
  EXPECT_NEAR(classification_log_lik(d, Eigen::VectorXd::Zero(4)),
              4.0 * std::log(0.5), 1e-12);
}

TEST(ClassificationLogLik, ProbitAtZero) {
  Eigen::VectorXd labels(3);
  labels << -1, -1, 1;
  const ClassificationData d{labels, Link::Probit};
  EXPECT_NEAR(classification_log_lik(d, Eigen::VectorXd::Zero(3)),
              3.0 * std::log(0.5), 1e-12);
}

TEST(ClassificationLogLik, LogisticDeepTailMatchesExtendedPrecision) {
  const ClassificationData d{Eigen::VectorXd::Constant(1, 1.0), Link::Logistic};
  const long double oracle = -std::log1p(std::exp(40.0L));
  EXPECT_NEAR(classification_log_lik(d, Eigen::VectorXd::Constant(1, -40.0)),
              static_cast<double>(oracle), 1e-12);
  // Symmetric side: log sigma(40) = -log1p(exp(-40)).
  const long double upper = -std::log1p(std::exp(-40.0L));
  EXPECT_NEAR(log_logistic(40.0), static_cast<double>(upper), 1e-25);
}

TEST(ClassificationLogLik, FiniteForHugeLatents) {
  for (Link link : {Link::Logistic, Link::Probit}) {
    const ClassificationData d{Eigen::VectorXd::Constant(2, 1.0), link};
    for (double f : {-1e6, -1e3, -40.0, 40.0, 1e3, 1e6}) {
      const double v = classification_log_lik(d, Eigen::VectorXd::Constant(2, f));
      EXPECT_TRUE(std::isfinite(v)) << "f=" << f;
      EXPECT_LE(v, 0.0);
    }
  }
}

TEST(ClassificationLogLik, ProbitTailMatchesErfc) {
  for (double a : {-1.0, -5.0, -20.0, -30.0}) {
    const double oracle = std::log(0.5 * std::erfc(-a / std::numbers::sqrt2));
    EXPECT_NEAR(log_normal_cdf(a), oracle, 1e-9 * std::abs(oracle));
  }
  // Past the erfc underflow the asymptote -a^2/2 - log(-a sqrt(2 pi)) rules.
  const double a = -100.0;
  EXPECT_NEAR(log_normal_cdf(a),
              -0.5 * a * a - std::log(-a * std::sqrt(2.0 * std::numbers::pi)),
              1e-3);
}

TEST(ClassificationModel, RejectsBadLabels) {
  EXPECT_EQ(error_code([] {
              ClassificationModel m(
                  ClassificationData{Eigen::VectorXd::Constant(2, 0.5)});
            }),
            Errc::InvalidConfig);
}

// Cox ---------------------------------------------------------------------------

TEST(CoxLogLik, ZeroCountsAtZero) {
  CoxData d;
  d.counts = Eigen::VectorXi::Zero(5);
  d.offset = -0.7;
  EXPECT_NEAR(cox_log_lik(d, Eigen::VectorXd::Zero(5)), -5.0 * std::exp(-0.7),
              1e-12);
}

TEST(CoxLogLik, SingleBinHandValue) {
  CoxData d;
  d.counts = Eigen::VectorXi::Constant(1, 2);
  d.offset = 0.0;
  EXPECT_NEAR(cox_log_lik(d, Eigen::VectorXd::Zero(1)), -1.0 - std::log(2.0),
              1e-12);
}

TEST(CoxLogLik, MatchesBruteForceFactorials) {
  RngStream rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    CoxData d;
    d.counts.resize(6);
    for (int i = 0; i < 6; ++i) d.counts(i) = static_cast<int>(rng.uniform() * 12);
    d.offset = rng.uniform(-2.0, 1.0);
    const Eigen::VectorXd f = rng.standard_normal(6);
    double oracle = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double eta = f(i) + d.offset;
      oracle += d.counts(i) * eta - std::exp(eta) - log_factorial(d.counts(i));
    }
    EXPECT_NEAR(cox_log_lik(d, f), oracle, 1e-9);
  }
}

TEST(CoxModel, RejectsNegativeCounts) {
  CoxData d;
  d.counts = Eigen::VectorXi::Constant(2, -1);
  EXPECT_EQ(error_code([&] { CoxModel m(d); }), Errc::InvalidConfig);
}

// Binning ------------------------------------------------------------------------

TEST(BinEvents, EmptyIsDegenerate) {
  EXPECT_EQ(error_code([] { bin_events(std::vector<double>{}, 50.0, 0.0); }),
            Errc::DegenerateDataset);
  EXPECT_EQ(error_code([] { bin_events(std::vector<double>{}, 50.0); }),
            Errc::DegenerateDataset);
}

TEST(BinEvents, HalfOpenBins) {
  const std::vector<double> t{0.0, 49.9, 50.0};
  const auto d = bin_events(t, 50.0, 0.0);
  ASSERT_EQ(d.counts.size(), 2);
  EXPECT_EQ(d.counts(0), 2);
  EXPECT_EQ(d.counts(1), 1);
  EXPECT_DOUBLE_EQ(d.offset, std::log(3.0 / 2.0));
}

TEST(BinEvents, EventBeforeOriginRejected) {
  const std::vector<double> t{5.0, 1.0};
  EXPECT_EQ(error_code([&] { bin_events(t, 1.0, 2.0); }), Errc::EventOutOfRange);
}

TEST(BinEvents, CentresSitMidBin) {
  const std::vector<double> t{10.0, 35.0};
  const auto d = bin_events(t, 10.0);
  const auto x = bin_centres(d);
  ASSERT_EQ(x.rows(), 3);
  EXPECT_DOUBLE_EQ(x(0, 0), 15.0);
  EXPECT_DOUBLE_EQ(x(2, 0), 35.0);
}

TEST(BinEvents, CountsAreConserved) {
  RngStream rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> t(1 + static_cast<std::size_t>(rng.uniform() * 100));
    for (auto& x : t) x = rng.uniform(0.0, 1000.0);
    const auto d = bin_events(t, 1.0 + rng.uniform() * 40.0, 0.0);
    ASSERT_EQ(d.counts.sum(), static_cast<int>(t.size()));
  }
}

TEST(MiningData, BinsToKnownShape) {
  const auto t = read_event_times(mining_path());
  ASSERT_EQ(t.size(), 191u);
  const auto d = bin_events(t, 50.0, 0.0);
  EXPECT_EQ(d.counts.size(), 811);
  EXPECT_EQ(d.counts.sum(), 191);
  EXPECT_NEAR(d.offset, std::log(191.0 / 811.0), 1e-15);

  CoxModel model(d);
  double lf = 0.0;
  for (Eigen::Index i = 0; i < d.counts.size(); ++i) lf += log_factorial(d.counts(i));
  EXPECT_NEAR(model.log_lik(Eigen::VectorXd::Zero(811)),
              191.0 * d.offset - 811.0 * std::exp(d.offset) - lf, 1e-9);
}

TEST(ReadEventTimes, SkipsBlankLinesAndRejectsJunk) {
  const auto dir = std::filesystem::temp_directory_path() / "ellslice_events";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ok.txt") << "1.5\n\n3\n  \n7\n";
    std::ofstream(dir / "bad.txt") << "1\nabc\n";
    std::ofstream(dir / "neg.txt") << "1\n-2\n";
  }
  EXPECT_EQ(read_event_times(dir / "ok.txt"), (std::vector<double>{1.5, 3.0, 7.0}));
  EXPECT_EQ(error_code([&] { read_event_times(dir / "bad.txt"); }), Errc::Io);
  EXPECT_EQ(error_code([&] { read_event_times(dir / "neg.txt"); }),
            Errc::EventOutOfRange);
  EXPECT_EQ(error_code([&] { read_event_times(dir / "missing.txt"); }), Errc::Io);
}

// Generators ---------------------------------------------------------------------

TEST(GenerateRegression, NoiselessObservationsEqualLatent) {
  RngStream rng(1);
  const auto ds = generate_regression_dataset(30, 2, KernelConfig{}, 0.0, rng);
  EXPECT_EQ(ds.data.y, ds.latent);
  EXPECT_EQ(ds.inputs.rows(), 30);
  EXPECT_EQ(ds.inputs.cols(), 2);
  EXPECT_GE(ds.inputs.minCoeff(), 0.0);
  EXPECT_LT(ds.inputs.maxCoeff(), 1.0);
}

TEST(GenerateRegression, ResidualVarianceNearNoise) {
  RngStream rng(2);
  const auto ds = generate_regression_dataset(1000, 1, KernelConfig{}, 0.3, rng);
  std::vector<double> r;
  for (Eigen::Index i = 0; i < ds.data.y.size(); ++i)
    r.push_back(ds.data.y(i) - ds.latent(i));
  const double v = ellslice::testing::variance(r);
  EXPECT_GE(v, 0.06);
  EXPECT_LE(v, 0.12);
  EXPECT_DOUBLE_EQ(ds.data.noise_variance, 0.09);
}

TEST(GenerateRegression, SeedReproducible) {
  RngStream a(7, {1, 0, 3}), b(7, {1, 0, 3});
  const auto x = generate_regression_dataset(50, 3, KernelConfig{}, 0.3, a);
  const auto y = generate_regression_dataset(50, 3, KernelConfig{}, 0.3, b);
  EXPECT_EQ(x.inputs, y.inputs);
  EXPECT_EQ(x.data.y, y.data.y);
}

TEST(GenerateClassification, LabelsFollowLink) {
  RngStream rng(3);
  const auto ds = generate_classification_dataset(
      400, 1, KernelConfig{1.0, 25.0}, Link::Logistic, rng);
  int agree = 0;
  for (Eigen::Index i = 0; i < ds.latent.size(); ++i) {
    ASSERT_TRUE(ds.data.labels(i) == 1.0 || ds.data.labels(i) == -1.0);
    if ((ds.latent(i) > 0) == (ds.data.labels(i) > 0)) ++agree;
  }
  // Latents with sd 5 make most labels agree with their sign.
  EXPECT_GT(agree, 300);
}

// Posterior oracle ----------------------------------------------------------------

TEST(PosteriorOracle, HugeNoiseGivesPriorMean) {
  const auto prior = GaussianPrior::factorize(Eigen::MatrixXd::Identity(3, 3));
  const RegressionData d{Eigen::VectorXd::Constant(3, 2.0), 1e12};
  const auto post = gp_regression_posterior_oracle(prior, d);
  EXPECT_LT(post.mean.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(post.cov.isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-10));
}

TEST(PosteriorOracle, OneDimensionalConjugate) {
  const auto prior = GaussianPrior::factorize(Eigen::MatrixXd::Identity(1, 1));
  const RegressionData d{Eigen::VectorXd::Constant(1, 1.0), 0.09};
  const auto post = gp_regression_posterior_oracle(prior, d);
  EXPECT_NEAR(post.mean(0), 1.0 / 1.09, 1e-14);
  EXPECT_NEAR(post.cov(0, 0), 0.09 / 1.09, 1e-14);
}

TEST(PosteriorOracle, MatchesPrecisionForm) {
  RngStream rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd cov = ellslice::testing::random_spd(6, rng);
    const auto prior = GaussianPrior::factorize(cov);
    const RegressionData d{rng.standard_normal(6), 0.2 + rng.uniform()};
    const auto post = gp_regression_posterior_oracle(prior, d);
    // Independent route through the precision matrix.
    const Eigen::MatrixXd prec =
        cov.inverse() +
        Eigen::MatrixXd::Identity(6, 6) / d.noise_variance;
    const Eigen::MatrixXd pc = prec.inverse();
    const Eigen::VectorXd pm = pc * d.y / d.noise_variance;
    EXPECT_LT((post.mean - pm).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((post.cov - pc).cwiseAbs().maxCoeff(), 1e-9);
    // Observing data never increases marginal variance.
    EXPECT_TRUE(((cov.diagonal() - post.cov.diagonal()).array() >= -1e-12).all());
  }
}

TEST(PosteriorOracle, DimensionMismatch) {
  const auto prior = GaussianPrior::factorize(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(error_code([&] {
              gp_regression_posterior_oracle(
                  prior, RegressionData{Eigen::VectorXd::Zero(2), 1.0});
            }),
            Errc::DimensionMismatch);
}
