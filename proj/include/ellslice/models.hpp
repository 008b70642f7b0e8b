// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <functional>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ellslice/gaussian.hpp"
#include "ellslice/kernels.hpp"
#include "ellslice/rng.hpp"

namespace ellslice {

/// log L(f) = log p(data | f), up to nothing: every model keeps its
/// normalizing constants so traces from different samplers line up.
/// Implementations are immutable and safe to evaluate concurrently. They
/// return a finite value or -inf, never NaN, for finite f.
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double log_lik(const LatentVector& f) const = 0;
};

struct RegressionData {
  Eigen::VectorXd y;
  double noise_variance = 1.0;
};

enum class Link { Logistic, Probit };

struct ClassificationData {
  Eigen::VectorXd labels;  // entries are -1 or +1
  Link link = Link::Logistic;
};

struct CoxData {
  Eigen::VectorXi counts;
  double offset = 0.0;  // log mean rate plus log bin width
  double bin_width = 1.0;
  double origin = 0.0;
};

double regression_log_lik(const RegressionData& data, const LatentVector& f);
double classification_log_lik(const ClassificationData& data,
                              const LatentVector& f);
double cox_log_lik(const CoxData& data, const LatentVector& f);

/// Numerically stable log(1 / (1 + exp(-a))).
double log_logistic(double a);
/// Numerically stable log of the standard normal CDF.
double log_normal_cdf(double a);

class RegressionModel final : public LikelihoodModel {
 public:
  explicit RegressionModel(RegressionData data);
  Eigen::Index dim() const override { return data_.y.size(); }
  double log_lik(const LatentVector& f) const override {
    return regression_log_lik(data_, f);
  }
  const RegressionData& data() const { return data_; }

 private:
  RegressionData data_;
};

class ClassificationModel final : public LikelihoodModel {
 public:
  explicit ClassificationModel(ClassificationData data);
  Eigen::Index dim() const override { return data_.labels.size(); }
  double log_lik(const LatentVector& f) const override {
    return classification_log_lik(data_, f);
  }
  const ClassificationData& data() const { return data_; }

 private:
  ClassificationData data_;
};

class CoxModel final : public LikelihoodModel {
 public:
  explicit CoxModel(CoxData data);
  Eigen::Index dim() const override { return data_.counts.size(); }
  double log_lik(const LatentVector& f) const override {
    return cox_log_lik(data_, f);
  }
  const CoxData& data() const { return data_; }

 private:
  CoxData data_;
};

/// log L(f) = value for every f; turns any sampler into a prior sampler.
class ConstantModel final : public LikelihoodModel {
 public:
  explicit ConstantModel(Eigen::Index n, double value = 0.0)
      : n_(n), value_(value) {}
  Eigen::Index dim() const override { return n_; }
  double log_lik(const LatentVector&) const override { return value_; }

 private:
  Eigen::Index n_;
  double value_;
};

/// Adapts an arbitrary callable.
class FunctionModel final : public LikelihoodModel {
 public:
  using Fn = std::function<double(const LatentVector&)>;
  FunctionModel(Eigen::Index n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  Eigen::Index dim() const override { return n_; }
  double log_lik(const LatentVector& f) const override { return fn_(f); }

 private:
  Eigen::Index n_;
  Fn fn_;
};

// Synthetic data -------------------------------------------------------------

struct RegressionDataset {
  InputMatrix inputs;
  RegressionData data;
  LatentVector latent;
};

struct ClassificationDataset {
  InputMatrix inputs;
  ClassificationData data;
  LatentVector latent;
};

/// Unit-hypercube inputs, latents from the SE-kernel prior, observations
/// y = f + noise_std * z.
RegressionDataset generate_regression_dataset(std::size_t n, std::size_t dims,
                                              const KernelConfig& cfg,
                                              double noise_std, RngStream& rng);

/// Unit-hypercube inputs, latents from the SE-kernel prior, labels drawn
/// through the link: P(y = +1 | f) = sigma(f).
ClassificationDataset generate_classification_dataset(std::size_t n,
                                                      std::size_t dims,
                                                      const KernelConfig& cfg,
                                                      Link link,
                                                      RngStream& rng);

struct PosteriorMoments {
  LatentVector mean;
  CovarianceMatrix cov;
};

/// Exact Gaussian posterior for GP regression:
///   mean = S (S + s2 I)^-1 y,  cov = S - S (S + s2 I)^-1 S
/// where S is the prior covariance (including any jitter it was factored
/// with) and s2 the noise variance.
PosteriorMoments gp_regression_posterior_oracle(const GaussianPrior& prior,
                                                const RegressionData& data);

// Point-process binning ------------------------------------------------------

/// Counts events into half-open bins [origin + k w, origin + (k + 1) w),
/// using as many bins as needed to reach the last event. The offset is
/// log(total events / number of bins).
CoxData bin_events(std::span<const double> event_times, double bin_width,
                   double origin);

/// As above with the origin at the earliest event.
CoxData bin_events(std::span<const double> event_times, double bin_width);

/// Bin centres as a one-column input matrix, for building the GP prior.
InputMatrix bin_centres(const CoxData& data);

/// One non-negative number per line; blank lines are skipped.
std::vector<double> read_event_times(const std::filesystem::path& path);

}  // namespace ellslice
