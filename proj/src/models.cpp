// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "ellslice/error.hpp"

namespace ellslice {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void check_length(Eigen::Index expected, const LatentVector& f,
                  const char* what) {
  if (f.size() != expected) {
    throw Error(Errc::DimensionMismatch,
                std::string(what) + ": latent length " +
                    std::to_string(f.size()) + " != data length " +
                    std::to_string(expected));
  }
}

}  // namespace

double log_logistic(double a) {
  if (a >= 0.0) return -std::log1p(std::exp(-a));
  return a - std::log1p(std::exp(a));
}

double log_normal_cdf(double a) {
  if (a > -35.0) return std::log(0.5 * std::erfc(-a / std::numbers::sqrt2));
  // Asymptotic series of the Mills ratio; erfc underflows out here.
  const double a2 = a * a;
  const double series = 1.0 - 1.0 / a2 + 3.0 / (a2 * a2) - 15.0 / (a2 * a2 * a2);
  return -0.5 * a2 - std::log(-a) - 0.5 * kLog2Pi + std::log(series);
}

double regression_log_lik(const RegressionData& data, const LatentVector& f) {
  check_length(data.y.size(), f, "regression_log_lik");
  const double n = static_cast<double>(f.size());
  const double ss = (data.y - f).squaredNorm();
  return -0.5 * n * (kLog2Pi + std::log(data.noise_variance)) -
         0.5 * ss / data.noise_variance;
}

double classification_log_lik(const ClassificationData& data,
                              const LatentVector& f) {
  check_length(data.labels.size(), f, "classification_log_lik");
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double a = data.labels(i) * f(i);
    total += data.link == Link::Logistic ? log_logistic(a) : log_normal_cdf(a);
  }
  return total;
}

double cox_log_lik(const CoxData& data, const LatentVector& f) {
  check_length(data.counts.size(), f, "cox_log_lik");
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double eta = f(i) + data.offset;
    const double y = data.counts(i);
    total += y * eta - std::exp(eta) - std::lgamma(y + 1.0);
  }
  return total;
}

RegressionModel::RegressionModel(RegressionData data) : data_(std::move(data)) {
  require(data_.y.size() >= 1, Errc::InvalidConfig, "regression data is empty");
  require(data_.y.allFinite(), Errc::InvalidConfig,
          "regression observations must be finite");
  require(std::isfinite(data_.noise_variance) && data_.noise_variance > 0.0,
          Errc::InvalidConfig, "noise variance must be finite and > 0");
}

ClassificationModel::ClassificationModel(ClassificationData data)
    : data_(std::move(data)) {
  require(data_.labels.size() >= 1, Errc::InvalidConfig,
          "classification data is empty");
  for (Eigen::Index i = 0; i < data_.labels.size(); ++i) {
    require(data_.labels(i) == 1.0 || data_.labels(i) == -1.0,
            Errc::InvalidConfig, "labels must be -1 or +1");
  }
}

CoxModel::CoxModel(CoxData data) : data_(std::move(data)) {
  require(data_.counts.size() >= 1, Errc::InvalidConfig, "cox data is empty");
  require((data_.counts.array() >= 0).all(), Errc::InvalidConfig,
          "counts must be non-negative");
  require(std::isfinite(data_.offset), Errc::DegenerateDataset,
          "cox offset must be finite");
}

namespace {

InputMatrix unit_cube_inputs(std::size_t n, std::size_t dims, RngStream& rng) {
  require(n >= 1, Errc::InvalidConfig, "dataset size must be >= 1");
  require(dims >= 1, Errc::InvalidConfig, "input dimension must be >= 1");
  InputMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index d = 0; d < x.cols(); ++d) x(i, d) = rng.uniform();
  return x;
}

}  // namespace

RegressionDataset generate_regression_dataset(std::size_t n, std::size_t dims,
                                              const KernelConfig& cfg,
                                              double noise_std,
                                              RngStream& rng) {
  require(std::isfinite(noise_std) && noise_std >= 0.0, Errc::InvalidConfig,
          "noise std must be finite and >= 0");
  RegressionDataset out;
  out.inputs = unit_cube_inputs(n, dims, rng);
  const auto prior = GaussianPrior::factorize(se_covariance(out.inputs, cfg));
  out.latent = prior.sample(rng);
  out.data.y = out.latent;
  for (Eigen::Index i = 0; i < out.data.y.size(); ++i)
    out.data.y(i) += noise_std * rng.normal();
  out.data.noise_variance = noise_std * noise_std;
  return out;
}

ClassificationDataset generate_classification_dataset(std::size_t n,
                                                      std::size_t dims,
                                                      const KernelConfig& cfg,
                                                      Link link,
                                                      RngStream& rng) {
  ClassificationDataset out;
  out.inputs = unit_cube_inputs(n, dims, rng);
  const auto prior = GaussianPrior::factorize(se_covariance(out.inputs, cfg));
  out.latent = prior.sample(rng);
  out.data.link = link;
  out.data.labels.resize(out.latent.size());
  for (Eigen::Index i = 0; i < out.latent.size(); ++i) {
    const double log_p = link == Link::Logistic ? log_logistic(out.latent(i))
                                                : log_normal_cdf(out.latent(i));
    out.data.labels(i) = std::log(rng.uniform()) < log_p ? 1.0 : -1.0;
  }
  return out;
}

PosteriorMoments gp_regression_posterior_oracle(const GaussianPrior& prior,
                                                const RegressionData& data) {
  require(data.y.size() == prior.dim(), Errc::DimensionMismatch,
          "observations and prior differ in dimension");
  require(data.noise_variance > 0.0, Errc::InvalidConfig,
          "noise variance must be > 0");
  Eigen::MatrixXd sigma = prior.cov();
  sigma.diagonal().array() += prior.jitter();

  Eigen::MatrixXd k = sigma;
  k.diagonal().array() += data.noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite,
          "prior plus noise covariance is not positive definite");

  PosteriorMoments out;
  out.mean = sigma * llt.solve(data.y);
  out.cov = sigma - sigma * llt.solve(sigma);
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

CoxData bin_events(std::span<const double> event_times, double bin_width,
                   double origin) {
  require(std::isfinite(bin_width) && bin_width > 0.0, Errc::InvalidConfig,
          "bin width must be finite and > 0");
  require(!event_times.empty(), Errc::DegenerateDataset,
          "no events to bin: offset log(0 / bins) is -inf");
  double last = origin;
  for (double t : event_times) {
    if (!std::isfinite(t) || t < origin) {
      throw Error(Errc::EventOutOfRange,
                  "event time " + std::to_string(t) + " precedes origin " +
                      std::to_string(origin));
    }
    last = std::max(last, t);
  }
  const auto n_bins =
      static_cast<Eigen::Index>(std::floor((last - origin) / bin_width)) + 1;
  CoxData out;
  out.counts = Eigen::VectorXi::Zero(n_bins);
  out.bin_width = bin_width;
  out.origin = origin;
  for (double t : event_times) {
    auto k = static_cast<Eigen::Index>(std::floor((t - origin) / bin_width));
    k = std::min(k, n_bins - 1);
    ++out.counts(k);
  }
  out.offset = std::log(static_cast<double>(event_times.size()) /
                        static_cast<double>(n_bins));
  return out;
}

CoxData bin_events(std::span<const double> event_times, double bin_width) {
  require(!event_times.empty(), Errc::DegenerateDataset,
          "no events to bin: offset log(0 / bins) is -inf");
  const double origin =
      *std::min_element(event_times.begin(), event_times.end());
  return bin_events(event_times, bin_width, origin);
}

InputMatrix bin_centres(const CoxData& data) {
  InputMatrix x(data.counts.size(), 1);
  for (Eigen::Index k = 0; k < x.rows(); ++k)
    x(k, 0) = data.origin + (static_cast<double>(k) + 0.5) * data.bin_width;
  return x;
}

std::vector<double> read_event_times(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open event file " + path.string());
  std::vector<double> times;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    double t;
    if (!(ss >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(Errc::Io, path.string() + ":" + std::to_string(line_no) +
                                ": not a number");
    }
    std::string rest;
    if (ss >> rest) {
      throw Error(Errc::Io, path.string() + ":" + std::to_string(line_no) +
                                ": trailing characters");
    }
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(Errc::EventOutOfRange,
                  path.string() + ":" + std::to_string(line_no) +
                      ": event times must be finite and non-negative");
    }
    times.push_back(t);
  }
  return times;
}

}  // namespace ellslice
