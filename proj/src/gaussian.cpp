// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ellslice/error.hpp"

namespace ellslice {

namespace {

constexpr int kJitterRetries = 3;

bool try_cholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& out) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  out = llt.matrixL();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (!(out(i, i) > 0.0) || !std::isfinite(out(i, i))) return false;
  }
  return true;
}

}  // namespace

void validate_covariance(const CovarianceMatrix& cov) {
  require(cov.rows() >= 1, Errc::InvalidConfig, "covariance must be non-empty");
  require(cov.rows() == cov.cols(), Errc::InvalidConfig,
          "covariance must be square");
  require(cov.allFinite(), Errc::InvalidConfig,
          "covariance has non-finite entries");
  const double scale = cov.cwiseAbs().maxCoeff();
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, Errc::InvalidConfig,
          "covariance is not symmetric");
}

GaussianPrior::GaussianPrior(CovarianceMatrix cov, Eigen::MatrixXd chol,
                             double jitter, double log_det)
    : cov_(std::move(cov)),
      chol_(std::move(chol)),
      jitter_(jitter),
      log_det_(log_det) {}

GaussianPrior GaussianPrior::factorize(const CovarianceMatrix& cov,
                                       double jitter_scale) {
  validate_covariance(cov);
  require(jitter_scale >= 0.0 && std::isfinite(jitter_scale),
          Errc::InvalidConfig, "jitter_scale must be finite and >= 0");

  Eigen::MatrixXd chol;
  double jitter = 0.0;
  bool ok = try_cholesky(cov, chol);
  if (!ok && jitter_scale > 0.0) {
    const double max_diag = cov.diagonal().maxCoeff();
    jitter = jitter_scale * max_diag;
    for (int attempt = 0; attempt < kJitterRetries && !ok; ++attempt) {
      if (attempt > 0) jitter *= 10.0;
      Eigen::MatrixXd repaired = cov;
      repaired.diagonal().array() += jitter;
      ok = try_cholesky(repaired, chol);
    }
  }
  if (!ok) {
    throw Error(Errc::NotPositiveDefinite,
                "Cholesky factorization failed for " +
                    std::to_string(cov.rows()) + "x" +
                    std::to_string(cov.rows()) + " covariance");
  }
  const double log_det = 2.0 * chol.diagonal().array().log().sum();
  return GaussianPrior(cov, std::move(chol), jitter, log_det);
}

LatentVector GaussianPrior::sample(RngStream& rng) const {
  return transform(rng.standard_normal(dim()));
}

LatentVector GaussianPrior::transform(const Eigen::VectorXd& z) const {
  require(z.size() == dim(), Errc::DimensionMismatch,
          "standard normal vector has wrong length");
  return chol_.triangularView<Eigen::Lower>() * z;
}

double GaussianPrior::log_density(const LatentVector& f) const {
  require(f.size() == dim(), Errc::DimensionMismatch,
          "latent vector length does not match prior dimension");
  const Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(f);
  const double n = static_cast<double>(dim());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det_ +
                 w.squaredNorm());
}

Rotation rotate(const LatentVector& f, const LatentVector& nu, double theta) {
  require(f.size() == nu.size(), Errc::DimensionMismatch,
          "rotate: f and nu lengths differ");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Rotation{nu * s + f * c, nu * c - f * s};
}

}  // namespace ellslice
