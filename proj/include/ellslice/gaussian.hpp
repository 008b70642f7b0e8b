// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <Eigen/Dense>

#include "ellslice/rng.hpp"

namespace ellslice {

using LatentVector = Eigen::VectorXd;
using CovarianceMatrix = Eigen::MatrixXd;

inline constexpr double kDefaultJitterScale = 1e-10;

/// Throws InvalidConfig unless cov is non-empty, square, finite and
/// symmetric to within 1e-12 relative to its largest entry.
void validate_covariance(const CovarianceMatrix& cov);

/// Zero-mean multivariate Gaussian N(0, cov) with a cached lower Cholesky
/// factor. Immutable once built, so one prior can be shared by any number
/// of chains.
class GaussianPrior {
 public:
  /// Factorizes cov. If the plain factorization fails, retries with
  /// jitter = jitter_scale * max(diag) added to the diagonal, escalating the
  /// jitter by 10x on each of up to three retries.
  /// Throws NotPositiveDefinite when every attempt fails.
  static GaussianPrior factorize(const CovarianceMatrix& cov,
                                 double jitter_scale = kDefaultJitterScale);

  Eigen::Index dim() const { return cov_.rows(); }
  const CovarianceMatrix& cov() const { return cov_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  /// Diagonal jitter actually added before factorizing; zero when the
  /// covariance factorized as given.
  double jitter() const { return jitter_; }

  /// L * z for z a vector of independent standard normals.
  LatentVector sample(RngStream& rng) const;

  /// L * z for caller-supplied z.
  LatentVector transform(const Eigen::VectorXd& z) const;

  /// log N(f; 0, cov).
  double log_density(const LatentVector& f) const;

 private:
  GaussianPrior(CovarianceMatrix cov, Eigen::MatrixXd chol, double jitter,
                double log_det);

  CovarianceMatrix cov_;
  Eigen::MatrixXd chol_;
  double jitter_;
  double log_det_;
};

struct Rotation {
  LatentVector f;
  LatentVector nu;
};

/// Rotates the pair (f, nu) by theta within the plane they span:
/// f' = nu sin(theta) + f cos(theta), nu' = nu cos(theta) - f sin(theta).
Rotation rotate(const LatentVector& f, const LatentVector& nu, double theta);

}  // namespace ellslice
