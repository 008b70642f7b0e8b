// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <Eigen/Dense>

#include "ellslice/gaussian.hpp"

namespace ellslice {

/// One row per point, one column per input dimension.
using InputMatrix = Eigen::MatrixXd;

struct KernelConfig {
  double lengthscale = 1.0;
  double signal_variance = 1.0;

  void validate() const;
};

/// Squared-exponential covariance:
///   cov(i, j) = signal_variance * exp(-0.5 * |x_i - x_j|^2 / lengthscale^2)
CovarianceMatrix se_covariance(const InputMatrix& inputs,
                               const KernelConfig& cfg);

}  // namespace ellslice
