// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/kernels.hpp"

#include <cmath>

#include "ellslice/error.hpp"

namespace ellslice {

void KernelConfig::validate() const {
  require(std::isfinite(lengthscale) && lengthscale > 0.0, Errc::InvalidConfig,
          "kernel lengthscale must be finite and > 0");
  require(std::isfinite(signal_variance) && signal_variance > 0.0,
          Errc::InvalidConfig, "kernel signal variance must be finite and > 0");
}

CovarianceMatrix se_covariance(const InputMatrix& inputs,
                               const KernelConfig& cfg) {
  cfg.validate();
  require(inputs.rows() >= 1 && inputs.cols() >= 1, Errc::InvalidConfig,
          "inputs must have at least one point and one dimension");
  require(inputs.allFinite(), Errc::InvalidConfig, "inputs must be finite");

  const Eigen::Index n = inputs.rows();
  const double inv_ell2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);
  CovarianceMatrix cov(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cov(j, j) = cfg.signal_variance;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d2 = (inputs.row(i) - inputs.row(j)).squaredNorm();
      const double k = cfg.signal_variance * std::exp(-0.5 * d2 * inv_ell2);
      cov(i, j) = k;
      cov(j, i) = k;
    }
  }
  return cov;
}

}  // namespace ellslice
