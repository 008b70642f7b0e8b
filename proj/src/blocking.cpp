// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/blocking.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ellslice/error.hpp"

namespace ellslice {

namespace {

Eigen::MatrixXd submatrix(const CovarianceMatrix& cov,
                          const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(i, j) = cov(rows[i], cols[j]);
  return out;
}

}  // namespace

BlockPartition::BlockPartition(std::vector<Eigen::Index> subset,
                               std::vector<Eigen::Index> complement)
    : a_(std::move(subset)), b_(std::move(complement)) {
  require(!a_.empty(), Errc::InvalidConfig, "block subset must be non-empty");
  const auto n = a_.size() + b_.size();
  std::vector<int> seen(n, 0);
  for (const auto* list : {&a_, &b_}) {
    for (Eigen::Index i : *list) {
      require(i >= 0 && static_cast<std::size_t>(i) < n, Errc::InvalidConfig,
              "block index " + std::to_string(i) + " out of range");
      require(seen[i]++ == 0, Errc::InvalidConfig,
              "block index " + std::to_string(i) + " listed twice");
    }
  }
}

BlockPartition BlockPartition::from_subset(Eigen::Index n,
                                           std::vector<Eigen::Index> subset) {
  std::vector<bool> in_a(n, false);
  for (Eigen::Index i : subset) {
    require(i >= 0 && i < n, Errc::InvalidConfig,
            "block index " + std::to_string(i) + " out of range");
    in_a[i] = true;
  }
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in_a[i]) rest.push_back(i);
  return BlockPartition(std::move(subset), std::move(rest));
}

std::vector<BlockPartition> contiguous_partitions(Eigen::Index n,
                                                  std::size_t blocks) {
  require(blocks >= 1 && static_cast<Eigen::Index>(blocks) <= n,
          Errc::InvalidConfig, "need between 1 and n blocks");
  std::vector<BlockPartition> out;
  const auto nb = static_cast<Eigen::Index>(blocks);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Eigen::Index lo = b * n / nb;
    const Eigen::Index hi = (b + 1) * n / nb;
    std::vector<Eigen::Index> subset(hi - lo);
    std::iota(subset.begin(), subset.end(), lo);
    out.push_back(BlockPartition::from_subset(n, std::move(subset)));
  }
  return out;
}

BlockPartition random_partition(Eigen::Index n, std::size_t size,
                                RngStream& rng) {
  require(size >= 1 && static_cast<Eigen::Index>(size) <= n,
          Errc::InvalidConfig, "block size must lie in [1, n]");
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates with our own uniform draws keeps streams portable.
  for (std::size_t i = 0; i < size; ++i) {
    const auto span = static_cast<double>(n - static_cast<Eigen::Index>(i));
    auto j = static_cast<Eigen::Index>(i) +
             static_cast<Eigen::Index>(rng.uniform() * span);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return BlockPartition::from_subset(n, std::move(idx));
}

Eigen::VectorXd gather(const LatentVector& f,
                       const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = f(idx[i]);
  return out;
}

BlockConditional::Parts BlockConditional::build(const CovarianceMatrix& cov,
                                                const BlockPartition& part) {
  validate_covariance(cov);
  require(cov.rows() == part.dim(), Errc::DimensionMismatch,
          "partition does not match covariance dimension");
  const auto& a = part.subset();
  const auto& b = part.complement();
  Eigen::MatrixXd s_aa = submatrix(cov, a, a);
  if (b.empty()) {
    return Parts{Eigen::MatrixXd::Zero(a.size(), 0),
                 GaussianPrior::factorize(s_aa)};
  }
  const Eigen::MatrixXd s_ba = submatrix(cov, b, a);
  const auto s_bb = GaussianPrior::factorize(submatrix(cov, b, b));
  const auto l_bb = s_bb.chol().triangularView<Eigen::Lower>();
  // S_BB^-1 S_BA = L^-T L^-1 S_BA
  Eigen::MatrixXd solved = l_bb.solve(s_ba);
  l_bb.transpose().solveInPlace(solved);
  Eigen::MatrixXd s = s_aa - s_ba.transpose() * solved;
  s = 0.5 * (s + s.transpose()).eval();
  return Parts{solved.transpose(), GaussianPrior::factorize(s)};
}

BlockConditional::BlockConditional(const CovarianceMatrix& cov,
                                   BlockPartition part)
    : BlockConditional(build(cov, part), part) {}

BlockConditional::BlockConditional(Parts parts, BlockPartition part)
    : part_(std::move(part)),
      gain_(std::move(parts.gain)),
      prior_(std::move(parts.prior)) {}

LatentVector BlockConditional::mean(const Eigen::VectorXd& f_b) const {
  require(f_b.size() == static_cast<Eigen::Index>(part_.complement().size()),
          Errc::DimensionMismatch, "f_B has the wrong length");
  if (f_b.size() == 0) return LatentVector::Zero(gain_.rows());
  return gain_ * f_b;
}

ConditionalGaussian conditional_gaussian(const CovarianceMatrix& cov,
                                         const BlockPartition& part,
                                         const Eigen::VectorXd& f_b) {
  BlockConditional c(cov, part);
  return ConditionalGaussian{c.mean(f_b), c.prior().cov()};
}

StepResult block_update(const SamplerState& state,
                        const BlockConditional& conditional,
                        const LikelihoodModel& model, const OperatorSpec& inner,
                        RngStream& rng) {
  const auto& part = conditional.partition();
  require(state.f.size() == part.dim() && model.dim() == part.dim(),
          Errc::DimensionMismatch, "state, model and partition disagree");
  const auto& a = part.subset();
  const LatentVector f_b = gather(state.f, part.complement());
  const LatentVector m = conditional.mean(f_b);

  const LatentVector base = state.f;
  FunctionModel local(static_cast<Eigen::Index>(a.size()),
                      [&](const LatentVector& g) {
                        LatentVector full = base;
                        for (std::size_t i = 0; i < a.size(); ++i)
                          full(a[i]) = g(i) + m(i);
                        return model.log_lik(full);
                      });

  SamplerState local_state;
  local_state.f = gather(state.f, a) - m;
  local_state.log_lik = state.log_lik;
  local_state.lik_evals = state.lik_evals;
  local_state.prior_evals = state.prior_evals;
  local_state.iterations = state.iterations;

  StepResult out = step(inner, local_state, conditional.prior(), local, rng);
  if (!out.accepted) {
    // (f_A - m) + m need not round back to f_A.
    out.state.f = state.f;
    return out;
  }
  LatentVector full = state.f;
  for (std::size_t i = 0; i < a.size(); ++i)
    full(a[i]) = out.state.f(i) + m(i);
  out.state.f = std::move(full);
  return out;
}

StepResult block_update(const SamplerState& state, const GaussianPrior& prior,
                        const LikelihoodModel& model,
                        const BlockPartition& part, const OperatorSpec& inner,
                        RngStream& rng) {
  return block_update(state, BlockConditional(prior.cov(), part), model, inner,
                      rng);
}

}  // namespace ellslice
