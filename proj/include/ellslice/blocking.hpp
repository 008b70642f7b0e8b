// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ellslice/gaussian.hpp"
#include "ellslice/models.hpp"
#include "ellslice/rng.hpp"
#include "ellslice/samplers.hpp"

namespace ellslice {

/// Split of 0..n-1 into the block to update (A) and the rest (B).
class BlockPartition {
 public:
  /// Throws InvalidConfig unless A is non-empty and A, B are disjoint and
  /// together cover 0..n-1 exactly.
  BlockPartition(std::vector<Eigen::Index> subset,
                 std::vector<Eigen::Index> complement);

  /// Complement is everything in 0..n-1 not in subset.
  static BlockPartition from_subset(Eigen::Index n,
                                    std::vector<Eigen::Index> subset);

  const std::vector<Eigen::Index>& subset() const { return a_; }
  const std::vector<Eigen::Index>& complement() const { return b_; }
  Eigen::Index dim() const {
    return static_cast<Eigen::Index>(a_.size() + b_.size());
  }

 private:
  std::vector<Eigen::Index> a_;
  std::vector<Eigen::Index> b_;
};

/// `blocks` contiguous index ranges of near-equal size.
std::vector<BlockPartition> contiguous_partitions(Eigen::Index n,
                                                  std::size_t blocks);

/// A uniformly random subset of `size` indices (sorted).
BlockPartition random_partition(Eigen::Index n, std::size_t size,
                                RngStream& rng);

struct ConditionalGaussian {
  LatentVector mean;
  CovarianceMatrix cov;
};

/// p(f_A | f_B) = N(m, S) with m = S_AB S_BB^-1 f_B and
/// S = S_AA - S_AB S_BB^-1 S_BA, using a Cholesky solve against S_BB.
ConditionalGaussian conditional_gaussian(const CovarianceMatrix& cov,
                                         const BlockPartition& part,
                                         const Eigen::VectorXd& f_b);

/// The f_B-independent pieces of the conditional: the gain S_AB S_BB^-1
/// and the factorized conditional covariance. Build once per partition and
/// reuse across sweeps.
class BlockConditional {
 public:
  BlockConditional(const CovarianceMatrix& cov, BlockPartition part);

  const BlockPartition& partition() const { return part_; }
  const GaussianPrior& prior() const { return prior_; }
  LatentVector mean(const Eigen::VectorXd& f_b) const;

 private:
  struct Parts {
    Eigen::MatrixXd gain;
    GaussianPrior prior;
  };
  static Parts build(const CovarianceMatrix& cov, const BlockPartition& part);
  BlockConditional(Parts parts, BlockPartition part);

  BlockPartition part_;
  Eigen::MatrixXd gain_;
  GaussianPrior prior_;
};

Eigen::VectorXd gather(const LatentVector& f,
                       const std::vector<Eigen::Index>& idx);

/// Updates f_A with any operator by sampling g = f_A - m under N(0, S) and
/// likelihood g -> L([g + m, f_B]). f_B is left bit-for-bit unchanged.
StepResult block_update(const SamplerState& state,
                        const BlockConditional& conditional,
                        const LikelihoodModel& model, const OperatorSpec& inner,
                        RngStream& rng);

/// Convenience form that builds the conditional from the full prior.
StepResult block_update(const SamplerState& state, const GaussianPrior& prior,
                        const LikelihoodModel& model,
                        const BlockPartition& part, const OperatorSpec& inner,
                        RngStream& rng);

}  // namespace ellslice
