// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace ellslice {

/// A seeded random stream. Streams for parallel chains are derived from a
/// master seed plus stream indices, so results never depend on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : RngStream(seed, {}) {}
  RngStream(std::uint64_t master_seed,
            std::initializer_list<std::uint64_t> stream_indices);

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1]; safe to take the log of.
  double uniform_positive() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Eigen::VectorXd standard_normal(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace ellslice
