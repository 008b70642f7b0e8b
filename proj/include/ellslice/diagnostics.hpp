// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ellslice/gaussian.hpp"

namespace ellslice {

/// Per-iteration record of a chain after burn-in.
struct ChainTrace {
  std::vector<double> log_lik;
  std::vector<std::uint64_t> lik_evals_cum;
  std::vector<std::uint64_t> prior_evals_cum;
  std::vector<std::uint32_t> proposals;
  std::vector<bool> accepted;

  /// Latent snapshots every `thin` kept iterations, with their indices.
  std::vector<LatentVector> snapshots;
  std::vector<std::size_t> snapshot_iterations;

  double wall_time = 0.0;

  std::size_t size() const { return log_lik.size(); }

  /// Throws InvalidState on inconsistent lengths or decreasing counters.
  void validate() const;
};

struct EssReport {
  std::size_t n_kept = 0;
  double ess = 0.0;
  double lag1_autocorr = 0.0;
  std::uint64_t total_lik_evals = 0;
  std::uint64_t total_prior_evals = 0;
  double seconds = 0.0;
};

/// Biased sample autocorrelation rho(0..max_lag), normalized so rho(0) = 1.
/// Needs at least 10 points and non-zero variance (DegenerateSeries).
std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t max_lag);

/// ESS = n / (1 + 2 sum_t rho(t)), the sum truncated by Geyer's initial
/// positive sequence, then clamped to [1, n]. Only n_kept, ess and
/// lag1_autocorr are filled in.
EssReport effective_sample_size(std::span<const double> series);

/// ESS of the log-likelihood trace, plus the trace's cost totals.
EssReport summarize(const ChainTrace& trace);

}  // namespace ellslice
