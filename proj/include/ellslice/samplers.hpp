// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ellslice/diagnostics.hpp"
#include "ellslice/gaussian.hpp"
#include "ellslice/models.hpp"
#include "ellslice/rng.hpp"

namespace ellslice {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Current point of a chain plus its cost counters.
struct SamplerState {
  LatentVector f;
  /// Cached log L(f). When absent, the next step evaluates it and counts
  /// the evaluation.
  std::optional<double> log_lik;
  std::uint64_t lik_evals = 0;
  /// Prior log-density evaluations (only the line sampler needs these).
  std::uint64_t prior_evals = 0;
  std::uint64_t iterations = 0;

  /// State at f with log L(f) evaluated (and counted) once.
  static SamplerState at(LatentVector f, const LikelihoodModel& model);
};

struct EllipticalConfig {
  /// Width of the initial angle bracket, in (0, 2 pi]. The full ellipse is
  /// the parameter-free default; narrower brackets are placed at random
  /// around the current point.
  double bracket_width = kTwoPi;
  int max_shrinks = 1000;

  void validate() const;
};

struct MhConfig {
  double epsilon = 0.5;  // in [-1, 1]

  void validate() const;
};

struct StepResult {
  SamplerState state;
  bool accepted = true;
  std::uint32_t proposals = 0;

  // Diagnostics, retained so tests can replay and check a step.
  /// Angles tried, in order (line sampler: offsets along the line; aux
  /// variant: offsets from the entry angle). Empty for Metropolis-Hastings.
  std::vector<double> angles;
  LatentVector nu;
  /// Slice height log y (NaN for Metropolis-Hastings).
  double log_threshold = 0.0;
  /// Value compared against the threshold for the returned point: log L for
  /// the elliptical samplers, log prior + log L for the line sampler.
  double log_target = 0.0;
  /// Aux variant only: the angle that places the current state on the
  /// reparameterized ellipse.
  double entry_angle = 0.0;
};

/// Elliptical slice sampling: one draw nu ~ N(0, S), one slice height, then
/// proposals f cos(t) + nu sin(t) with the angle bracket shrunk towards the
/// current point until a proposal lies on the slice. Never rejects.
StepResult elliptical_slice_step(const SamplerState& state,
                                 const GaussianPrior& prior,
                                 const LikelihoodModel& model,
                                 const EllipticalConfig& cfg, RngStream& rng);

/// Reference two-operator form: resample the ellipse (nu0, nu1, t) given the
/// current point, then slice sample t with a randomly placed 2 pi bracket
/// whose endpoints are not themselves proposed.
StepResult elliptical_slice_aux_step(const SamplerState& state,
                                     const GaussianPrior& prior,
                                     const LikelihoodModel& model,
                                     RngStream& rng, int max_shrinks = 1000);

/// Neal's Metropolis-Hastings proposal sqrt(1 - e^2) f + e nu.
StepResult neal_mh_step(const SamplerState& state, const GaussianPrior& prior,
                        const LikelihoodModel& model, const MhConfig& cfg,
                        RngStream& rng);

/// Slice sampling along the line f + e nu against prior x likelihood. The
/// initial bracket has width bracket_width / 2 and is placed uniformly
/// at random over e = 0.
StepResult line_slice_step(const SamplerState& state,
                           const GaussianPrior& prior,
                           const LikelihoodModel& model,
                           const EllipticalConfig& cfg, RngStream& rng);

// Operator specs -------------------------------------------------------------

struct EllipticalSlice {
  EllipticalConfig cfg;
};
struct EllipticalSliceAux {
  int max_shrinks = 1000;
};
struct NealMh {
  MhConfig cfg;
};
struct LineSlice {
  EllipticalConfig cfg;
};

using OperatorSpec =
    std::variant<EllipticalSlice, EllipticalSliceAux, NealMh, LineSlice>;

std::string operator_name(const OperatorSpec& spec);

StepResult step(const OperatorSpec& spec, const SamplerState& state,
                const GaussianPrior& prior, const LikelihoodModel& model,
                RngStream& rng);

// Chains ---------------------------------------------------------------------

struct ChainConfig {
  std::size_t n_burn = 1000;
  std::size_t n_keep = 10000;
  /// Snapshot f every `thin` kept iterations; 0 keeps no snapshots.
  std::size_t thin = 0;

  void validate() const;
};

/// Called after every step, burn-in included, with the 0-based iteration.
using StepObserver = std::function<void(std::size_t, const StepResult&)>;

/// Applies the operator n_burn + n_keep times from `initial`. Counters in the
/// trace are cumulative over the kept iterations only. Operator failures are
/// rethrown as ChainError carrying the iteration index.
ChainTrace run_chain(const LatentVector& initial, const OperatorSpec& spec,
                     const GaussianPrior& prior, const LikelihoodModel& model,
                     const ChainConfig& cfg, RngStream& rng,
                     const StepObserver& observer = {});

}  // namespace ellslice
