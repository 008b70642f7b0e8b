// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/samplers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ellslice/error.hpp"

namespace ellslice {

namespace {

void check_dims(const SamplerState& state, const GaussianPrior& prior,
                const LikelihoodModel& model) {
  require(state.f.size() == prior.dim() && prior.dim() == model.dim(),
          Errc::DimensionMismatch,
          "state, prior and model dimensions disagree (" +
              std::to_string(state.f.size()) + ", " +
              std::to_string(prior.dim()) + ", " +
              std::to_string(model.dim()) + ")");
}

double evaluate(const LikelihoodModel& model, const LatentVector& f,
                std::uint64_t& counter) {
  const double ll = model.log_lik(f);
  ++counter;
  if (std::isnan(ll) || ll == std::numeric_limits<double>::infinity()) {
    throw Error(Errc::NonFiniteLikelihood,
                "log-likelihood evaluated to " + std::to_string(ll));
  }
  return ll;
}

// Starts a step: copies the state, fills in the cached log-likelihood if
// needed, and checks the current point has non-zero likelihood.
StepResult begin_step(const SamplerState& state, const GaussianPrior& prior,
                      const LikelihoodModel& model) {
  check_dims(state, prior, model);
  StepResult out;
  out.state = state;
  if (!out.state.log_lik) {
    out.state.log_lik = evaluate(model, out.state.f, out.state.lik_evals);
  }
  require(std::isfinite(*out.state.log_lik), Errc::InvalidState,
          "current state has zero likelihood (log L = -inf)");
  ++out.state.iterations;
  return out;
}

[[noreturn]] void shrink_limit(int max_shrinks) {
  throw Error(Errc::ShrinkLimitExceeded,
              "no point on the slice after " + std::to_string(max_shrinks) +
                  " bracket shrinks");
}

}  // namespace

SamplerState SamplerState::at(LatentVector f, const LikelihoodModel& model) {
  SamplerState s;
  s.f = std::move(f);
  s.log_lik = evaluate(model, s.f, s.lik_evals);
  return s;
}

void EllipticalConfig::validate() const {
  require(bracket_width > 0.0 && bracket_width <= kTwoPi, Errc::InvalidConfig,
          "bracket width must lie in (0, 2 pi]");
  require(max_shrinks > 0, Errc::InvalidConfig, "max_shrinks must be > 0");
}

void MhConfig::validate() const {
  require(std::isfinite(epsilon) && std::abs(epsilon) <= 1.0,
          Errc::InvalidConfig, "epsilon must lie in [-1, 1]");
}

StepResult elliptical_slice_step(const SamplerState& state,
                                 const GaussianPrior& prior,
                                 const LikelihoodModel& model,
                                 const EllipticalConfig& cfg, RngStream& rng) {
  cfg.validate();
  StepResult out = begin_step(state, prior, model);
  const LatentVector& f = state.f;

  out.nu = prior.sample(rng);
  out.log_threshold = *out.state.log_lik + std::log(rng.uniform_positive());

  const double width = cfg.bracket_width;
  double theta, theta_min, theta_max;
  if (width == kTwoPi) {
    theta = rng.uniform(0.0, kTwoPi);
    theta_min = theta - kTwoPi;
    theta_max = theta;
  } else {
    // A narrower bracket is placed at random over 0 and the first angle is
    // drawn inside it; proposing its endpoint would not be reversible.
    theta_min = -width * rng.uniform();
    theta_max = theta_min + width;
    theta = rng.uniform(theta_min, theta_max);
  }

  for (int shrinks = 0;; ++shrinks) {
    out.angles.push_back(theta);
    ++out.proposals;
    LatentVector proposal = f * std::cos(theta) + out.nu * std::sin(theta);
    const double ll = evaluate(model, proposal, out.state.lik_evals);
    if (ll > out.log_threshold) {
      out.state.f = std::move(proposal);
      out.state.log_lik = ll;
      out.log_target = ll;
      out.accepted = true;
      return out;
    }
    if (shrinks + 1 >= cfg.max_shrinks) shrink_limit(cfg.max_shrinks);
    // theta == 0 exactly goes to the upper edge.
    if (theta < 0.0)
      theta_min = theta;
    else
      theta_max = theta;
    theta = rng.uniform(theta_min, theta_max);
  }
}

StepResult elliptical_slice_aux_step(const SamplerState& state,
                                     const GaussianPrior& prior,
                                     const LikelihoodModel& model,
                                     RngStream& rng, int max_shrinks) {
  require(max_shrinks > 0, Errc::InvalidConfig, "max_shrinks must be > 0");
  StepResult out = begin_step(state, prior, model);
  const LatentVector& f = state.f;

  // Operator 1: resample (nu0, nu1, theta) keeping f fixed.
  const double entry = rng.uniform(0.0, kTwoPi);
  out.entry_angle = entry;
  out.nu = prior.sample(rng);
  const LatentVector nu0 = f * std::sin(entry) + out.nu * std::cos(entry);
  const LatentVector nu1 = f * std::cos(entry) - out.nu * std::sin(entry);

  // Operator 2: slice sample theta, offsets measured from the entry angle.
  out.log_threshold = *out.state.log_lik + std::log(rng.uniform_positive());
  double lo = -kTwoPi * rng.uniform();
  double hi = lo + kTwoPi;

  for (int shrinks = 0;; ++shrinks) {
    const double offset = rng.uniform(lo, hi);
    out.angles.push_back(offset);
    ++out.proposals;
    const double theta = entry + offset;
    LatentVector proposal = nu0 * std::sin(theta) + nu1 * std::cos(theta);
    const double ll = evaluate(model, proposal, out.state.lik_evals);
    if (ll > out.log_threshold) {
      out.state.f = std::move(proposal);
      out.state.log_lik = ll;
      out.log_target = ll;
      out.accepted = true;
      return out;
    }
    if (shrinks + 1 >= max_shrinks) shrink_limit(max_shrinks);
    if (offset < 0.0)
      lo = offset;
    else
      hi = offset;
  }
}

StepResult neal_mh_step(const SamplerState& state, const GaussianPrior& prior,
                        const LikelihoodModel& model, const MhConfig& cfg,
                        RngStream& rng) {
  cfg.validate();
  StepResult out = begin_step(state, prior, model);
  const double current = *out.state.log_lik;

  out.nu = prior.sample(rng);
  LatentVector proposal =
      std::sqrt(1.0 - cfg.epsilon * cfg.epsilon) * state.f + cfg.epsilon * out.nu;
  const double ll = evaluate(model, proposal, out.state.lik_evals);
  out.proposals = 1;
  out.log_threshold = std::numeric_limits<double>::quiet_NaN();

  const double log_u = std::log(rng.uniform_positive());
  out.accepted = ll - current >= log_u;
  if (out.accepted) {
    out.state.f = std::move(proposal);
    out.state.log_lik = ll;
  }
  out.log_target = *out.state.log_lik;
  return out;
}

StepResult line_slice_step(const SamplerState& state,
                           const GaussianPrior& prior,
                           const LikelihoodModel& model,
                           const EllipticalConfig& cfg, RngStream& rng) {
  cfg.validate();
  StepResult out = begin_step(state, prior, model);
  const LatentVector& f = state.f;

  // On a line the prior does not cancel, so the slice is on prior x L.
  const double current = prior.log_density(f) + *out.state.log_lik;
  ++out.state.prior_evals;

  out.nu = prior.sample(rng);
  out.log_threshold = current + std::log(rng.uniform_positive());

  const double width = 0.5 * cfg.bracket_width;
  double lo = -width * rng.uniform();
  double hi = lo + width;

  for (int shrinks = 0;; ++shrinks) {
    const double eps = rng.uniform(lo, hi);
    out.angles.push_back(eps);
    ++out.proposals;
    LatentVector proposal = f + eps * out.nu;
    const double lp = prior.log_density(proposal);
    ++out.state.prior_evals;
    const double ll = evaluate(model, proposal, out.state.lik_evals);
    if (lp + ll > out.log_threshold) {
      out.state.f = std::move(proposal);
      out.state.log_lik = ll;
      out.log_target = lp + ll;
      out.accepted = true;
      return out;
    }
    if (shrinks + 1 >= cfg.max_shrinks) shrink_limit(cfg.max_shrinks);
    if (eps < 0.0)
      lo = eps;
    else
      hi = eps;
  }
}

std::string operator_name(const OperatorSpec& spec) {
  struct Visitor {
    std::string operator()(const EllipticalSlice&) const { return "elliptical"; }
    std::string operator()(const EllipticalSliceAux&) const {
      return "elliptical-aux";
    }
    std::string operator()(const NealMh&) const { return "neal-mh"; }
    std::string operator()(const LineSlice&) const { return "line-slice"; }
  };
  return std::visit(Visitor{}, spec);
}

StepResult step(const OperatorSpec& spec, const SamplerState& state,
                const GaussianPrior& prior, const LikelihoodModel& model,
                RngStream& rng) {
  struct Visitor {
    const SamplerState& state;
    const GaussianPrior& prior;
    const LikelihoodModel& model;
    RngStream& rng;
    StepResult operator()(const EllipticalSlice& s) const {
      return elliptical_slice_step(state, prior, model, s.cfg, rng);
    }
    StepResult operator()(const EllipticalSliceAux& s) const {
      return elliptical_slice_aux_step(state, prior, model, rng, s.max_shrinks);
    }
    StepResult operator()(const NealMh& s) const {
      return neal_mh_step(state, prior, model, s.cfg, rng);
    }
    StepResult operator()(const LineSlice& s) const {
      return line_slice_step(state, prior, model, s.cfg, rng);
    }
  };
  return std::visit(Visitor{state, prior, model, rng}, spec);
}

void ChainConfig::validate() const {
  require(n_keep >= 1, Errc::InvalidConfig, "n_keep must be >= 1");
}

ChainTrace run_chain(const LatentVector& initial, const OperatorSpec& spec,
                     const GaussianPrior& prior, const LikelihoodModel& model,
                     const ChainConfig& cfg, RngStream& rng,
                     const StepObserver& observer) {
  cfg.validate();
  require(initial.allFinite(), Errc::InvalidState,
          "initial latent vector must be finite");

  ChainTrace trace;
  trace.log_lik.reserve(cfg.n_keep);
  trace.lik_evals_cum.reserve(cfg.n_keep);
  trace.prior_evals_cum.reserve(cfg.n_keep);
  trace.proposals.reserve(cfg.n_keep);
  trace.accepted.reserve(cfg.n_keep);

  const auto start = std::chrono::steady_clock::now();
  SamplerState state;
  state.f = initial;
  std::uint64_t lik_base = 0;
  std::uint64_t prior_base = 0;
  const std::size_t total = cfg.n_burn + cfg.n_keep;

  for (std::size_t it = 0; it < total; ++it) {
    if (it == cfg.n_burn) {
      lik_base = state.lik_evals;
      prior_base = state.prior_evals;
    }
    StepResult result;
    try {
      result = step(spec, state, prior, model, rng);
    } catch (const Error& e) {
      throw ChainError(e, it);
    }
    if (observer) observer(it, result);
    state = std::move(result.state);
    if (it < cfg.n_burn) continue;

    const std::size_t kept = it - cfg.n_burn;
    trace.log_lik.push_back(*state.log_lik);
    trace.lik_evals_cum.push_back(state.lik_evals - lik_base);
    trace.prior_evals_cum.push_back(state.prior_evals - prior_base);
    trace.proposals.push_back(result.proposals);
    trace.accepted.push_back(result.accepted);
    if (cfg.thin > 0 && (kept + 1) % cfg.thin == 0) {
      trace.snapshots.push_back(state.f);
      trace.snapshot_iterations.push_back(kept);
    }
  }
  trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return trace;
}

}  // namespace ellslice
