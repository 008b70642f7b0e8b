// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ellslice/error.hpp"

namespace ellslice {

namespace {

constexpr std::size_t kMinSeries = 10;

// Centred copy of the series plus its biased variance c(0).
struct Centred {
  std::vector<double> x;
  double c0 = 0.0;
};

Centred centre(std::span<const double> series) {
  require(series.size() >= kMinSeries, Errc::DegenerateSeries,
          "series needs at least " + std::to_string(kMinSeries) + " points");
  Centred out;
  double mean = 0.0;
  for (double v : series) {
    require(std::isfinite(v), Errc::DegenerateSeries,
            "series contains non-finite values");
    mean += v;
  }
  mean /= static_cast<double>(series.size());
  out.x.reserve(series.size());
  for (double v : series) out.x.push_back(v - mean);
  for (double v : out.x) out.c0 += v * v;
  out.c0 /= static_cast<double>(series.size());
  require(out.c0 > 0.0, Errc::DegenerateSeries, "series has zero variance");
  return out;
}

double autocov(const std::vector<double>& x, std::size_t lag) {
  double s = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) s += x[i] * x[i + lag];
  return s / static_cast<double>(x.size());
}

}  // namespace

void ChainTrace::validate() const {
  const std::size_t n = log_lik.size();
  require(lik_evals_cum.size() == n && prior_evals_cum.size() == n &&
              proposals.size() == n && accepted.size() == n,
          Errc::InvalidState, "trace columns have inconsistent lengths");
  require(snapshots.size() == snapshot_iterations.size(), Errc::InvalidState,
          "snapshot columns have inconsistent lengths");
  require(std::is_sorted(lik_evals_cum.begin(), lik_evals_cum.end()),
          Errc::InvalidState, "cumulative likelihood evaluations decrease");
  require(std::is_sorted(prior_evals_cum.begin(), prior_evals_cum.end()),
          Errc::InvalidState, "cumulative prior evaluations decrease");
}

std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t max_lag) {
  const Centred c = centre(series);
  max_lag = std::min(max_lag, series.size() - 1);
  std::vector<double> rho(max_lag + 1);
  rho[0] = 1.0;
  for (std::size_t t = 1; t <= max_lag; ++t) rho[t] = autocov(c.x, t) / c.c0;
  return rho;
}

EssReport effective_sample_size(std::span<const double> series) {
  const Centred c = centre(series);
  const std::size_t n = series.size();

  // Geyer: sum pairs Gamma_k = rho(2k) + rho(2k+1) while they stay positive.
  double pair_sum = 0.0;
  double lag1 = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double r0 = k == 0 ? 1.0 : autocov(c.x, 2 * k) / c.c0;
    const double r1 = autocov(c.x, 2 * k + 1) / c.c0;
    if (k == 0) lag1 = r1;
    const double gamma = r0 + r1;
    if (gamma <= 0.0) break;
    pair_sum += gamma;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum, 0.0);

  EssReport out;
  out.n_kept = n;
  out.lag1_autocorr = lag1;
  const double nd = static_cast<double>(n);
  out.ess = tau > 0.0 ? std::clamp(nd / tau, 1.0, nd) : nd;
  return out;
}

EssReport summarize(const ChainTrace& trace) {
  trace.validate();
  EssReport out = effective_sample_size(trace.log_lik);
  out.total_lik_evals = trace.lik_evals_cum.empty() ? 0 : trace.lik_evals_cum.back();
  out.total_prior_evals =
      trace.prior_evals_cum.empty() ? 0 : trace.prior_evals_cum.back();
  out.seconds = trace.wall_time;
  return out;
}

}  // namespace ellslice
