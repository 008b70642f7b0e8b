// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ellslice/diagnostics.hpp"
#include "ellslice/harness/config.hpp"
#include "ellslice/harness/dataset_io.hpp"
#include "ellslice/samplers.hpp"

namespace ellslice::harness {

// Random stream families; every stream is (seed, family, indices...).
inline constexpr std::uint64_t kDatasetStream = 1;
inline constexpr std::uint64_t kChainStream = 2;
inline constexpr std::uint64_t kTuneStream = 3;
inline constexpr std::uint64_t kBenchmarkStream = 4;

std::string dataset_name(const ModelSpec& spec, std::size_t dims);

/// Builds one dataset in memory. Synthetic kinds draw from
/// (seed, kDatasetStream, model_index, dims); Cox reads and bins the events.
Dataset make_dataset(const ModelSpec& spec, std::size_t dims,
                     std::size_t model_index, const Stamp& stamp);

/// Writes one directory per (model, dims) under `out`. Returns them in order.
std::vector<std::filesystem::path> cmd_generate(const ExperimentConfig& cfg,
                                                const std::filesystem::path& out);

struct TuneEntry {
  double epsilon = 0.0;
  std::optional<EssReport> report;  // empty when the chain failed
  std::string error;
};

struct TuneResult {
  double best_epsilon = 0.0;
  std::vector<TuneEntry> entries;

  Json to_json() const;
};

/// One chain per grid value from the prior mean; picks the epsilon with the
/// largest log-likelihood ESS, breaking ties towards larger epsilon. Grid
/// values must lie in (0, 1].
TuneResult tune_mh(const Dataset& data, const GaussianPrior& prior,
                   const std::vector<double>& grid, const ChainConfig& chain,
                   std::uint64_t seed, std::uint64_t stream_index = 0);

struct RunResult {
  ChainTrace trace;
  EssReport report;
  std::optional<double> epsilon;  // neal-mh only
};

/// Runs one chain from f = 0, tuning epsilon first when the sampler asks for
/// it. `rng` drives the chain; tuning uses its own streams off `seed`.
RunResult run_sampler(const Dataset& data, const GaussianPrior& prior,
                      const SamplerSpec& sampler, const ChainConfig& chain,
                      RngStream& rng, std::uint64_t seed);

/// Writes trace.csv, summary.json and (with thin > 0) samples.csv into out.
RunResult cmd_run(const ExperimentConfig& cfg,
                  const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& out);

/// Writes tune.json into out.
TuneResult cmd_tune_mh(const ExperimentConfig& cfg,
                       const std::filesystem::path& dataset_dir,
                       const std::vector<double>& grid,
                       const std::filesystem::path& out);

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

Moments mean_std(const std::vector<double>& values);

struct CellSummary {
  std::string sampler;
  std::string dataset;
  std::optional<double> epsilon;
  std::vector<EssReport> runs;
  std::vector<std::string> failures;
  Moments ess;
  Moments seconds;
  Moments lik_evals;
  Moments prior_evals;
};

struct BenchmarkSummary {
  std::vector<CellSummary> cells;

  Json to_json() const;
  const CellSummary* find(const std::string& sampler,
                          const std::string& dataset) const;
};

/// Every sampler on every dataset, `repeats` chains each, chain r of cell c
/// seeded from (seed, kBenchmarkStream, c, r). A failing chain is recorded
/// in its cell and the run continues. Writes per-repeat traces under
/// out/cells/, the datasets under out/datasets/, and benchmark.json plus
/// benchmark.csv at the top level.
BenchmarkSummary cmd_benchmark(const ExperimentConfig& cfg,
                               const std::filesystem::path& out,
                               unsigned jobs = 1);

/// ESS report of a trace file written by run or benchmark.
EssReport cmd_diagnose(const std::filesystem::path& trace_csv);

}  // namespace ellslice::harness
