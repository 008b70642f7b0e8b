// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "ellslice/error.hpp"

namespace ellslice::harness {

namespace fs = std::filesystem;

namespace {

ChainConfig chain_config(const ExperimentConfig& cfg) {
  return ChainConfig{cfg.n_burn, cfg.n_keep, cfg.thin};
}

Json summary_json(const Stamp& stamp, const std::string& sampler,
                  const std::string& dataset, const RunResult& r) {
  Json j;
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  j["sampler"] = sampler;
  j["dataset"] = dataset;
  if (r.epsilon) j["epsilon"] = *r.epsilon;
  j["report"] = report_to_json(r.report);
  return j;
}

void write_samples(const fs::path& path, const ChainTrace& trace,
                   const Stamp& stamp) {
  if (trace.snapshots.empty()) return;
  const auto n = trace.snapshots.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(trace.snapshots.size()), n + 1);
  std::vector<std::string> header{"iteration"};
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("f" + std::to_string(i));
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    m(s, 0) = static_cast<double>(trace.snapshot_iterations[s]);
    m.row(s).tail(n) = trace.snapshots[s].transpose();
  }
  write_matrix_csv(path, header, m, stamp);
}

// Writes the files for one chain into dir.
void write_run(const fs::path& dir, const RunResult& r, const Stamp& stamp,
               const std::string& sampler, const std::string& dataset) {
  fs::create_directories(dir);
  write_trace_csv(dir / "trace.csv", r.trace, stamp);
  write_json(dir / "summary.json", summary_json(stamp, sampler, dataset, r));
  write_samples(dir / "samples.csv", r.trace, stamp);
}

}  // namespace

std::string dataset_name(const ModelSpec& spec, std::size_t dims) {
  if (spec.kind == ModelKind::Cox) return "cox";
  return to_string(spec.kind) + "_D" + std::to_string(dims);
}

Dataset make_dataset(const ModelSpec& spec, std::size_t dims,
                     std::size_t model_index, const Stamp& stamp) {
  spec.validate();
  Dataset out;
  out.manifest.kind = spec.kind;
  out.manifest.kernel = spec.effective_kernel();
  out.manifest.stamp = stamp;
  RngStream rng(stamp.seed, {kDatasetStream, model_index, dims});
  switch (spec.kind) {
    case ModelKind::Regression: {
      auto d = generate_regression_dataset(spec.n, dims, out.manifest.kernel,
                                           spec.noise_std, rng);
      out.inputs = std::move(d.inputs);
      out.observations = std::move(d.data.y);
      out.latent = std::move(d.latent);
      out.manifest.noise_variance = d.data.noise_variance;
      break;
    }
    case ModelKind::Classification: {
      auto d = generate_classification_dataset(spec.n, dims, out.manifest.kernel,
                                               spec.link, rng);
      out.inputs = std::move(d.inputs);
      out.observations = std::move(d.data.labels);
      out.latent = std::move(d.latent);
      out.manifest.link = spec.link;
      break;
    }
    case ModelKind::Cox: {
      const auto times = read_event_times(spec.events);
      const CoxData d = bin_events(times, spec.bin_width);
      out.inputs = bin_centres(d);
      out.observations = d.counts.cast<double>();
      out.manifest.offset = d.offset;
      out.manifest.bin_width = d.bin_width;
      out.manifest.origin = d.origin;
      out.manifest.n_events = times.size();
      break;
    }
  }
  out.manifest.n = static_cast<std::size_t>(out.inputs.rows());
  out.manifest.dims = static_cast<std::size_t>(out.inputs.cols());
  return out;
}

std::vector<fs::path> cmd_generate(const ExperimentConfig& cfg,
                                   const fs::path& out) {
  cfg.validate();
  const Stamp stamp{cfg.hash(), cfg.seed_value()};
  std::vector<fs::path> dirs;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const auto& spec = cfg.models[mi];
    const std::vector<std::size_t> dims_list =
        spec.kind == ModelKind::Cox ? std::vector<std::size_t>{1} : spec.dims;
    for (std::size_t dims : dims_list) {
      const fs::path dir = out / dataset_name(spec, dims);
      write_dataset(dir, make_dataset(spec, dims, mi, stamp));
      dirs.push_back(dir);
    }
  }
  return dirs;
}

Json TuneResult::to_json() const {
  Json j;
  j["best_epsilon"] = best_epsilon;
  j["grid"] = Json::array();
  for (const auto& e : entries) {
    Json row;
    row["epsilon"] = e.epsilon;
    if (e.report)
      row["report"] = report_to_json(*e.report);
    else
      row["error"] = e.error;
    j["grid"].push_back(row);
  }
  return j;
}

TuneResult tune_mh(const Dataset& data, const GaussianPrior& prior,
                   const std::vector<double>& grid, const ChainConfig& chain,
                   std::uint64_t seed, std::uint64_t stream_index) {
  require(!grid.empty(), Errc::InvalidConfig, "epsilon grid is empty");
  for (double e : grid)
    require(e > 0.0 && e <= 1.0, Errc::InvalidConfig,
            "epsilon grid values must lie in (0, 1]");
  const auto model = data.make_model();
  const LatentVector start = LatentVector::Zero(prior.dim());

  TuneResult out;
  double best_ess = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TuneEntry entry;
    entry.epsilon = grid[i];
    try {
      RngStream rng(seed, {kTuneStream, stream_index, i});
      const ChainTrace trace = run_chain(start, NealMh{MhConfig{grid[i]}},
                                         prior, *model, chain, rng);
      entry.report = summarize(trace);
    } catch (const Error& e) {
      entry.error = e.what();
    }
    const double ess = entry.report ? entry.report->ess : 0.0;
    if (ess > best_ess || (ess == best_ess && grid[i] > out.best_epsilon)) {
      best_ess = ess;
      out.best_epsilon = grid[i];
    }
    out.entries.push_back(std::move(entry));
  }
  return out;
}

RunResult run_sampler(const Dataset& data, const GaussianPrior& prior,
                      const SamplerSpec& sampler, const ChainConfig& chain,
                      RngStream& rng, std::uint64_t seed) {
  sampler.validate();
  RunResult out;
  OperatorSpec op = sampler.to_operator();
  if (sampler.kind == "neal-mh") {
    double eps = sampler.epsilon;
    if (sampler.tune) eps = tune_mh(data, prior, sampler.grid, chain, seed).best_epsilon;
    out.epsilon = eps;
    op = sampler.to_operator(eps);
  }
  const auto model = data.make_model();
  out.trace = run_chain(LatentVector::Zero(prior.dim()), op, prior, *model,
                        chain, rng);
  out.report = summarize(out.trace);
  return out;
}

RunResult cmd_run(const ExperimentConfig& cfg, const fs::path& dataset_dir,
                  const fs::path& out) {
  cfg.validate();
  const Stamp stamp{cfg.hash(), cfg.seed_value()};
  const Dataset data = load_dataset(dataset_dir);
  const GaussianPrior prior = data.make_prior();
  RngStream rng(stamp.seed, {kChainStream, 0});
  RunResult r;
  try {
    r = run_sampler(data, prior, cfg.sampler(), chain_config(cfg), rng,
                    stamp.seed);
  } catch (const Error& e) {
    throw Error(e.code(), cfg.sampler().label() + " on " +
                              dataset_dir.string() + ": " + e.what());
  }
  write_run(out, r, stamp, cfg.sampler().label(),
            dataset_dir.filename().string());
  return r;
}

TuneResult cmd_tune_mh(const ExperimentConfig& cfg, const fs::path& dataset_dir,
                       const std::vector<double>& grid, const fs::path& out) {
  cfg.validate();
  const Stamp stamp{cfg.hash(), cfg.seed_value()};
  const Dataset data = load_dataset(dataset_dir);
  const GaussianPrior prior = data.make_prior();
  TuneResult r = tune_mh(data, prior, grid, chain_config(cfg), stamp.seed);
  Json j = r.to_json();
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  j["dataset"] = dataset_dir.filename().string();
  write_json(out / "tune.json", j);
  return r;
}

Moments mean_std(const std::vector<double>& values) {
  Moments m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return m;
}

Json BenchmarkSummary::to_json() const {
  Json j = Json::array();
  for (const auto& c : cells) {
    Json row;
    row["sampler"] = c.sampler;
    row["dataset"] = c.dataset;
    if (c.epsilon) row["epsilon"] = *c.epsilon;
    row["repeats"] = c.runs.size() + c.failures.size();
    row["failures"] = c.failures;
    auto put = [&row](const char* name, const Moments& m) {
      row[name] = {{"mean", m.mean}, {"std", m.std}};
    };
    put("ess", c.ess);
    put("seconds", c.seconds);
    put("lik_evals", c.lik_evals);
    put("prior_evals", c.prior_evals);
    row["runs"] = Json::array();
    for (const auto& r : c.runs) row["runs"].push_back(report_to_json(r));
    j.push_back(row);
  }
  return j;
}

const CellSummary* BenchmarkSummary::find(const std::string& sampler,
                                          const std::string& dataset) const {
  for (const auto& c : cells)
    if (c.sampler == sampler && c.dataset == dataset) return &c;
  return nullptr;
}

BenchmarkSummary cmd_benchmark(const ExperimentConfig& cfg, const fs::path& out,
                               unsigned jobs) {
  cfg.validate();
  const Stamp stamp{cfg.hash(), cfg.seed_value()};
  const ChainConfig chain = chain_config(cfg);

  struct DatasetEntry {
    std::string name;
    Dataset data;
    GaussianPrior prior;
  };
  std::vector<DatasetEntry> datasets;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const auto& spec = cfg.models[mi];
    const std::vector<std::size_t> dims_list =
        spec.kind == ModelKind::Cox ? std::vector<std::size_t>{1} : spec.dims;
    for (std::size_t dims : dims_list) {
      Dataset d = make_dataset(spec, dims, mi, stamp);
      const std::string name = dataset_name(spec, dims);
      write_dataset(out / "datasets" / name, d);
      GaussianPrior prior = d.make_prior();
      datasets.push_back(DatasetEntry{name, std::move(d), std::move(prior)});
    }
  }

  struct Cell {
    SamplerSpec sampler;
    std::size_t dataset = 0;
    std::string dir;
    std::vector<std::optional<RunResult>> runs;
    std::vector<std::string> errors;
  };
  std::vector<Cell> cells;
  BenchmarkSummary summary;
  for (const auto& s : cfg.samplers) {
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      Cell cell;
      cell.sampler = s;
      cell.dataset = di;
      cell.dir = s.label() + "__" + datasets[di].name;
      cell.runs.resize(cfg.repeats);
      cell.errors.resize(cfg.repeats);
      CellSummary cs;
      cs.sampler = s.label();
      cs.dataset = datasets[di].name;
      if (s.kind == "neal-mh") {
        double eps = s.epsilon;
        if (s.tune) {
          const auto tuned = tune_mh(datasets[di].data, datasets[di].prior,
                                     s.grid, chain, stamp.seed, cells.size());
          eps = tuned.best_epsilon;
          write_json(out / "cells" / cell.dir / "tune.json", tuned.to_json());
        }
        cell.sampler.tune = false;
        cell.sampler.epsilon = eps;
        cs.epsilon = eps;
      }
      cells.push_back(std::move(cell));
      summary.cells.push_back(std::move(cs));
    }
  }

  // Tasks are (cell, repeat); each owns its output slot and RNG stream.
  const std::size_t n_tasks = cells.size() * cfg.repeats;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t ci = t / cfg.repeats;
      const std::size_t r = t % cfg.repeats;
      Cell& cell = cells[ci];
      const auto& ds = datasets[cell.dataset];
      try {
        RngStream rng(stamp.seed, {kBenchmarkStream, ci, r});
        cell.runs[r] = run_sampler(ds.data, ds.prior, cell.sampler, chain, rng,
                                   stamp.seed);
      } catch (const Error& e) {
        cell.errors[r] = "repeat " + std::to_string(r) + ": " + e.what();
      }
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    Cell& cell = cells[ci];
    CellSummary& cs = summary.cells[ci];
    std::vector<double> ess, secs, liks, priors;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      if (!cell.runs[r]) {
        cs.failures.push_back(cell.errors[r]);
        continue;
      }
      const RunResult& run = *cell.runs[r];
      write_run(out / "cells" / cell.dir / ("repeat_" + std::to_string(r)), run,
                stamp, cs.sampler, cs.dataset);
      cs.runs.push_back(run.report);
      ess.push_back(run.report.ess);
      secs.push_back(run.report.seconds);
      liks.push_back(static_cast<double>(run.report.total_lik_evals));
      priors.push_back(static_cast<double>(run.report.total_prior_evals));
    }
    cs.ess = mean_std(ess);
    cs.seconds = mean_std(secs);
    cs.lik_evals = mean_std(liks);
    cs.prior_evals = mean_std(priors);
  }

  Json j;
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  j["burn"] = cfg.n_burn;
  j["keep"] = cfg.n_keep;
  j["cells"] = summary.to_json();
  write_json(out / "benchmark.json", j);

  std::ofstream csv(out / "benchmark.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(Errc::Io, "cannot write benchmark.csv");
  csv << "# config_hash=" << stamp.config_hash << " seed=" << stamp.seed << '\n';
  csv << "sampler,dataset,epsilon,runs,failures,ess_mean,ess_std,seconds_mean,"
         "seconds_std,lik_evals_mean,lik_evals_std,prior_evals_mean,"
         "prior_evals_std\n";
  for (const auto& c : summary.cells) {
    csv << c.sampler << ',' << c.dataset << ','
        << (c.epsilon ? format_double(*c.epsilon) : "") << ',' << c.runs.size()
        << ',' << c.failures.size() << ',' << format_double(c.ess.mean) << ','
        << format_double(c.ess.std) << ',' << format_double(c.seconds.mean)
        << ',' << format_double(c.seconds.std) << ','
        << format_double(c.lik_evals.mean) << ',' << format_double(c.lik_evals.std)
        << ',' << format_double(c.prior_evals.mean) << ','
        << format_double(c.prior_evals.std) << '\n';
  }
  return summary;
}

EssReport cmd_diagnose(const fs::path& trace_csv) {
  return summarize(read_trace_csv(trace_csv));
}

}  // namespace ellslice::harness
