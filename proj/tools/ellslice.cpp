// Apache License, Version 2.0, refer to LICENSE.txt

// Command-line front end: generate, run, tune-mh, benchmark, diagnose.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ellslice/error.hpp"
#include "ellslice/harness/commands.hpp"
#include "ellslice/harness/config.hpp"
#include "ellslice/harness/dataset_io.hpp"

namespace fs = std::filesystem;
using namespace ellslice;
using namespace ellslice::harness;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> burn;
  std::optional<std::size_t> keep;
  std::optional<std::size_t> thin;
  std::optional<std::size_t> repeats;
  bool long_scale = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool chain_flags) {
  cmd->add_option("--config", f.config, "JSON config file")->required();
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  if (!chain_flags) return;
  cmd->add_option("--burn", f.burn, "burn-in iterations");
  cmd->add_option("--keep", f.keep, "kept iterations");
  cmd->add_option("--thin", f.thin, "snapshot latents every N kept iterations");
  cmd->add_flag("--paper-scale", f.long_scale,
                "10^4 burn-in and 10^5 kept iterations");
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig cfg = ExperimentConfig::load(f.config);
  if (f.long_scale) {
    cfg.n_burn = kLongBurn;
    cfg.n_keep = kLongKeep;
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.burn) cfg.n_burn = *f.burn;
  if (f.keep) cfg.n_keep = *f.keep;
  if (f.thin) cfg.thin = *f.thin;
  if (f.repeats) cfg.repeats = *f.repeats;
  return cfg;
}

void print_report(const EssReport& r) {
  std::cout << report_to_json(r).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptical slice sampling and baseline MCMC for latent Gaussian models"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  auto* gen = app.add_subcommand("generate", "write synthetic or binned datasets");
  add_common(gen, gen_flags, false);

  CommonFlags run_flags;
  std::string run_data;
  auto* run = app.add_subcommand("run", "run one chain on a dataset");
  add_common(run, run_flags, true);
  run->add_option("--data", run_data, "dataset directory")->required();

  CommonFlags tune_flags;
  std::string tune_data;
  std::vector<double> grid;
  auto* tune = app.add_subcommand("tune-mh", "grid search Neal M-H step size");
  add_common(tune, tune_flags, true);
  tune->add_option("--data", tune_data, "dataset directory")->required();
  tune->add_option("--grid", grid, "epsilon values in (0, 1]")
      ->required()
      ->delimiter(',');

  CommonFlags bench_flags;
  unsigned jobs = 1;
  auto* bench = app.add_subcommand("benchmark", "samplers x datasets x repeats");
  add_common(bench, bench_flags, true);
  bench->add_option("--repeats", bench_flags.repeats, "chains per cell");
  bench->add_option("--jobs", jobs, "worker threads");

  std::string trace_path;
  auto* diag = app.add_subcommand("diagnose", "ESS report for a trace CSV");
  diag->add_option("trace", trace_path, "trace.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      for (const auto& dir : cmd_generate(load_config(gen_flags), gen_flags.out))
        std::cout << dir.string() << '\n';
    } else if (*run) {
      const auto r = cmd_run(load_config(run_flags), run_data, run_flags.out);
      if (r.epsilon) std::cout << "epsilon " << *r.epsilon << '\n';
      print_report(r.report);
    } else if (*tune) {
      const auto r = cmd_tune_mh(load_config(tune_flags), tune_data, grid,
                                 tune_flags.out);
      std::cout << r.to_json().dump(2) << '\n';
    } else if (*bench) {
      const auto s = cmd_benchmark(load_config(bench_flags), bench_flags.out, jobs);
      for (const auto& c : s.cells) {
        std::cout << c.sampler << " on " << c.dataset << ": ESS "
                  << c.ess.mean << " +/- " << c.ess.std << ", "
                  << c.lik_evals.mean << " likelihood evals, "
                  << c.seconds.mean << " s";
        if (!c.failures.empty()) std::cout << ", " << c.failures.size() << " failed";
        std::cout << '\n';
      }
    } else if (*diag) {
      print_report(cmd_diagnose(trace_path));
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
