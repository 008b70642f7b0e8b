// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ellslice/diagnostics.hpp"
#include "ellslice/harness/config.hpp"
#include "ellslice/models.hpp"

namespace ellslice::harness {

/// Provenance tag written at the top of every CSV and into every JSON file.
struct Stamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct Manifest {
  ModelKind kind = ModelKind::Regression;
  std::size_t n = 0;
  std::size_t dims = 0;
  KernelConfig kernel;
  double noise_variance = 0.0;  // regression
  Link link = Link::Logistic;   // classification
  double offset = 0.0;          // cox
  double bin_width = 0.0;       // cox
  double origin = 0.0;          // cox
  std::size_t n_events = 0;     // cox
  Stamp stamp;

  Json to_json() const;
  static Manifest from_json(const Json& j);
};

/// A dataset directory: manifest.json, inputs.csv, observations.csv and,
/// for synthetic data, latents.csv holding the true latent values.
struct Dataset {
  Manifest manifest;
  InputMatrix inputs;
  Eigen::VectorXd observations;
  std::optional<LatentVector> latent;

  std::unique_ptr<LikelihoodModel> make_model() const;
  GaussianPrior make_prior() const;
  /// Regression only.
  RegressionData regression_data() const;
};

void write_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& dir);

/// CSV with a leading "# config_hash=... seed=..." line and a header row.
void write_matrix_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values, const Stamp& stamp);
/// Reads a numeric CSV, skipping '#' lines and the header row.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Columns: iteration, log_likelihood, cumulative_likelihood_evals, accepted.
void write_trace_csv(const std::filesystem::path& path, const ChainTrace& trace,
                     const Stamp& stamp);
/// Restores log_lik, lik_evals_cum and accepted; other columns are zeroed.
ChainTrace read_trace_csv(const std::filesystem::path& path);

Json report_to_json(const EssReport& report);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

}  // namespace ellslice::harness
