// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellslice/kernels.hpp"
#include "ellslice/models.hpp"
#include "ellslice/samplers.hpp"

namespace ellslice::harness {

using Json = nlohmann::json;

inline constexpr std::size_t kDeskBurn = 1000;
inline constexpr std::size_t kDeskKeep = 10000;
inline constexpr std::size_t kLongBurn = 10000;
inline constexpr std::size_t kLongKeep = 100000;

enum class ModelKind { Regression, Classification, Cox };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

/// Which data to build, and the kernel for its prior. Kernel defaults depend
/// on the kind: unit lengthscale and variance for regression, log sf = 3.5
/// and log l = 2.5 for classification, sf^2 = 1 and l = 13516 days for Cox.
struct ModelSpec {
  ModelKind kind = ModelKind::Regression;
  std::size_t n = 200;
  std::vector<std::size_t> dims{1};
  double noise_std = 0.3;
  Link link = Link::Logistic;
  std::filesystem::path events;
  double bin_width = 50.0;
  std::optional<KernelConfig> kernel;

  KernelConfig effective_kernel() const;
  void validate() const;
};

struct SamplerSpec {
  std::string kind = "elliptical";  // elliptical | elliptical-aux | neal-mh | line-slice
  double epsilon = 0.5;
  /// neal-mh only: choose epsilon by grid search before running.
  bool tune = false;
  std::vector<double> grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
  double bracket_width = kTwoPi;
  int max_shrinks = 1000;

  void validate() const;
  OperatorSpec to_operator() const;
  OperatorSpec to_operator(double epsilon_override) const;
  std::string label() const;
};

struct ExperimentConfig {
  std::vector<ModelSpec> models{ModelSpec{}};
  std::vector<SamplerSpec> samplers{SamplerSpec{}};
  std::size_t n_burn = kDeskBurn;
  std::size_t n_keep = kDeskKeep;
  std::size_t thin = 0;
  std::optional<std::uint64_t> seed;
  std::size_t repeats = 1;

  const ModelSpec& model() const { return models.front(); }
  const SamplerSpec& sampler() const { return samplers.front(); }
  std::uint64_t seed_value() const;

  void validate() const;

  /// Accepts either singular "model"/"sampler" objects or "models"/"samplers"
  /// arrays. Relative event paths resolve against `base_dir`.
  static ExperimentConfig from_json(const Json& j,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  Json to_json() const;

  /// FNV-1a of the canonical JSON form, as 16 hex digits.
  std::string hash() const;
};

std::string fnv1a_hex(const std::string& bytes);

}  // namespace ellslice::harness
