// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ellslice/error.hpp"

namespace ellslice::harness {

namespace {

constexpr double kCoxLengthscale = 13516.0;  // a third of the data's range

[[noreturn]] void bad(const std::string& what) {
  throw Error(Errc::InvalidConfig, what);
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    bad(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::size_t get_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    bad(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

ModelSpec parse_model(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad("model entry must be an object");
  ModelSpec m;
  m.kind = parse_model_kind(get_or<std::string>(j, "kind", "regression"));
  m.n = get_count(j, "n", m.n);
  if (j.contains("dims")) {
    const Json& d = j.at("dims");
    if (d.is_array()) {
      m.dims.clear();
      for (const auto& v : d) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
          bad("'dims' entries must be non-negative integers");
        m.dims.push_back(v.get<std::size_t>());
      }
    } else {
      m.dims = {get_count(j, "dims", 1)};
    }
  }
  m.noise_std = get_or<double>(j, "noise_std", m.noise_std);
  const auto link = get_or<std::string>(j, "link", "logistic");
  if (link == "logistic")
    m.link = Link::Logistic;
  else if (link == "probit")
    m.link = Link::Probit;
  else
    bad("unknown link '" + link + "'");
  if (j.contains("events")) {
    std::filesystem::path p = get_or<std::string>(j, "events", "");
    m.events = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  m.bin_width = get_or<double>(j, "bin_width", m.bin_width);
  if (j.contains("kernel")) {
    const Json& k = j.at("kernel");
    KernelConfig kc = m.effective_kernel();
    kc.lengthscale = get_or<double>(k, "lengthscale", kc.lengthscale);
    kc.signal_variance = get_or<double>(k, "signal_variance", kc.signal_variance);
    m.kernel = kc;
  }
  return m;
}

SamplerSpec parse_sampler(const Json& j) {
  SamplerSpec s;
  if (j.is_string()) {
    s.kind = j.get<std::string>();
    return s;
  }
  if (!j.is_object()) bad("sampler entry must be an object or a name");
  s.kind = get_or<std::string>(j, "kind", s.kind);
  if (j.contains("epsilon")) {
    const Json& e = j.at("epsilon");
    if (e.is_string() && e.get<std::string>() == "tuned")
      s.tune = true;
    else if (e.is_number())
      s.epsilon = e.get<double>();
    else
      bad("'epsilon' must be a number or \"tuned\"");
  }
  s.grid = get_or<std::vector<double>>(j, "grid", s.grid);
  s.bracket_width = get_or<double>(j, "bracket_width", s.bracket_width);
  s.max_shrinks = get_or<int>(j, "max_shrinks", s.max_shrinks);
  return s;
}

Json model_to_json(const ModelSpec& m) {
  Json j;
  j["kind"] = to_string(m.kind);
  j["n"] = m.n;
  j["dims"] = m.dims;
  j["noise_std"] = m.noise_std;
  j["link"] = m.link == Link::Logistic ? "logistic" : "probit";
  if (!m.events.empty()) j["events"] = m.events.generic_string();
  j["bin_width"] = m.bin_width;
  const KernelConfig k = m.effective_kernel();
  j["kernel"] = {{"lengthscale", k.lengthscale},
                 {"signal_variance", k.signal_variance}};
  return j;
}

Json sampler_to_json(const SamplerSpec& s) {
  Json j;
  j["kind"] = s.kind;
  if (s.tune)
    j["epsilon"] = "tuned";
  else
    j["epsilon"] = s.epsilon;
  j["grid"] = s.grid;
  j["bracket_width"] = s.bracket_width;
  j["max_shrinks"] = s.max_shrinks;
  return j;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Regression: return "regression";
    case ModelKind::Classification: return "classification";
    case ModelKind::Cox: return "cox";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "regression") return ModelKind::Regression;
  if (s == "classification") return ModelKind::Classification;
  if (s == "cox") return ModelKind::Cox;
  bad("unknown model kind '" + s + "'");
}

KernelConfig ModelSpec::effective_kernel() const {
  if (kernel) return *kernel;
  switch (kind) {
    case ModelKind::Regression: return KernelConfig{1.0, 1.0};
    case ModelKind::Classification:
      return KernelConfig{std::exp(2.5), std::exp(2.0 * 3.5)};
    case ModelKind::Cox: return KernelConfig{kCoxLengthscale, 1.0};
  }
  return KernelConfig{};
}

void ModelSpec::validate() const {
  effective_kernel().validate();
  if (kind == ModelKind::Cox) {
    if (events.empty()) bad("cox model needs an 'events' file");
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
      bad("bin_width must be finite and > 0");
    return;
  }
  if (n < 1) bad("model 'n' must be >= 1");
  if (dims.empty()) bad("model 'dims' must be non-empty");
  for (auto d : dims)
    if (d < 1) bad("model 'dims' entries must be >= 1");
  if (kind == ModelKind::Regression &&
      (!(noise_std > 0.0) || !std::isfinite(noise_std)))
    bad("regression noise_std must be finite and > 0");
}

void SamplerSpec::validate() const {
  if (kind == "elliptical" || kind == "line-slice") {
    EllipticalConfig{bracket_width, max_shrinks}.validate();
  } else if (kind == "elliptical-aux") {
    if (max_shrinks < 1) bad("max_shrinks must be > 0");
  } else if (kind == "neal-mh") {
    if (tune) {
      if (grid.empty()) bad("epsilon grid must be non-empty");
      for (double e : grid)
        if (!(e > 0.0 && e <= 1.0)) bad("epsilon grid values must lie in (0, 1]");
    } else {
      MhConfig{epsilon}.validate();
    }
  } else {
    bad("unknown sampler kind '" + kind + "'");
  }
}

OperatorSpec SamplerSpec::to_operator() const {
  return to_operator(epsilon);
}

OperatorSpec SamplerSpec::to_operator(double epsilon_override) const {
  if (kind == "elliptical")
    return EllipticalSlice{EllipticalConfig{bracket_width, max_shrinks}};
  if (kind == "elliptical-aux") return EllipticalSliceAux{max_shrinks};
  if (kind == "neal-mh") return NealMh{MhConfig{epsilon_override}};
  if (kind == "line-slice")
    return LineSlice{EllipticalConfig{bracket_width, max_shrinks}};
  bad("unknown sampler kind '" + kind + "'");
}

std::string SamplerSpec::label() const {
  if (kind != "neal-mh") return kind;
  if (tune) return "neal-mh-tuned";
  char buf[64];
  std::snprintf(buf, sizeof buf, "neal-mh-%g", epsilon);
  return buf;
}

std::uint64_t ExperimentConfig::seed_value() const {
  if (!seed) bad("a seed is required (config 'seed' or --seed)");
  return *seed;
}

void ExperimentConfig::validate() const {
  if (models.empty()) bad("at least one model is required");
  if (samplers.empty()) bad("at least one sampler is required");
  for (const auto& m : models) m.validate();
  for (const auto& s : samplers) s.validate();
  if (n_keep < 1) bad("keep must be >= 1");
  if (repeats < 1) bad("repeats must be >= 1");
  seed_value();
}

ExperimentConfig ExperimentConfig::from_json(const Json& j,
                                             const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("models")) {
    c.models.clear();
    for (const auto& m : j.at("models")) c.models.push_back(parse_model(m, base_dir));
  } else if (j.contains("model")) {
    c.models = {parse_model(j.at("model"), base_dir)};
  }
  if (j.contains("kernel")) {
    // Top-level kernel applies to models that did not set their own.
    const Json& k = j.at("kernel");
    for (auto& m : c.models) {
      if (m.kernel) continue;
      KernelConfig kc = m.effective_kernel();
      kc.lengthscale = get_or<double>(k, "lengthscale", kc.lengthscale);
      kc.signal_variance = get_or<double>(k, "signal_variance", kc.signal_variance);
      m.kernel = kc;
    }
  }
  if (j.contains("samplers")) {
    c.samplers.clear();
    for (const auto& s : j.at("samplers")) c.samplers.push_back(parse_sampler(s));
  } else if (j.contains("sampler")) {
    c.samplers = {parse_sampler(j.at("sampler"))};
  }
  c.n_burn = get_count(j, "burn", c.n_burn);
  c.n_keep = get_count(j, "keep", c.n_keep);
  c.thin = get_count(j, "thin", c.thin);
  c.repeats = get_count(j, "repeats", c.repeats);
  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      bad("'seed' must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["models"] = Json::array();
  for (const auto& m : models) j["models"].push_back(model_to_json(m));
  j["samplers"] = Json::array();
  for (const auto& s : samplers) j["samplers"].push_back(sampler_to_json(s));
  j["burn"] = n_burn;
  j["keep"] = n_keep;
  j["thin"] = thin;
  j["repeats"] = repeats;
  if (seed) j["seed"] = *seed;
  return j;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json().dump()); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ellslice::harness
