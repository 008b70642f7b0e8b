// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/harness/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ellslice/error.hpp"

namespace ellslice::harness {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return in;
}

void write_stamp(std::ostream& out, const Stamp& stamp) {
  out << "# config_hash=" << stamp.config_hash << " seed=" << stamp.seed << '\n';
}

std::vector<std::vector<double>> read_rows(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw Error(Errc::Io, path.string() + ":" + std::to_string(line_no) +
                                  ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(Errc::Io, path.string() + ":" + std::to_string(line_no) +
                                ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Json Manifest::to_json() const {
  Json j;
  j["kind"] = to_string(kind);
  j["n"] = n;
  j["dims"] = dims;
  j["kernel"] = {{"lengthscale", kernel.lengthscale},
                 {"signal_variance", kernel.signal_variance}};
  switch (kind) {
    case ModelKind::Regression: j["noise_variance"] = noise_variance; break;
    case ModelKind::Classification:
      j["link"] = link == Link::Logistic ? "logistic" : "probit";
      break;
    case ModelKind::Cox:
      j["offset"] = offset;
      j["bin_width"] = bin_width;
      j["origin"] = origin;
      j["n_events"] = n_events;
      break;
  }
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  return j;
}

Manifest Manifest::from_json(const Json& j) {
  try {
    Manifest m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.n = j.at("n").get<std::size_t>();
    m.dims = j.at("dims").get<std::size_t>();
    m.kernel.lengthscale = j.at("kernel").at("lengthscale").get<double>();
    m.kernel.signal_variance = j.at("kernel").at("signal_variance").get<double>();
    if (m.kind == ModelKind::Regression)
      m.noise_variance = j.at("noise_variance").get<double>();
    if (m.kind == ModelKind::Classification)
      m.link = j.at("link").get<std::string>() == "probit" ? Link::Probit
                                                           : Link::Logistic;
    if (m.kind == ModelKind::Cox) {
      m.offset = j.at("offset").get<double>();
      m.bin_width = j.at("bin_width").get<double>();
      m.origin = j.at("origin").get<double>();
      m.n_events = j.at("n_events").get<std::size_t>();
    }
    m.stamp.config_hash = j.value("config_hash", "");
    m.stamp.seed = j.value("seed", std::uint64_t{0});
    return m;
  } catch (const Json::exception& e) {
    throw Error(Errc::Io, std::string("malformed manifest: ") + e.what());
  }
}

std::unique_ptr<LikelihoodModel> Dataset::make_model() const {
  switch (manifest.kind) {
    case ModelKind::Regression:
      return std::make_unique<RegressionModel>(regression_data());
    case ModelKind::Classification:
      return std::make_unique<ClassificationModel>(
          ClassificationData{observations, manifest.link});
    case ModelKind::Cox: {
      CoxData d;
      d.counts = observations.unaryExpr([](double v) {
        return static_cast<int>(std::lround(v));
      });
      d.offset = manifest.offset;
      d.bin_width = manifest.bin_width;
      d.origin = manifest.origin;
      return std::make_unique<CoxModel>(std::move(d));
    }
  }
  throw Error(Errc::InvalidConfig, "unknown model kind");
}

GaussianPrior Dataset::make_prior() const {
  return GaussianPrior::factorize(se_covariance(inputs, manifest.kernel));
}

RegressionData Dataset::regression_data() const {
  require(manifest.kind == ModelKind::Regression, Errc::InvalidConfig,
          "dataset is not a regression dataset");
  return RegressionData{observations, manifest.noise_variance};
}

void write_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  const Stamp& stamp = data.manifest.stamp;
  std::vector<std::string> header;
  for (Eigen::Index d = 0; d < data.inputs.cols(); ++d)
    header.push_back("x" + std::to_string(d));
  write_matrix_csv(dir / "inputs.csv", header, data.inputs, stamp);
  const char* obs_name = data.manifest.kind == ModelKind::Regression ? "y"
                         : data.manifest.kind == ModelKind::Cox      ? "count"
                                                                     : "label";
  write_matrix_csv(dir / "observations.csv", {obs_name}, data.observations,
                   stamp);
  if (data.latent) write_matrix_csv(dir / "latents.csv", {"f"}, *data.latent, stamp);
  write_json(dir / "manifest.json", data.manifest.to_json());
}

Dataset load_dataset(const fs::path& dir) {
  Dataset out;
  out.manifest = Manifest::from_json(read_json(dir / "manifest.json"));
  out.inputs = read_matrix_csv(dir / "inputs.csv");
  const Eigen::MatrixXd obs = read_matrix_csv(dir / "observations.csv");
  require(obs.cols() == 1, Errc::Io, "observations.csv must have one column");
  out.observations = obs.col(0);
  require(out.inputs.rows() == out.observations.size(), Errc::Io,
          "inputs and observations differ in length");
  if (fs::exists(dir / "latents.csv"))
    out.latent = read_matrix_csv(dir / "latents.csv").col(0);
  return out;
}

void write_matrix_csv(const fs::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values, const Stamp& stamp) {
  require(static_cast<Eigen::Index>(header.size()) == values.cols(),
          Errc::InvalidConfig, "CSV header does not match column count");
  auto out = open_out(path);
  write_stamp(out, stamp);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      out << (c ? "," : "") << format_double(values(r, c));
    out << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  require(!rows.empty(), Errc::Io, path.string() + ": no data rows");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_trace_csv(const fs::path& path, const ChainTrace& trace,
                     const Stamp& stamp) {
  trace.validate();
  auto out = open_out(path);
  write_stamp(out, stamp);
  out << "iteration,log_likelihood,cumulative_likelihood_evals,accepted\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << format_double(trace.log_lik[i]) << ','
        << trace.lik_evals_cum[i] << ',' << (trace.accepted[i] ? 1 : 0) << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

ChainTrace read_trace_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  ChainTrace t;
  for (const auto& row : rows) {
    require(row.size() == 4, Errc::Io,
            path.string() + ": trace rows need 4 columns");
    t.log_lik.push_back(row[1]);
    t.lik_evals_cum.push_back(static_cast<std::uint64_t>(row[2]));
    t.prior_evals_cum.push_back(0);
    t.proposals.push_back(0);
    t.accepted.push_back(row[3] != 0.0);
  }
  return t;
}

Json report_to_json(const EssReport& r) {
  Json j;
  j["n_kept"] = r.n_kept;
  j["ess"] = r.ess;
  j["lag1_autocorr"] = r.lag1_autocorr;
  j["total_lik_evals"] = r.total_lik_evals;
  j["total_prior_evals"] = r.total_prior_evals;
  j["seconds"] = r.seconds;
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

Json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::Io, path.string() + ": " + e.what());
  }
}

}  // namespace ellslice::harness
