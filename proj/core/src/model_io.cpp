#include "reluprop/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "reluprop/error.hpp"
#include "reluprop/philox.hpp"

namespace reluprop {

namespace {

using Json = nlohmann::ordered_json;

const Json& require(const Json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) fail(ErrorKind::kParse, std::string("missing field '") + field + "'", field);
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) fail(ErrorKind::kParse, "'" + field + "' must be a number", field);
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(ErrorKind::kParse, "'" + field + "' is not finite", field);
  return x;
}

Eigen::Index dimension(const Json& obj, const char* field) {
  const Json& j = require(obj, field);
  if (!j.is_number_integer()) {
    fail(ErrorKind::kParse, std::string("'") + field + "' must be an integer", field);
  }
  const auto value = j.get<std::int64_t>();
  if (value < 1) fail(ErrorKind::kShape, std::string("'") + field + "' must be >= 1", field);
  return static_cast<Eigen::Index>(value);
}

Eigen::VectorXd vector(const Json& obj, const char* field, Eigen::Index length) {
  const Json& j = require(obj, field);
  if (!j.is_array()) fail(ErrorKind::kParse, std::string("'") + field + "' must be an array", field);
  if (static_cast<Eigen::Index>(j.size()) != length) {
    fail(ErrorKind::kShape,
         std::string("'") + field + "' has length " + std::to_string(j.size()) + ", expected " +
             std::to_string(length),
         field);
  }
  Eigen::VectorXd out(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    out(i) = number(j[static_cast<std::size_t>(i)], field);
  }
  return out;
}

Eigen::MatrixXd matrix(const Json& obj, const char* field, Eigen::Index rows, Eigen::Index cols) {
  const Json& j = require(obj, field);
  if (!j.is_array()) fail(ErrorKind::kParse, std::string("'") + field + "' must be an array", field);
  if (static_cast<Eigen::Index>(j.size()) != rows) {
    fail(ErrorKind::kShape,
         std::string("'") + field + "' has " + std::to_string(j.size()) + " rows, expected " +
             std::to_string(rows),
         field);
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) {
      fail(ErrorKind::kParse, std::string("'") + field + "' rows must be arrays", field);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorKind::kShape,
           std::string("'") + field + "' row " + std::to_string(r) + " has " +
               std::to_string(row.size()) + " entries, expected " + std::to_string(cols),
           field);
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = number(row[static_cast<std::size_t>(c)], field);
  }
  return out;
}

std::string schema_version(const Json& obj) {
  const Json& j = require(obj, "schema_version");
  if (!j.is_string()) fail(ErrorKind::kParse, "'schema_version' must be a string", "schema_version");
  auto version = j.get<std::string>();
  if (version != kSchemaVersion) {
    fail(ErrorKind::kParse, "unsupported schema_version '" + version + "'", "schema_version");
  }
  return version;
}

Json parse_object(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kParse, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kParse, "top level must be a JSON object");
  return j;
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Eigen::MatrixXd& a) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

void ModelFile::validate() const {
  model.validate();
  if (!standardization) return;
  const Eigen::Index m = model.inputs();
  if (standardization->shift.size() != m) {
    fail(ErrorKind::kShape, "standardization shift must have length m", "standardization.shift");
  }
  if (standardization->scale.size() != m) {
    fail(ErrorKind::kShape, "standardization scale must have length m", "standardization.scale");
  }
  if (!standardization->shift.allFinite()) {
    fail(ErrorKind::kDomain, "standardization shift is not finite", "standardization.shift");
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    const double s = standardization->scale(k);
    if (!(s > 0.0) || !std::isfinite(s)) {
      fail(ErrorKind::kDomain, "standardization scale entries must be positive and finite",
           "standardization.scale");
    }
  }
}

MlpModel ModelFile::folded() const {
  validate();
  if (!standardization) return model;
  MlpModel out = model;
  const Eigen::Index m = model.inputs();
  for (Eigen::Index k = 0; k < m; ++k) {
    out.input_weights.row(k) = model.input_weights.row(k) / standardization->scale(k);
  }
  for (Eigen::Index j = 0; j < model.hidden(); ++j) {
    double shift = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) shift += out.input_weights(k, j) * standardization->shift(k);
    out.hidden_bias(j) = model.hidden_bias(j) - shift;
  }
  return out;
}

ModelFile parse_model(const std::string& text) {
  const Json j = parse_object(text);
  ModelFile file;
  file.schema_version = schema_version(j);
  const Eigen::Index m = dimension(j, "m");
  const Eigen::Index p = dimension(j, "p");
  file.model.input_weights = matrix(j, "A", m, p);
  file.model.hidden_bias = vector(j, "c", p);
  file.model.output_weights = vector(j, "beta", p);
  file.model.output_bias = number(require(j, "d"), "d");
  if (const auto it = j.find("standardization"); it != j.end()) {
    if (!it->is_object()) {
      fail(ErrorKind::kParse, "'standardization' must be an object", "standardization");
    }
    Standardization s;
    s.shift = vector(*it, "shift", m);
    s.scale = vector(*it, "scale", m);
    file.standardization = std::move(s);
  }
  file.validate();
  return file;
}

std::string serialize_model(const ModelFile& file) {
  file.validate();
  Json j;
  j["schema_version"] = file.schema_version;
  j["m"] = file.model.inputs();
  j["p"] = file.model.hidden();
  j["A"] = to_json(file.model.input_weights);
  j["c"] = to_json(file.model.hidden_bias);
  j["beta"] = to_json(file.model.output_weights);
  j["d"] = file.model.output_bias;
  if (file.standardization) {
    Json s;
    s["shift"] = to_json(file.standardization->shift);
    s["scale"] = to_json(file.standardization->scale);
    j["standardization"] = std::move(s);
  }
  return dump(j);
}

GaussianDist DistFile::to_dist() const { return GaussianDist(mean, cov); }

DistFile parse_dist(const std::string& text) {
  const Json j = parse_object(text);
  DistFile file;
  file.schema_version = schema_version(j);
  const Eigen::Index m = dimension(j, "m");
  file.mean = vector(j, "mean", m);
  file.cov = matrix(j, "cov", m, m);
  try {
    (void)file.to_dist();
  } catch (const Error& e) {
    fail(e.kind(), e.what(), e.field().empty() ? "cov" : e.field());
  }
  return file;
}

std::string serialize_dist(const DistFile& file) {
  Json j;
  j["schema_version"] = file.schema_version;
  j["m"] = file.mean.size();
  j["mean"] = to_json(file.mean);
  j["cov"] = to_json(file.cov);
  return dump(j);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kConfig, "cannot open '" + path.string() + "'", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kConfig, "cannot write '" + path.string() + "'", path.string());
  out << text;
  if (!out) fail(ErrorKind::kConfig, "write to '" + path.string() + "' failed", path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text(path)).folded();
}

GaussianDist load_dist(const std::filesystem::path& path) {
  return parse_dist(read_text(path)).to_dist();
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string moments_json(const OutputMoments& analytic) {
  Json j;
  j["mean"] = analytic.mean;
  j["variance"] = analytic.variance;
  j["variance_clamped"] = analytic.variance_clamped;
  return dump(j);
}

std::string validation_json(const OutputMoments& analytic, const McReport& mc,
                            const McComparison& cmp, double z_threshold) {
  // Infinite z-scores (zero standard error, nonzero difference) have no JSON
  // number; they are written as null.
  const auto finite_or_null = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json j;
  j["analytic"] = {{"mean", analytic.mean},
                   {"variance", analytic.variance},
                   {"variance_clamped", analytic.variance_clamped}};
  j["monte_carlo"] = {{"emp_mean", mc.emp_mean},       {"emp_variance", mc.emp_variance},
                      {"se_mean", mc.se_mean},         {"se_variance", mc.se_variance},
                      {"n", mc.n},                     {"seed", mc.seed}};
  j["comparison"] = {{"abs_diff_mean", std::fabs(cmp.diff_mean)},
                     {"abs_diff_variance", std::fabs(cmp.diff_variance)},
                     {"z_mean", finite_or_null(cmp.z_mean)},
                     {"z_variance", finite_or_null(cmp.z_variance)},
                     {"z_threshold", z_threshold},
                     {"pass", cmp.pass}};
  return dump(j);
}

std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::string out = "n,rmse_mean,rmse_variance\n";
  for (const ConvergenceRow& row : rows) {
    out += std::to_string(row.n) + ',' + format_double(row.rmse_mean) + ',' +
           format_double(row.rmse_variance) + '\n';
  }
  return out;
}

std::vector<ConvergenceRow> parse_convergence_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "n,rmse_mean,rmse_variance") {
    fail(ErrorKind::kParse, "convergence CSV must start with 'n,rmse_mean,rmse_variance'", "header");
  }
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      fail(ErrorKind::kParse, "malformed CSV row '" + line + "'", "row");
    }
    ConvergenceRow row;
    const char* s = line.data();
    const auto check = [&](std::from_chars_result r, const char* end, const char* field) {
      if (r.ec != std::errc{} || r.ptr != end) {
        fail(ErrorKind::kParse, "bad value in CSV row '" + line + "'", field);
      }
    };
    check(std::from_chars(s, s + c1, row.n), s + c1, "n");
    check(std::from_chars(s + c1 + 1, s + c2, row.rmse_mean), s + c2, "rmse_mean");
    check(std::from_chars(s + c2 + 1, s + line.size(), row.rmse_variance), s + line.size(),
          "rmse_variance");
    rows.push_back(row);
  }
  return rows;
}

ModelFile gen_model(Eigen::Index m, Eigen::Index p, std::uint64_t seed) {
  if (m < 1 || p < 1) fail(ErrorKind::kConfig, "gen_model needs m >= 1 and p >= 1");
  NormalStream rng(seed, 0);
  ModelFile file;
  MlpModel& model = file.model;
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(m));
  const double b_scale = 1.0 / std::sqrt(static_cast<double>(p));
  model.input_weights.resize(m, p);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < p; ++j) model.input_weights(k, j) = a_scale * rng.normal();
  }
  model.hidden_bias.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) model.hidden_bias(j) = 0.1 * rng.normal();
  model.output_weights.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) model.output_weights(j) = b_scale * rng.normal();
  model.output_bias = 0.1 * rng.normal();
  return file;
}

DistFile gen_dist(Eigen::Index m, std::uint64_t seed) {
  if (m < 1) fail(ErrorKind::kConfig, "gen_dist needs m >= 1");
  NormalStream rng(seed, 0);
  DistFile file;
  file.mean.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) file.mean(k) = rng.normal();
  Eigen::VectorXd sd(m);
  for (Eigen::Index k = 0; k < m; ++k) sd(k) = 0.05 + 0.45 * rng.uniform();

  // Unit-norm rows of a random m x (m + 1) matrix give a correlation matrix
  // with unit diagonal that is full rank with probability one.
  Eigen::MatrixXd b(m, m + 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c <= m; ++c) b(r, c) = rng.normal();
    b.row(r).normalize();
  }
  file.cov.resize(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    file.cov(r, r) = sd(r) * sd(r);
    for (Eigen::Index c = r + 1; c < m; ++c) {
      const double v = sd(r) * sd(c) * b.row(r).dot(b.row(c));
      file.cov(r, c) = v;
      file.cov(c, r) = v;
    }
  }
  return file;
}

}  // namespace reluprop
