#pragma once

// JSON model and distribution files, report writers, and fixture generators.
//
//   model: {"schema_version":"1","m":2,"p":12,"A":[[...]],"c":[...],
//           "beta":[...],"d":0.0,"standardization":{"shift":[...],"scale":[...]}}
//   dist:  {"schema_version":"1","m":2,"mean":[...],"cov":[[...]]}
//
// A is stored row-major as m rows of p entries. The standardization block is
// optional; when present the model expects raw inputs v and applies
// (v - shift) / scale before A.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reluprop/distribution.hpp"
#include "reluprop/monte_carlo.hpp"
#include "reluprop/propagation.hpp"

namespace reluprop {

inline constexpr const char* kSchemaVersion = "1";

struct Standardization {
  Eigen::VectorXd shift;
  Eigen::VectorXd scale;  // entries > 0
};

struct ModelFile {
  std::string schema_version = kSchemaVersion;
  MlpModel model;
  std::optional<Standardization> standardization;

  /// Throws kShape / kDomain when the invariants do not hold.
  void validate() const;

  /// The model in raw input units: A' = diag(1/scale) A, c' = c - A'^T shift.
  MlpModel folded() const;
};

ModelFile parse_model(const std::string& text);
std::string serialize_model(const ModelFile& file);

struct DistFile {
  std::string schema_version = kSchemaVersion;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// Runs the GaussianDist checks.
  GaussianDist to_dist() const;
};

DistFile parse_dist(const std::string& text);
std::string serialize_dist(const DistFile& file);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Reads, validates and folds.
MlpModel load_model(const std::filesystem::path& path);
GaussianDist load_dist(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

std::string moments_json(const OutputMoments& analytic);
std::string validation_json(const OutputMoments& analytic, const McReport& mc,
                            const McComparison& cmp, double z_threshold);

/// Header n,rmse_mean,rmse_variance and one row per grid point.
std::string convergence_csv(std::span<const ConvergenceRow> rows);
std::vector<ConvergenceRow> parse_convergence_csv(const std::string& text);

/// Fixture model: A ~ N(0, 1/m), beta ~ N(0, 1/p), c and d ~ N(0, 0.1^2),
/// all independent and reproducible from the seed. Not a trained network.
ModelFile gen_model(Eigen::Index m, Eigen::Index p, std::uint64_t seed);

/// Fixture input law: mean ~ N(0, I), standard deviations uniform on
/// [0.05, 0.5] and a random full-rank correlation matrix.
DistFile gen_dist(Eigen::Index m, std::uint64_t seed);

}  // namespace reluprop
