#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reluprop/error.hpp"
#include "reluprop/model_io.hpp"
#include "reluprop/monte_carlo.hpp"
#include "reluprop/philox.hpp"
#include "reluprop/propagation.hpp"
#include "selftest.hpp"

namespace reluprop::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kSlopeLow = -0.65;
constexpr double kSlopeHigh = -0.35;
constexpr std::size_t kRecommendedCases = 10;

struct Options {
  std::string model;
  std::string dist;
  std::string out;
  std::string cases;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> grid;
  double z_threshold = 4.0;
  unsigned threads = 0;
  int m = 0;
  int p = 0;
  int count = 40;
  double inject_bvn_error = 0.0;
};

void require_file(const std::string& path, const char* flag) {
  if (!fs::is_regular_file(path)) fail(ErrorKind::kConfig, "no such file '" + path + "'", flag);
}

void require_writable_parent(const std::string& path, const char* flag) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    fail(ErrorKind::kConfig, "output directory '" + parent.string() + "' does not exist", flag);
  }
}

void warn_if_clamped(const OutputMoments& m, std::ostream& err) {
  if (m.variance_clamped) {
    err << "warning: slightly negative output variance from rounding was clamped to 0\n";
  }
}

int cmd_propagate(const Options& o, std::ostream& out, std::ostream& err) {
  require_file(o.model, "--model");
  require_file(o.dist, "--dist");
  if (!o.out.empty()) require_writable_parent(o.out, "--out");

  const MlpModel model = load_model(o.model);
  const GaussianDist dist = load_dist(o.dist);
  const OutputMoments moments = output_moments(dist, model);
  warn_if_clamped(moments, err);

  const std::string json = moments_json(moments);
  out << json;
  if (!o.out.empty()) write_text(o.out, json);
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  require_file(o.model, "--model");
  require_file(o.dist, "--dist");
  if (!o.out.empty()) require_writable_parent(o.out, "--out");
  if (o.n < 2) fail(ErrorKind::kConfig, "--n must be at least 2", "--n");
  if (!(o.z_threshold > 0.0)) fail(ErrorKind::kConfig, "--z-threshold must be positive", "--z-threshold");

  const MlpModel model = load_model(o.model);
  const GaussianDist dist = load_dist(o.dist);
  const OutputMoments analytic = output_moments(dist, model);
  warn_if_clamped(analytic, err);

  McConfig cfg;
  cfg.n_samples = o.n;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  const McReport mc = mc_output_moments(dist, model, cfg);
  const McComparison cmp = compare(analytic, mc, o.z_threshold);

  const std::string json = validation_json(analytic, mc, cmp, o.z_threshold);
  out << json;
  if (!o.out.empty()) write_text(o.out, json);
  if (!cmp.pass) {
    err << "validate: FAIL (|z| above " << o.z_threshold << ")\n";
    return kExitValidateFail;
  }
  return kExitOk;
}

// A cases directory holds model.json plus one distribution file per case
// (any other *.json), taken in lexicographic order of file name.
std::vector<StudyCase> load_cases(const std::string& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::kConfig, "'" + dir + "' is not a directory", "--cases");
  const fs::path model_path = fs::path(dir) / "model.json";
  std::vector<fs::path> dists;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().filename() != "model.json") {
      dists.push_back(entry.path());
    }
  }
  if (!fs::is_regular_file(model_path) || dists.empty()) {
    fail(ErrorKind::kConfig, "cases directory '" + dir + "' needs model.json and at least one "
                             "distribution file", "--cases");
  }
  std::sort(dists.begin(), dists.end());

  const MlpModel model = load_model(model_path);
  std::vector<StudyCase> cases;
  cases.reserve(dists.size());
  for (const fs::path& path : dists) {
    try {
      cases.push_back({load_dist(path), model});
    } catch (const Error& e) {
      fail(e.kind(), path.filename().string() + ": " + e.what(), e.field());
    }
  }
  return cases;
}

int cmd_converge(const Options& o, std::ostream& out, std::ostream& err) {
  require_writable_parent(o.out, "--out");
  for (std::uint64_t n : o.grid) {
    if (n < 2) fail(ErrorKind::kConfig, "grid points must be at least 2", "--grid");
  }
  const std::vector<StudyCase> cases = load_cases(o.cases);
  if (cases.size() < kRecommendedCases) {
    err << "warning: " << cases.size() << " cases; RMSE over fewer than " << kRecommendedCases
        << " is noisy\n";
  }

  McConfig cfg;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  const ConvergenceStudy study = convergence_study(cases, o.grid, cfg);
  if (study.rows.size() == 2) {
    err << "warning: only 2 grid points; the line passes through both exactly and its slope "
           "carries no fit-quality information\n";
  }
  write_text(o.out, convergence_csv(study.rows));

  bool in_window = true;
  const auto report = [&](const char* name, const std::optional<LineFit>& fit) {
    if (!fit) {
      out << "slope_" << name << "=undefined\n";
      in_window = false;
      return;
    }
    out << "slope_" << name << '=' << format_double(fit->slope) << '\n';
    out << "intercept_" << name << '=' << format_double(fit->intercept) << '\n';
    in_window = in_window && fit->slope >= kSlopeLow && fit->slope <= kSlopeHigh;
  };
  report("mean", study.fit_mean);
  report("variance", study.fit_variance);
  if (!in_window) {
    err << "converge: slope outside [" << kSlopeLow << ", " << kSlopeHigh << "]\n";
    return kExitSlope;
  }
  return kExitOk;
}

int cmd_gen_model(const Options& o, std::ostream& out, std::ostream& err) {
  (void)err;
  if (o.m < 1 || o.p < 1) fail(ErrorKind::kConfig, "--m and --p must be at least 1", "--m");
  require_writable_parent(o.out, "--out");
  const std::string model = serialize_model(gen_model(o.m, o.p, o.seed));
  write_text(o.out, model);
  out << "wrote " << o.out << '\n';

  if (o.cases.empty()) return kExitOk;
  if (o.count < 1) fail(ErrorKind::kConfig, "--count must be at least 1", "--count");
  fs::create_directories(o.cases);
  write_text(fs::path(o.cases) / "model.json", model);
  for (int i = 0; i < o.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "case_%03d.json", i);
    const DistFile dist = gen_dist(o.m, derive_seed(o.seed, static_cast<std::uint64_t>(i)));
    write_text(fs::path(o.cases) / name, serialize_dist(dist));
  }
  out << "wrote " << o.count << " cases to " << o.cases << '\n';
  return kExitOk;
}

int cmd_selftest(const Options& o, std::ostream& out) {
  SelftestKernels kernels;
  if (o.inject_bvn_error != 0.0) {
    const double eps = o.inject_bvn_error;
    kernels.bvn_cdf = [eps](double x, double y, Correlation r) { return bvn_cdf(x, y, r) + eps; };
  }
  const auto start = std::chrono::steady_clock::now();
  const std::vector<SelftestRow> rows = run_selftest(kernels);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  char line[160];
  std::snprintf(line, sizeof line, "%-52s %6s %11s %9s  %s\n", "check", "cases", "worst", "tol",
                "result");
  out << line;
  int failed = 0;
  for (const SelftestRow& row : rows) {
    std::snprintf(line, sizeof line, "%-52s %6d %11.3e %9.1e  %s\n", row.name.c_str(), row.cases,
                  row.worst, row.tolerance, row.pass ? "PASS" : "FAIL");
    out << line;
    failed += row.pass ? 0 : 1;
  }
  std::snprintf(line, sizeof line, "selftest: %s (%zu checks, %d failed, %.1f s)\n",
                failed == 0 ? "PASS" : "FAIL", rows.size(), failed, seconds);
  out << line;
  return failed == 0 ? kExitOk : kExitSelftest;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumerical:
    case ErrorKind::kDegenerateCorrelation:
    case ErrorKind::kNullEvent:
      return kExitNumerical;
    default:
      return kExitInput;
  }
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moments of a one-hidden-layer ReLU network under Gaussian input"};
  app.name("reluprop");
  app.require_subcommand(1, 1);
  Options o;

  auto* propagate = app.add_subcommand("propagate", "Analytic output mean and variance");
  propagate->add_option("--model", o.model, "Model JSON file")->required();
  propagate->add_option("--dist", o.dist, "Input distribution JSON file")->required();
  propagate->add_option("--out", o.out, "Also write the JSON result here");

  auto* validate = app.add_subcommand("validate", "Compare analytic moments with Monte Carlo");
  validate->add_option("--model", o.model, "Model JSON file")->required();
  validate->add_option("--dist", o.dist, "Input distribution JSON file")->required();
  validate->add_option("--n", o.n, "Number of Monte Carlo samples")->required();
  validate->add_option("--seed", o.seed, "Random seed")->required();
  validate->add_option("--z-threshold", o.z_threshold, "Largest accepted |z|")->capture_default_str();
  validate->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
  validate->add_option("--out", o.out, "Also write the JSON report here");

  auto* converge = app.add_subcommand("converge", "Monte Carlo RMSE against n over a set of cases");
  converge->add_option("--cases", o.cases, "Directory with model.json and distribution files")
      ->required();
  converge->add_option("--grid", o.grid, "Comma-separated sample sizes")
      ->required()
      ->delimiter(',');
  converge->add_option("--seed", o.seed, "Random seed")->required();
  converge->add_option("--out", o.out, "CSV output path")->required();
  converge->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();

  auto* gen = app.add_subcommand("gen-model", "Write a random fixture model");
  gen->add_option("--m", o.m, "Input dimension")->required();
  gen->add_option("--p", o.p, "Hidden units")->required();
  gen->add_option("--seed", o.seed, "Random seed")->required();
  gen->add_option("--out", o.out, "Model JSON output path")->required();
  gen->add_option("--cases", o.cases, "Also write a cases directory for `converge`");
  gen->add_option("--count", o.count, "Number of distribution files with --cases")
      ->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run the built-in accuracy checks");
  selftest->add_option("--inject-bvn-error", o.inject_bvn_error)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << first_line(e.what()) << '\n';
    return kExitInput;
  }

  try {
    if (*propagate) return cmd_propagate(o, out, err);
    if (*validate) return cmd_validate(o, out, err);
    if (*converge) return cmd_converge(o, out, err);
    if (*gen) return cmd_gen_model(o, out, err);
    return cmd_selftest(o, out);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << first_line(e.what());
    if (!e.field().empty()) err << " (field: " << e.field() << ')';
    err << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error[internal]: " << first_line(e.what()) << '\n';
    return kExitNumerical;
  }
}

}  // namespace reluprop::cli
