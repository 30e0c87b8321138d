#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "reluprop/model_io.hpp"

namespace fs = std::filesystem;
using namespace reluprop;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "reluprop");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("reluprop_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_model(const std::string& name, const MlpModel& m) const {
    ModelFile f;
    f.model = m;
    write_text(path(name), serialize_model(f));
    return path(name);
  }

  std::string write_dist(const std::string& name, Eigen::VectorXd mean, Eigen::MatrixXd cov) const {
    DistFile f;
    f.mean = std::move(mean);
    f.cov = std::move(cov);
    write_text(path(name), serialize_dist(f));
    return path(name);
  }

  static MlpModel scalar_identity() {
    MlpModel m;
    m.input_weights = Eigen::MatrixXd::Identity(1, 1);
    m.hidden_bias = Eigen::VectorXd::Zero(1);
    m.output_weights = Eigen::VectorXd::Ones(1);
    return m;
  }

  fs::path dir_;
};

bool single_line(const std::string& s) {
  return !s.empty() && s.find('\n') == s.size() - 1;
}

}  // namespace

TEST_F(CliTest, PropagateScalarFixture) {
  const auto model = write_model("model.json", scalar_identity());
  const auto dist = write_dist("dist.json", Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const Result r = run_cli({"propagate", "--model", model, "--dist", dist, "--out", path("out.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["mean"].get<double>(), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(j["variance"].get<double>(), 0.3408450569081046, 1e-15);
  EXPECT_EQ(read_text(path("out.json")), r.out);
}

TEST_F(CliTest, PropagateZeroOutputWeights) {
  MlpModel m = scalar_identity();
  m.output_weights.setZero();
  m.output_bias = 1.25;
  const auto model = write_model("model.json", m);
  const auto dist = write_dist("dist.json", Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const Result r = run_cli({"propagate", "--model", model, "--dist", dist});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["mean"].get<double>(), 1.25);
  EXPECT_EQ(j["variance"].get<double>(), 0.0);
}

TEST_F(CliTest, DimensionMismatchExitsTwo) {
  const auto model = write_model("model.json", scalar_identity());
  const auto dist =
      write_dist("dist.json", Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const Result r = run_cli({"propagate", "--model", model, "--dist", dist});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_EQ(r.err.rfind("error[shape]: ", 0), 0u) << r.err;
  EXPECT_TRUE(single_line(r.err));
  EXPECT_NE(r.err.find("field: m"), std::string::npos);
}

TEST_F(CliTest, SchemaErrorNamesField) {
  write_text(path("bad.json"), R"({"schema_version":"1","m":1,"p":1,"A":[[1]],"c":[0],"d":0})");
  const auto dist = write_dist("dist.json", Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const Result r = run_cli({"propagate", "--model", path("bad.json"), "--dist", dist});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_EQ(r.err.rfind("error[parse]: ", 0), 0u);
  EXPECT_NE(r.err.find("field: beta"), std::string::npos);
  EXPECT_TRUE(single_line(r.err));
}

TEST_F(CliTest, MissingFileAndUsageErrors) {
  Result r = run_cli({"propagate", "--model", path("nope.json"), "--dist", path("nope2.json")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_EQ(r.err.rfind("error[config]: ", 0), 0u);
  r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_EQ(r.err.rfind("error[usage]: ", 0), 0u);
  EXPECT_TRUE(single_line(r.err));
  r = run_cli({});
  EXPECT_EQ(r.code, cli::kExitInput);
  r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("propagate"), std::string::npos);
}

TEST_F(CliTest, ValidateScalarFixturePasses) {
  const auto model = write_model("model.json", scalar_identity());
  const auto dist = write_dist("dist.json", Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const Result r = run_cli({"validate", "--model", model, "--dist", dist, "--n", "1000000", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["comparison"]["pass"].get<bool>());
  EXPECT_LE(std::fabs(j["comparison"]["z_mean"].get<double>()), 4.0);
  EXPECT_LE(std::fabs(j["comparison"]["z_variance"].get<double>()), 4.0);
  EXPECT_EQ(j["monte_carlo"]["n"].get<std::uint64_t>(), 1000000u);
}

TEST_F(CliTest, ValidateDeterministicInputHasZeroZ) {
  MlpModel m;
  m.input_weights.resize(2, 3);
  m.input_weights << 0.5, -1.0, 0.3, 0.2, 0.4, -0.8;
  m.hidden_bias = Eigen::Vector3d(0.1, 0.2, 0.3);
  m.output_weights = Eigen::Vector3d(1.0, -0.5, 0.25);
  const auto model = write_model("model.json", m);
  const auto dist = write_dist("dist.json", Eigen::Vector2d(0.7, -0.2), Eigen::Matrix2d::Zero());
  const Result r = run_cli({"validate", "--model", model, "--dist", dist, "--n", "1000", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["comparison"]["abs_diff_mean"].get<double>(), 0.0);
  EXPECT_EQ(j["comparison"]["z_mean"].get<double>(), 0.0);
  EXPECT_EQ(j["comparison"]["z_variance"].get<double>(), 0.0);
}

TEST_F(CliTest, ValidateDeepNegativePreactivations) {
  // Every hidden unit sits 3 to 4.5 standard deviations below zero, so only
  // the far tail is rectified.
  MlpModel m;
  m.input_weights.resize(2, 4);
  m.input_weights << 0.3, -0.2, 0.25, 0.1, 0.1, 0.3, -0.15, 0.2;
  m.hidden_bias = Eigen::Vector4d(-1.2, -1.0, -1.1, -0.9);
  m.output_weights = Eigen::Vector4d(1.0, 2.0, -1.5, 0.5);
  const auto model = write_model("model.json", m);
  const auto dist = write_dist("dist.json", Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  const Result r =
      run_cli({"validate", "--model", model, "--dist", dist, "--n", "2000000", "--seed", "11"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST_F(CliTest, ConvergeEmptyDirectoryExitsTwo) {
  fs::create_directories(path("empty"));
  const Result r = run_cli({"converge", "--cases", path("empty"), "--grid", "1000,10000", "--seed",
                            "1", "--out", path("out.csv")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_EQ(r.err.rfind("error[config]: ", 0), 0u);
}

TEST_F(CliTest, GenModelAndConvergeAreReproducible) {
  Result g = run_cli({"gen-model", "--m", "2", "--p", "12", "--seed", "42", "--out", path("m.json"),
                      "--cases", path("cases"), "--count", "12"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(read_text(path("m.json")), read_text(path("cases/model.json")));
  EXPECT_EQ(read_text(path("m.json")), serialize_model(gen_model(2, 12, 42)));
  g = run_cli({"gen-model", "--m", "2", "--p", "12", "--seed", "42", "--out", path("m2.json")});
  EXPECT_EQ(read_text(path("m.json")), read_text(path("m2.json")));

  const std::vector<std::string> args = {"converge", "--cases", path("cases"), "--grid",
                                         "1000,10000,100000", "--seed", "5"};
  auto first = args;
  first.insert(first.end(), {"--out", path("a.csv"), "--threads", "1"});
  auto second = args;
  second.insert(second.end(), {"--out", path("b.csv"), "--threads", "3"});
  const Result a = run_cli(first);
  const Result b = run_cli(second);
  ASSERT_TRUE(a.code == 0 || a.code == cli::kExitSlope) << a.err;
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read_text(path("a.csv")), read_text(path("b.csv")));
  const auto rows = parse_convergence_csv(read_text(path("a.csv")));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NE(a.out.find("slope_mean="), std::string::npos);
  EXPECT_NE(a.out.find("slope_variance="), std::string::npos);
}

TEST_F(CliTest, ConvergeTwoGridPointsWarns) {
  ASSERT_EQ(run_cli({"gen-model", "--m", "2", "--p", "4", "--seed", "1", "--out", path("m.json"),
                     "--cases", path("cases"), "--count", "10"})
                .code,
            0);
  const Result r = run_cli({"converge", "--cases", path("cases"), "--grid", "1000,100000", "--seed",
                            "2", "--out", path("o.csv")});
  EXPECT_TRUE(r.code == 0 || r.code == cli::kExitSlope);
  EXPECT_NE(r.err.find("warning: only 2 grid points"), std::string::npos);
  EXPECT_EQ(parse_convergence_csv(read_text(path("o.csv"))).size(), 2u);
}

TEST_F(CliTest, SelftestPassesAndDetectsInjectedError) {
  const Result clean = run_cli({"selftest"});
  EXPECT_EQ(clean.code, 0) << clean.out;
  EXPECT_NE(clean.out.find("selftest: PASS"), std::string::npos);
  const Result perturbed = run_cli({"selftest", "--inject-bvn-error", "1e-9"});
  EXPECT_EQ(perturbed.code, cli::kExitSelftest);
  EXPECT_NE(perturbed.out.find("FAIL"), std::string::npos);
}
