#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "releq/cli.hpp"
#include "support.hpp"

using namespace releq;
using cli::RunConfig;
using testing_support::fixture_path;
using testing_support::system_path;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "releq_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

RunConfig config(const std::string& command, const std::string& system) {
  RunConfig c;
  c.command = command;
  c.system_path = system_path(system);
  return c;
}

json parse(const cli::CommandResult& r) { return json::parse(r.output); }

int run_binary(const std::string& args) {
  const std::string cmd = std::string(RELEQ_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CliValidate, ExitCodes) {
  auto r = cli::run(config("validate", "rigidbody.json"));
  EXPECT_EQ(r.exit_code, 0);
  const auto j = parse(r);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_FALSE(j["checks"].empty());

  RunConfig bad;
  bad.command = "validate";
  bad.system_path = fixture_path("corrupted_so3.json");
  r = cli::run(bad);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.error.find("jacobi defect 5.0e-02 exceeds 1e-12"), std::string::npos);

  bad.system_path = fixture_path("singular_block.json");
  r = cli::run(bad);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.error.find("momentum block singular"), std::string::npos);

  bad.system_path = fixture_path("nope.json");
  EXPECT_EQ(cli::run(bad).exit_code, 2);
  bad.system_path = fixture_path("missing_key.json");
  EXPECT_EQ(cli::run(bad).exit_code, 2);
  bad.system_path = fixture_path("malformed.json");
  EXPECT_EQ(cli::run(bad).exit_code, 2);
}

TEST(CliFind, KeplerAtUnitMomentum) {
  auto c = config("find", "kepler.json");
  c.mu = std::vector<double>{1.0};
  const auto r = cli::run(c);
  ASSERT_EQ(r.exit_code, 0) << r.error;
  const auto j = parse(r);
  ASSERT_EQ(j["reports"].size(), 1u);
  const auto& rep = j["reports"][0];
  EXPECT_NEAR(rep["x"][0].get<double>(), 1.0, 1e-8);
  EXPECT_NEAR(rep["xi"][0].get<double>(), 1.0, 1e-8);
  for (auto it = rep["residuals"].begin(); it != rep["residuals"].end(); ++it) EXPECT_LE(it.value().get<double>(), 1e-9);
  EXPECT_TRUE(rep["isotropy_ok"].get<bool>());
  EXPECT_TRUE(rep.contains("reduced_hessian_condition"));
  EXPECT_EQ(j["rng"].get<int>(), 1);
}

TEST(CliFind, RigidBodyModes) {
  auto c = config("find", "rigidbody.json");
  c.free = true;
  c.seeds = 200;
  c.rng = 7;
  auto j = parse(cli::run(c));
  EXPECT_EQ(j["reports"].size(), 6u);
  EXPECT_EQ(j["validated_count"].get<int>(), 6);

  c = config("find", "rigidbody.json");
  c.xi = std::vector<double>{0, 0, 1};
  j = parse(cli::run(c));
  ASSERT_EQ(j["reports"].size(), 1u);
  EXPECT_EQ(j["reports"][0]["mu"], json::parse("[0.0, 0.0, 3.0]"));
}

TEST(CliFind, RequireSolution) {
  auto c = config("find", "rigidbody.json");
  c.xi = std::vector<double>{1, 1, 0};
  c.require_solution = true;
  EXPECT_EQ(cli::run(c).exit_code, 4);
  c.require_solution = false;
  EXPECT_EQ(cli::run(c).exit_code, 0);
}

TEST(CliFind, ModeAndDimensionErrors) {
  auto c = config("find", "kepler.json");
  EXPECT_EQ(cli::run(c).exit_code, 2);
  c.mu = std::vector<double>{1.0, 2.0};
  EXPECT_EQ(cli::run(c).exit_code, 2);
  c.mu = std::vector<double>{1.0};
  c.free = true;
  EXPECT_EQ(cli::run(c).exit_code, 2);
}

TEST(CliFind, Reproducible) {
  auto c = config("find", "spherical_pendulum.json");
  c.mu = std::vector<double>{1.2};
  c.rng = 11;
  EXPECT_EQ(cli::run(c).output, cli::run(c).output);
  c = config("find", "rigidbody.json");
  c.free = true;
  c.rng = 5;
  EXPECT_EQ(cli::run(c).output, cli::run(c).output);
}

TEST(CliFind, CsvHasOneRowPerReport) {
  auto c = config("find", "rigidbody.json");
  c.free = true;
  c.seeds = 200;
  c.rng = 7;
  c.format = "csv";
  const auto r = cli::run(c);
  ASSERT_EQ(r.exit_code, 0);
  std::istringstream is(r.output);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("seed_index,xi1,xi2,xi3,mu1,mu2,mu3,energy", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(CliVerify, PassAndCorruptedAndEmpty) {
  auto c = config("find", "kepler.json");
  c.mu = std::vector<double>{1.0};
  const auto found = cli::run(c);
  const auto good = scratch("kepler_report.json");
  write(good, found.output);

  auto v = config("verify", "kepler.json");
  v.report_path = good.string();
  auto r = cli::run(v);
  ASSERT_EQ(r.exit_code, 0) << r.error;
  EXPECT_NEAR(parse(r)["results"][0]["estimated_order"].get<double>(), 2.0, 0.2);

  auto j = json::parse(found.output);
  for (auto& rep : j["reports"]) rep["xi"][0] = rep["xi"][0].get<double>() * 1.05;
  const auto bad = scratch("kepler_report_bad.json");
  write(bad, j.dump());
  v.report_path = bad.string();
  EXPECT_EQ(cli::run(v).exit_code, 5);

  v.report_path = fixture_path("empty_report.json");
  EXPECT_EQ(cli::run(v).exit_code, 2);
  const auto blank = scratch("blank.json");
  write(blank, "");
  v.report_path = blank.string();
  EXPECT_EQ(cli::run(v).exit_code, 2);
  write(blank, R"j({"reports": [{"x": [1.0, 2.0], "xi": [1.0]}]})j");
  EXPECT_EQ(cli::run(v).exit_code, 2);
}

TEST(CliIntegrate, TumblingSummary) {
  auto c = config("integrate", "rigidbody.json");
  c.xi = std::vector<double>{1, 0.01, 0};
  c.T = 10.0;
  c.h = 1e-3;
  c.every = 100;
  const auto r = cli::run(c);
  ASSERT_EQ(r.exit_code, 0) << r.error;
  const auto j = parse(r);
  EXPECT_LE(j["summary"]["energy_drift"].get<double>(), 1e-10);
  EXPECT_LE(j["summary"]["momentum_drift"].get<double>(), 1e-8);
  EXPECT_LE(j["summary"]["casimir_drift"].get<double>(), 1e-9);
  EXPECT_EQ(j["rows"].size(), 101u);
  EXPECT_EQ(j["columns"].size(), 11u);
}

TEST(CliIntegrate, RelativeEquilibriumGivesConstantColumns) {
  auto c = config("integrate", "rigidbody.json");
  c.xi = std::vector<double>{0, 2, 0};
  c.T = 5.0;
  c.h = 1e-2;
  const auto j = parse(cli::run(c));
  const auto& first = j["rows"][0];
  for (const auto& row : j["rows"])
    for (std::size_t col = 1; col < row.size(); ++col)
      EXPECT_NEAR(row[col].get<double>(), first[col].get<double>(), 1e-12);
}

TEST(CliIntegrate, Errors) {
  auto c = config("integrate", "kepler.json");
  c.xi = std::vector<double>{1};
  auto r = cli::run(c);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.error.find("integrate requires lie_group system"), std::string::npos);
  c = config("integrate", "rigidbody.json");
  EXPECT_EQ(cli::run(c).exit_code, 2);
  // momentum block singular at the initial velocity
  const auto soft = scratch("soft.json");
  write(soft, R"j({"kind": "lie_group", "algebra": "so3", "l": "0.5*(xi1^2 + 2*xi2^2 + 3*xi3^2) - 0.05*xi2^4"})j");
  c.system_path = soft.string();
  c.xi = std::vector<double>{1, std::sqrt(10.0 / 3.0), 1};
  c.T = 1.0;
  c.h = 1e-2;
  EXPECT_EQ(cli::run(c).exit_code, 6);
}

TEST(CliSaari, RigidBodyKeplerIsotropic) {
  auto c = config("find", "rigidbody.json");
  c.xi = std::vector<double>{0, 0, 1};
  const auto rb = scratch("rb_e3.json");
  write(rb, cli::run(c).output);
  auto s = config("saari", "rigidbody.json");
  s.report_path = rb.string();
  auto j = parse(cli::run(s));
  EXPECT_LE(j["results"][0]["refined_variation"].get<double>(), 1e-9);
  EXPECT_GE(j["results"][0]["naive_variation"].get<double>(), 0.9);

  c = config("find", "kepler.json");
  c.mu = std::vector<double>{1.0};
  const auto kp = scratch("kepler_saari.json");
  write(kp, cli::run(c).output);
  s = config("saari", "kepler.json");
  s.report_path = kp.string();
  j = parse(cli::run(s));
  EXPECT_LE(j["results"][0]["naive_variation"].get<double>(), 1e-12);
  EXPECT_LE(j["results"][0]["refined_variation"].get<double>(), 1e-12);

  c = config("find", "isotropic_body.json");
  c.xi = std::vector<double>{0.2, 0.5, -1};
  const auto iso = scratch("iso_saari.json");
  write(iso, cli::run(c).output);
  s = config("saari", "isotropic_body.json");
  s.report_path = iso.string();
  j = parse(cli::run(s));
  EXPECT_LE(j["results"][0]["naive_variation"].get<double>(), 1e-12);
  EXPECT_LE(j["results"][0]["refined_variation"].get<double>(), 1e-12);

  s.report_path = fixture_path("empty_report.json");
  EXPECT_EQ(cli::run(s).exit_code, 2);
}

TEST(CliBinary, ExitCodes) {
  const std::string sys = system_path("rigidbody.json");
  EXPECT_EQ(run_binary("validate " + sys), 0);
  EXPECT_EQ(run_binary("validate " + fixture_path("corrupted_so3.json")), 3);
  EXPECT_EQ(run_binary("validate /nonexistent/file.json"), 2);
  EXPECT_EQ(run_binary("find " + sys + " --xi 1,1,0 --require-solution"), 4);
  EXPECT_EQ(run_binary("find " + sys + " --xi 1,x,0"), 2);
  EXPECT_EQ(run_binary("integrate " + system_path("kepler.json") + " --xi0 1"), 2);
  EXPECT_EQ(run_binary("frobnicate " + sys), 2);
  EXPECT_EQ(run_binary("find " + sys + " --free --format xml"), 2);
  const auto out = scratch("binary_out.json");
  EXPECT_EQ(run_binary("find " + sys + " --free --seeds 20 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out));
  EXPECT_EQ(json::parse(std::ifstream(out))["command"], "find");
  EXPECT_EQ(run_binary("verify " + sys + " " + out.string() + " --T 2"), 0);
}
