#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "vem/experiment.hpp"

namespace fs = std::filesystem;
using vem::ExperimentConfig;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vem_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VEM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.problem = vem::ProblemKind::eigen;
  c.family = vem::MeshFamily::th5;
  c.domain = vem::DomainTag::rotated_T;
  c.N_list = {16, 30};
  c.coefficients = "eigen_T";
  c.shift = 30.0;
  c.eig_count = 3;
  c.seed = 4;
  const ExperimentConfig r = vem::config_from_json(vem::to_json(c));
  EXPECT_EQ(vem::to_json(r), vem::to_json(c));
  EXPECT_EQ(vem::config_hash(r), vem::config_hash(c));
}

TEST(Config, HashSeparatesConfigs) {
  ExperimentConfig a, b;
  b.N_list = {8, 16, 32};
  EXPECT_NE(vem::config_hash(a), vem::config_hash(b));
  EXPECT_EQ(vem::config_hash(a), vem::config_hash(ExperimentConfig{}));
  EXPECT_EQ(vem::hex(vem::config_hash(a)).size(), 16U);
}

TEST(Config, ValidationErrors) {
  using nlohmann::json;
  EXPECT_THROW(vem::config_from_json(json{{"N_list", json::array()}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"N_list", {16, 8}}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"problem", "wave"}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"mesh_family", "th9"}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"mesh_family", "th4"}, {"domain", "unit_square"}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"problem", "eigen"}, {"eig_count", 0}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"N_list", "many"}}), vem::ConfigError);
  EXPECT_THROW(vem::config_from_json(json{{"kappa", -1.0}}), vem::ConfigError);
  const auto eig = vem::config_from_json(json{{"problem", "eigen"}, {"mesh_family", "th4"}});
  EXPECT_EQ(eig.coefficients, "eigen_T");
  EXPECT_EQ(eig.domain, vem::DomainTag::rotated_T);
}

TEST(Config, ReadFromFile) {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "bad.json") << "{ \"N_list\": [8, ";
  EXPECT_THROW(vem::read_config(dir / "bad.json"), vem::ConfigError);
  EXPECT_THROW(vem::read_config(dir / "missing.json"), vem::ConfigError);
  std::ofstream(dir / "ok.json") << R"({"problem":"load","mesh_family":"th2","N_list":[4,8]})";
  EXPECT_EQ(vem::read_config(dir / "ok.json").family, vem::MeshFamily::th2);
  fs::remove_all(dir);
}

TEST(Study, LoadStudyIsDeterministic) {
  ExperimentConfig c;
  c.family = vem::MeshFamily::th2;
  c.N_list = {4, 8, 16};
  const auto a = vem::run_study(c), b = vem::run_study(c);
  ASSERT_TRUE(a.ok());
  std::ostringstream sa, sb;
  a.record.write_csv(sa, a.comments);
  b.record.write_csv(sb, b.comments);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str().find("config_hash=" + vem::hex(vem::config_hash(c))), std::string::npos);
  EXPECT_GT(*a.record.order("L2"), 1.5);
  EXPECT_GT(*a.record.order("H1"), 0.7);
}

TEST(Study, FailedLevelsAreReportedWithoutAbortingOthers) {
  ExperimentConfig c;
  c.problem = vem::ProblemKind::eigen;
  c.family = vem::MeshFamily::th4;
  c.domain = vem::DomainTag::rotated_T;
  c.coefficients = "eigen_T";
  c.N_list = {2, 4, 6, 8};
  c.eig_count = 2;
  const auto r = vem::run_study(c);
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.record.entries().empty());
  for (const auto& f : r.failures) EXPECT_EQ(f.rfind("N=", 0), 0U) << f;
}

TEST(Study, InlineCoefficientsMatchNamedCase) {
  ExperimentConfig named;
  named.family = vem::MeshFamily::th3;
  named.N_list = {4, 8, 16};
  ExperimentConfig in = named;
  vem::InlineCoefficients ic;
  ic.theta_x = "x";
  ic.theta_y = "y";
  ic.gamma = "1";
  ic.u = "sin(pi*x)*sin(pi*y)";
  ic.u_x = "pi*cos(pi*x)*sin(pi*y)";
  ic.u_y = "pi*sin(pi*x)*cos(pi*y)";
  ic.f = "2*pi^2*sin(pi*x)*sin(pi*y) + x*pi*cos(pi*x)*sin(pi*y) + y*pi*sin(pi*x)*cos(pi*y) + sin(pi*x)*sin(pi*y)";
  in.inline_coeffs = ic;
  in.coefficients = "inline";
  const auto a = vem::run_study(named), b = vem::run_study(in);
  for (const char* col : {"L2", "H1", "triple"}) {
    const auto x = a.record.column(col), y = b.record.column(col);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-12 * x[i]) << col;
  }
}

TEST(Study, UnitSquareEigenOrders) {
  ExperimentConfig c;
  c.problem = vem::ProblemKind::eigen;
  c.family = vem::MeshFamily::th2;
  c.coefficients = "eigen_square";
  c.N_list = {8, 16, 32};
  c.eig_count = 2;
  const auto r = vem::run_study(c);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(*r.record.order("lambda1"), 2.0, 0.2);
  EXPECT_NEAR(*r.record.limit("lambda1"), 0.25 + 2 * std::numbers::pi * std::numbers::pi, 1e-12);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("mesh --help"), 0);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("mesh --family th9 --N 4" + out), 2);
  EXPECT_EQ(run_cli("mesh --family th2 --N 4 --bogus" + out), 2);
  EXPECT_EQ(run_cli("solve --family th4 --N 8 --case nope" + out), 2);
  EXPECT_EQ(run_cli("convergence --config " + (dir / "absent.json").string()), 2);
  EXPECT_EQ(run_cli("mesh --family th4 --N 5" + out), 1);
  EXPECT_EQ(run_cli("mesh --family th2 --N 4" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "mesh_th2_N4.json"));
  EXPECT_TRUE(fs::exists(dir / "mesh_th2_N4.vtk"));
  EXPECT_TRUE(fs::exists(dir / "mesh_th2_N4_report.txt"));
  fs::remove_all(dir);
}

TEST(Cli, SolveAndEig) {
  const fs::path dir = scratch("cli_solve");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("solve --family th1 --N 4 --case test1" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "solve_th1_N4_test1.csv"));
  EXPECT_TRUE(fs::exists(dir / "solve_th1_N4_test1.vtk"));
  EXPECT_EQ(run_cli("eig --family th2 --N 4 --eig-count 2 --format csv" + out), 0);
  const std::string eig = slurp(dir / "eig_th2_N4.csv");
  EXPECT_NE(eig.find("index,re,im,residual"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, ZeroSourceGivesZeroSolution) {
  const fs::path dir = scratch("cli_zero");
  std::ofstream(dir / "zero.json") << R"({"problem":"load","mesh_family":"th2","N_list":[4],
    "coefficients":{"kappa":"1","theta":["x","y"],"gamma":"1","f":"0"},
    "output_dir":")" << dir.string() << R"("})";
  ASSERT_EQ(run_cli("solve --format csv --config " + (dir / "zero.json").string()), 0);
  const std::string vtk_free = slurp(dir / "solve_th2_N4_inline.csv");
  EXPECT_NE(vtk_free.find("N,h,dofs"), std::string::npos);
  // Compare against a direct run of the same config.
  const auto cfg = vem::read_config(dir / "zero.json");
  const auto mesh = vem::generate(cfg.family, 4);
  const auto lv = vem::run_load(mesh, vem::make_case(cfg));
  EXPECT_EQ(lv.u.cwiseAbs().maxCoeff(), 0.0);
  fs::remove_all(dir);
}
