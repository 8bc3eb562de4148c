// Command-line driver: mesh generation, single solves, eigenvalue runs and
// convergence studies.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vem/vem.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::optional<std::string> config;
  std::optional<std::string> family;
  std::optional<int> N;
  std::optional<std::string> coeff_case;
  std::optional<std::string> out;
  std::optional<int> eig_count;
  std::optional<double> shift;
  std::optional<std::uint64_t> seed;
  std::string format = "both";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kFamilies{"th1", "th2", "th3", "th4", "th5", "th6", "th7"};

vem::ExperimentConfig resolve(const CommonArgs& a, vem::ProblemKind kind) {
  vem::ExperimentConfig cfg;
  if (a.config) {
    cfg = vem::read_config(*a.config);
  } else {
    cfg.problem = kind;
    if (kind == vem::ProblemKind::eigen) cfg.coefficients = "eigen_square";
  }
  if (a.family) {
    cfg.family = vem::family_from_string(*a.family);
    cfg.domain = vem::family_domain(cfg.family);
    if (!a.config && kind == vem::ProblemKind::eigen)
      cfg.coefficients = cfg.domain == vem::DomainTag::rotated_T ? "eigen_T" : "eigen_square";
  }
  if (a.N) cfg.N_list = {*a.N};
  if (a.coeff_case) {
    cfg.coefficients = *a.coeff_case;
    cfg.inline_coeffs.reset();
  }
  if (a.out) cfg.output_dir = *a.out;
  if (a.eig_count) cfg.eig_count = *a.eig_count;
  if (a.shift) cfg.shift = *a.shift;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

bool want_csv(const CommonArgs& a) { return a.format != "vtk"; }
bool want_vtk(const CommonArgs& a) { return a.format != "csv"; }

std::string stem(const vem::ExperimentConfig& cfg, int N) {
  return std::string(vem::to_string(cfg.family)) + "_N" + std::to_string(N);
}

std::string format_report(const vem::MeshQualityReport& q) {
  std::string s;
  char buf[128];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.10g\n", key, v);
    s += buf;
  };
  line("h", q.h);
  line("min_edge", q.min_edge);
  line("min_edge_over_h2", q.min_edge / (q.h * q.h));
  line("min_edge_over_h", q.min_edge_over_h);
  line("min_rho", q.min_rho);
  s += "cells = " + std::to_string(q.cell_count) + "\n";
  s += "vertices = " + std::to_string(q.vertex_count) + "\n";
  s += "max_cell_vertices = " + std::to_string(q.max_cell_vertices) + "\n";
  s += "reentrant_corners = " + std::to_string(q.reentrant_corners.size()) + "\n";
  for (const auto& p : q.reentrant_corners) {
    std::snprintf(buf, sizeof buf, "  corner (%.10g, %.10g)\n", p.x, p.y);
    s += buf;
  }
  return s;
}

int cmd_mesh(const CommonArgs& a) {
  if (!a.family || !a.N) throw UsageError("mesh needs --family and --N");
  const vem::MeshFamily fam = vem::family_from_string(*a.family);
  const vem::PolyMesh mesh = vem::generate(fam, *a.N, {true, a.seed.value_or(0)});
  const vem::MeshQualityReport q = vem::validate(mesh);
  const fs::path dir = a.out.value_or("out");
  fs::create_directories(dir);
  const std::string base = "mesh_" + std::string(vem::to_string(fam)) + "_N" + std::to_string(*a.N);
  vem::write_mesh(dir / (base + ".json"), mesh);
  if (want_vtk(a)) vem::export_vtk(dir / (base + ".vtk"), mesh);
  const std::string report = format_report(q);
  std::ofstream(dir / (base + "_report.txt")) << report;
  std::cout << report;
  return 0;
}

int cmd_solve(const CommonArgs& a) {
  vem::ExperimentConfig cfg = resolve(a, vem::ProblemKind::load);
  const int N = cfg.N_list.front();
  const vem::ProblemCase pc = vem::make_case(cfg);
  const vem::PolyMesh mesh = vem::generate(cfg.family, N, {true, cfg.seed});
  vem::validate(mesh);
  const vem::LoadLevel lv = vem::run_load(mesh, pc);
  fs::create_directories(cfg.output_dir);
  const std::string base = "solve_" + stem(cfg, N) + "_" + cfg.coefficients;
  if (want_vtk(a)) {
    std::vector<double> u(lv.u.data(), lv.u.data() + lv.u.size());
    vem::export_vtk(cfg.output_dir / (base + ".vtk"), mesh, std::span<const double>(u));
  }
  auto opt = [](const std::optional<double>& v) {
    char buf[64];
    if (!v) return std::string();
    std::snprintf(buf, sizeof buf, "%.10g", *v);
    return std::string(buf);
  };
  const std::string header = "N,h,dofs,L2,H1,triple,residual";
  char hbuf[64];
  std::snprintf(hbuf, sizeof hbuf, "%.10g", mesh.h());
  const std::string row = std::to_string(N) + "," + hbuf + "," + std::to_string(lv.dofs) + "," + opt(lv.l2) +
                          "," + opt(lv.h1) + "," + opt(lv.triple) + "," + opt(lv.residual);
  if (want_csv(a)) {
    std::ofstream out(cfg.output_dir / (base + ".csv"));
    out << "# config_hash=" << vem::hex(vem::config_hash(cfg)) << '\n'
        << "# " << vem::quality_line(N, vem::validate(mesh)) << '\n'
        << header << '\n'
        << row << '\n';
  }
  std::cout << header << '\n' << row << '\n';
  return 0;
}

int cmd_eig(const CommonArgs& a) {
  vem::ExperimentConfig cfg = resolve(a, vem::ProblemKind::eigen);
  cfg.problem = vem::ProblemKind::eigen;
  const int N = cfg.N_list.front();
  const vem::ProblemCase pc = vem::make_case(cfg);
  const vem::PolyMesh mesh = vem::generate(cfg.family, N, {true, cfg.seed});
  const vem::MeshQualityReport q = vem::validate(mesh);
  const double shift = vem::effective_shift(cfg);
  const vem::EigenLevel lv = vem::run_eigen(mesh, pc, cfg.eig_count, shift);
  fs::create_directories(cfg.output_dir);
  const std::string base = "eig_" + stem(cfg, N);
  std::string table = "index,re,im,residual\n";
  char buf[160];
  for (std::size_t i = 0; i < lv.result.eigenvalues.size(); ++i) {
    const auto z = lv.result.eigenvalues[i];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.3g,%.3g\n", i + 1, z.real(), z.imag(), lv.result.residuals[i]);
    table += buf;
  }
  if (want_csv(a)) {
    std::ofstream out(cfg.output_dir / (base + ".csv"));
    std::snprintf(buf, sizeof buf, "%.10g", lv.result.shift);
    out << "# config_hash=" << vem::hex(vem::config_hash(cfg)) << '\n'
        << "# " << vem::quality_line(N, q) << '\n'
        << "# shift=" << buf << " dofs=" << lv.dofs << " discarded=" << lv.result.discarded_count << '\n'
        << table;
  }
  if (want_vtk(a)) {
    for (Eigen::Index c = 0; c < lv.modes.cols(); ++c) {
      std::vector<double> u(lv.modes.col(c).data(), lv.modes.col(c).data() + lv.modes.rows());
      vem::export_vtk(cfg.output_dir / (base + "_mode" + std::to_string(c + 1) + ".vtk"), mesh,
                      std::span<const double>(u), "mode" + std::to_string(c + 1));
    }
  }
  std::cout << table;
  return 0;
}

int cmd_convergence(const CommonArgs& a) {
  if (!a.config && !a.family) throw UsageError("convergence needs --config or --family");
  const vem::ExperimentConfig cfg = resolve(a, vem::ProblemKind::load);
  const vem::StudyResult r = vem::run_study(cfg);
  if (want_csv(a)) {
    const fs::path path = vem::write_study_csv(cfg, r);
    std::cerr << "wrote " << path.string() << '\n';
  }
  r.record.write_csv(std::cout, r.comments);
  for (const auto& f : r.failures) std::cerr << "level failed: " << f << '\n';
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lowest-order virtual element solver for convection-diffusion-reaction problems"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", args.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--family", args.family, "mesh family th1..th7")->check(CLI::IsMember(kFamilies));
    sub->add_option("--N", args.N, "mesh resolution")->check(CLI::PositiveNumber);
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", args.seed, "mesh variant seed");
    sub->add_option("--format", args.format, "csv, vtk or both")
        ->check(CLI::IsMember({"csv", "vtk", "both"}));
  };

  CLI::App* mesh = app.add_subcommand("mesh", "generate a mesh and print its quality report");
  add_common(mesh, false);
  CLI::App* solve = app.add_subcommand("solve", "solve a load problem on one mesh");
  add_common(solve, true);
  solve->add_option("--case", args.coeff_case, "named coefficient case (test1, test2, patch)");
  CLI::App* eig = app.add_subcommand("eig", "compute the lowest eigenvalues on one mesh");
  add_common(eig, true);
  CLI::App* conv = app.add_subcommand("convergence", "run a convergence study from a config");
  add_common(conv, true);
  conv->add_option("--case", args.coeff_case, "named coefficient case");
  for (CLI::App* sub : {eig, conv}) {
    sub->add_option("--eig-count", args.eig_count, "number of eigenvalues")->check(CLI::PositiveNumber);
    sub->add_option("--shift", args.shift, "shift for shift-invert");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (mesh->parsed()) return cmd_mesh(args);
    if (solve->parsed()) return cmd_solve(args);
    if (eig->parsed()) return cmd_eig(args);
    return cmd_convergence(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const vem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const vem::ExpressionError& e) {
    std::cerr << "expression error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
