#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vem/analysis.hpp"
#include "vem/assembly.hpp"
#include "vem/expression.hpp"
#include "vem/mesh_generators.hpp"
#include "vem/mesh_io.hpp"
#include "vem/problems.hpp"
#include "vem/solvers.hpp"

namespace vem {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ProblemKind { load, eigen };

inline std::string_view to_string(ProblemKind p) { return p == ProblemKind::load ? "load" : "eigen"; }

/// Inline coefficient expressions in x and y; unset entries are zero except kappa (1).
struct InlineCoefficients {
  std::string kappa = "1";
  std::string theta_x = "0";
  std::string theta_y = "0";
  std::string gamma = "0";
  std::string f = "0";
  std::string u;  ///< exact solution and Dirichlet data; empty means homogeneous data
  std::string u_x, u_y;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::load;
  DomainTag domain = DomainTag::unit_square;
  MeshFamily family = MeshFamily::th1;
  std::vector<int> N_list{8, 16, 32, 64};
  std::string coefficients = "test1";              ///< named case
  std::optional<InlineCoefficients> inline_coeffs;  ///< overrides the named case
  Point2 theta{1.0, 0.0};                          ///< eigen cases
  double kappa = 1.0;                              ///< eigen cases
  int eig_count = 6;
  std::optional<double> shift;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  void validate() const {
    if (N_list.empty()) throw ConfigError("N_list must not be empty");
    for (std::size_t i = 1; i < N_list.size(); ++i)
      if (N_list[i] <= N_list[i - 1]) throw ConfigError("N_list must be strictly ascending");
    if (problem == ProblemKind::eigen && eig_count < 1) throw ConfigError("eig_count must be >= 1");
    if (family_domain(family) != domain)
      throw ConfigError("mesh family " + std::string(to_string(family)) + " does not mesh domain " +
                        std::string(to_string(domain)));
    if (!(kappa > 0)) throw ConfigError("kappa must be positive");
    if (!inline_coeffs) {
      try {
        named_case(coefficients);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["problem"] = std::string(to_string(c.problem));
  j["domain"] = std::string(to_string(c.domain));
  j["mesh_family"] = std::string(to_string(c.family));
  j["N_list"] = c.N_list;
  if (c.inline_coeffs) {
    const auto& ic = *c.inline_coeffs;
    j["coefficients"] = {{"kappa", ic.kappa}, {"theta", {ic.theta_x, ic.theta_y}}, {"gamma", ic.gamma},
                         {"f", ic.f},         {"u", ic.u},                         {"grad_u", {ic.u_x, ic.u_y}}};
  } else {
    j["coefficients"] = c.coefficients;
  }
  j["theta"] = {c.theta.x, c.theta.y};
  j["kappa"] = c.kappa;
  j["eig_count"] = c.eig_count;
  j["shift"] = c.shift ? nlohmann::json(*c.shift) : nlohmann::json(nullptr);
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("problem")) {
      const auto p = j.at("problem").get<std::string>();
      if (p == "load") c.problem = ProblemKind::load;
      else if (p == "eigen") c.problem = ProblemKind::eigen;
      else throw ConfigError("unknown problem '" + p + "' (expected load or eigen)");
    }
    if (j.contains("mesh_family")) c.family = family_from_string(j.at("mesh_family").get<std::string>());
    c.domain = j.contains("domain") ? domain_from_string(j.at("domain").get<std::string>())
                                    : family_domain(c.family);
    if (j.contains("N_list")) c.N_list = j.at("N_list").get<std::vector<int>>();
    if (j.contains("coefficients")) {
      const auto& cj = j.at("coefficients");
      if (cj.is_string()) {
        c.coefficients = cj.get<std::string>();
      } else if (cj.is_object()) {
        InlineCoefficients ic;
        ic.kappa = cj.value("kappa", ic.kappa);
        if (cj.contains("theta")) {
          const auto th = cj.at("theta").get<std::vector<std::string>>();
          if (th.size() != 2) throw ConfigError("coefficients.theta needs two expressions");
          ic.theta_x = th[0];
          ic.theta_y = th[1];
        }
        ic.gamma = cj.value("gamma", ic.gamma);
        ic.f = cj.value("f", ic.f);
        ic.u = cj.value("u", ic.u);
        if (cj.contains("grad_u")) {
          const auto g = cj.at("grad_u").get<std::vector<std::string>>();
          if (g.size() != 2) throw ConfigError("coefficients.grad_u needs two expressions");
          ic.u_x = g[0];
          ic.u_y = g[1];
        }
        c.inline_coeffs = ic;
        c.coefficients = "inline";
      } else {
        throw ConfigError("coefficients must be a case name or an object of expressions");
      }
    } else if (c.problem == ProblemKind::eigen) {
      c.coefficients = c.domain == DomainTag::rotated_T ? "eigen_T" : "eigen_square";
    }
    if (j.contains("theta")) {
      const auto th = j.at("theta").get<std::vector<double>>();
      if (th.size() != 2) throw ConfigError("theta needs two components");
      c.theta = {th[0], th[1]};
    }
    c.kappa = j.value("kappa", c.kappa);
    c.eig_count = j.value("eig_count", c.eig_count);
    if (j.contains("shift") && !j.at("shift").is_null()) c.shift = j.at("shift").get<double>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const MeshError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": parse error at byte " + std::to_string(e.byte));
  }
  return config_from_json(j);
}

/// 64-bit FNV-1a of the canonical config serialization.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

inline ProblemCase make_case(const ExperimentConfig& c) {
  if (!c.inline_coeffs) {
    if (c.coefficients == "eigen_square" || c.coefficients == "eigen_T")
      return eigen_case(c.coefficients, c.theta, c.kappa);
    return named_case(c.coefficients);
  }
  const auto& ic = *c.inline_coeffs;
  auto field = [](const std::string& text) -> ScalarField {
    if (text.empty()) return {};
    return Expression::parse(text);
  };
  ProblemCase pc;
  pc.name = "inline";
  pc.coeffs.kappa = field(ic.kappa);
  const Expression tx = Expression::parse(ic.theta_x), ty = Expression::parse(ic.theta_y);
  pc.coeffs.theta = [tx, ty](Point2 p) { return Point2{tx(p), ty(p)}; };
  pc.coeffs.gamma = field(ic.gamma);
  pc.coeffs.f = field(ic.f);
  pc.u_exact = field(ic.u);
  if (!ic.u_x.empty() && !ic.u_y.empty()) {
    const Expression gx = Expression::parse(ic.u_x), gy = Expression::parse(ic.u_y);
    pc.grad_exact = [gx, gy](Point2 p) { return Point2{gx(p), gy(p)}; };
  }
  return pc;
}

inline double effective_shift(const ExperimentConfig& c) {
  if (c.shift) return *c.shift;
  if (c.inline_coeffs) return 1.0;
  return default_shift(c.domain == DomainTag::unit_square, c.theta, c.kappa);
}

struct LoadLevel {
  Eigen::VectorXd u;  ///< full nodal vector
  std::optional<double> l2, h1, triple;
  double residual = 0.0;
  std::size_t dofs = 0;
};

inline LoadLevel run_load(const PolyMesh& mesh, const ProblemCase& pc) {
  const GlobalSystem sys = assemble(mesh, pc.coeffs);
  const Eigen::VectorXd rhs = apply_dirichlet_lift(sys, mesh, pc.u_exact);
  const LoadSolution sol = solve_load(sys.load_matrix(), rhs);
  LoadLevel out;
  out.dofs = sys.dof.n_interior;
  out.residual = sol.relative_residual;
  out.u = expand_solution(sys, mesh, sol.u, pc.u_exact);
  if (pc.u_exact) {
    out.l2 = error_l2(mesh, out.u, pc.u_exact);
    out.triple = triple_seminorm_interp(mesh, out.u, pc.u_exact, pc.coeffs.kappa);
  }
  if (pc.grad_exact) out.h1 = error_h1_semi(mesh, out.u, pc.grad_exact);
  return out;
}

struct EigenLevel {
  EigenResult result;
  std::size_t dofs = 0;
  Eigen::MatrixXd modes;  ///< real parts of the eigenvectors as full nodal vectors
};

inline EigenLevel run_eigen(const PolyMesh& mesh, const ProblemCase& pc, int k, double shift,
                            const EigOptions& opt = {}) {
  const GlobalSystem sys = assemble(mesh, pc.coeffs);
  EigenLevel out;
  out.dofs = sys.dof.n_interior;
  out.result = solve_eigs(sys.eigen_matrix(), sys.M, k, shift, opt);
  const auto cols = out.result.eigenvectors.cols();
  out.modes.resize(static_cast<Eigen::Index>(mesh.num_vertices()), cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    Eigen::VectorXcd v = out.result.eigenvectors.col(c);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::abs(v(imax)) / v(imax);  // phase so the largest entry is real positive
    out.modes.col(c) = expand_solution(sys, mesh, v.real());
  }
  return out;
}

inline std::string quality_line(int N, const MeshQualityReport& q) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "N=%d h=%.6g min_edge=%.6g min_edge_over_h=%.6g min_rho=%.6g cells=%zu vertices=%zu "
                "reentrant_corners=%zu",
                N, q.h, q.min_edge, q.min_edge_over_h, q.min_rho, q.cell_count, q.vertex_count,
                q.reentrant_corners.size());
  return buf;
}

struct StudyResult {
  ConvergenceRecord record{std::vector<std::string>{}};
  std::vector<std::string> comments;
  std::vector<std::string> failures;
  std::vector<std::vector<std::complex<double>>> eigenvalues;  ///< per successful level
  std::vector<int> levels;                                     ///< N of each successful level

  [[nodiscard]] bool ok() const { return failures.empty(); }
};

/// Runs every level of N_list (concurrently), then fits orders in N order.
inline StudyResult run_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemCase pc = make_case(cfg);
  const MeshOptions mopt{true, cfg.seed};
  const double shift = effective_shift(cfg);

  struct Level {
    int N = 0;
    MeshQualityReport quality;
    std::optional<LoadLevel> load;
    std::optional<EigenLevel> eigen;
    double h = 0.0;
    std::string error;
  };
  auto run_level = [&](int N) {
    Level lv;
    lv.N = N;
    try {
      const PolyMesh mesh = generate(cfg.family, N, mopt);
      lv.quality = validate(mesh);
      lv.h = mesh.h();
      if (cfg.problem == ProblemKind::load) lv.load = run_load(mesh, pc);
      else lv.eigen = run_eigen(mesh, pc, cfg.eig_count, shift);
    } catch (const std::exception& e) {
      lv.error = "N=" + std::to_string(N) + ": " + e.what();
    }
    return lv;
  };
  std::vector<std::future<Level>> futures;
  for (int N : cfg.N_list) futures.push_back(std::async(std::launch::async, run_level, N));
  std::vector<Level> levels;
  for (auto& f : futures) levels.push_back(f.get());

  StudyResult out;
  std::vector<std::string> columns;
  if (cfg.problem == ProblemKind::load) {
    columns = {"L2", "H1", "triple"};
  } else {
    for (int i = 1; i <= cfg.eig_count; ++i) columns.push_back("lambda" + std::to_string(i));
    columns.push_back("max_imag_ratio");
  }
  out.record = ConvergenceRecord(columns);
  out.comments.push_back("config_hash=" + hex(config_hash(cfg)));
  out.comments.push_back("problem=" + std::string(to_string(cfg.problem)) +
                         " family=" + std::string(to_string(cfg.family)) + " coefficients=" + cfg.coefficients +
                         " seed=" + std::to_string(cfg.seed));
  if (cfg.problem == ProblemKind::eigen) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "shift=%.10g", shift);
    out.comments.emplace_back(buf);
    out.comments.emplace_back("eigenvalue orders and limits fitted against 1/N");
  }

  for (const Level& lv : levels) {
    if (!lv.error.empty()) {
      out.failures.push_back(lv.error);
      out.comments.push_back("failed " + lv.error);
      continue;
    }
    out.comments.push_back(quality_line(lv.N, lv.quality));
    ConvergenceRecord::Entry e;
    e.N = lv.N;
    e.h = lv.h;
    if (lv.load) {
      e.dof_count = lv.load->dofs;
      if (lv.load->l2) e.values["L2"] = *lv.load->l2;
      if (lv.load->h1) e.values["H1"] = *lv.load->h1;
      if (lv.load->triple) e.values["triple"] = *lv.load->triple;
    } else {
      e.dof_count = lv.eigen->dofs;
      e.fit_h = 1.0 / lv.N;
      const auto& vals = lv.eigen->result.eigenvalues;
      if (static_cast<int>(vals.size()) < cfg.eig_count) {
        out.failures.push_back("N=" + std::to_string(lv.N) + ": only " + std::to_string(vals.size()) +
                               " finite eigenvalues found");
        continue;
      }
      double imag_ratio = 0.0;
      for (int i = 0; i < cfg.eig_count; ++i) {
        e.values["lambda" + std::to_string(i + 1)] = vals[static_cast<std::size_t>(i)].real();
        imag_ratio = std::max(imag_ratio, std::abs(vals[static_cast<std::size_t>(i)].imag()) /
                                              std::abs(vals[static_cast<std::size_t>(i)].real()));
      }
      e.values["max_imag_ratio"] = imag_ratio;
      out.eigenvalues.push_back(vals);
    }
    out.levels.push_back(lv.N);
    out.record.add(std::move(e));
  }

  if (out.record.entries().size() >= 3) {
    if (cfg.problem == ProblemKind::load) {
      for (const char* c : {"L2", "H1", "triple"}) {
        const auto& first = out.record.entries().front().values;
        if (first.contains(c)) {
          try {
            out.record.fit_error_order(c);
          } catch (const AnalysisError&) {
          }
        }
      }
    } else {
      const bool exact_known = cfg.domain == DomainTag::unit_square && !cfg.inline_coeffs;
      const auto exact = exact_square_eigenvalues(cfg.theta, cfg.kappa, static_cast<std::size_t>(cfg.eig_count));
      for (int i = 0; i < cfg.eig_count; ++i) {
        const std::string name = "lambda" + std::to_string(i + 1);
        try {
          if (exact_known) out.record.fit_against(name, exact[static_cast<std::size_t>(i)]);
          else out.record.fit_extrapolated(name);
        } catch (const AnalysisError&) {
        }
      }
    }
  }
  return out;
}

inline std::string study_filename(const ExperimentConfig& cfg) {
  return std::string(to_string(cfg.problem)) + "_" + std::string(to_string(cfg.family)) + "_" +
         cfg.coefficients + ".csv";
}

inline std::filesystem::path write_study_csv(const ExperimentConfig& cfg, const StudyResult& r) {
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / study_filename(cfg);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  r.record.write_csv(out, r.comments);
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return path;
}

}  // namespace vem
