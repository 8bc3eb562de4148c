#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "vem/assembly.hpp"
#include "vem/mesh_generators.hpp"
#include "vem/problems.hpp"
#include "vem/solvers.hpp"

using vem::Point2;
using vem::SparseMatrix;

namespace {

double max_abs(const SparseMatrix& m) {
  double best = 0;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
  return best;
}

vem::CoefficientSet pure_diffusion() {
  vem::CoefficientSet c;
  c.kappa = [](Point2) { return 1.0; };
  return c;
}

}  // namespace

TEST(Assembly, StiffnessIsSpd) {
  const auto mesh = vem::gen_square_th2(2);
  const auto sys = vem::assemble(mesh, pure_diffusion());
  const Eigen::MatrixXd A(sys.A);
  EXPECT_LE((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-14 * A.cwiseAbs().maxCoeff());
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Assembly, NoConvectionMeansZeroB) {
  const auto sys = vem::assemble(vem::gen_square_th1(4), pure_diffusion());
  EXPECT_EQ(max_abs(sys.B), 0.0);
  EXPECT_EQ(max_abs(sys.C), 0.0);
}

TEST(Assembly, PatchTestIsExact) {
  const vem::ProblemCase pc = vem::patch_test();
  for (auto f : {vem::MeshFamily::th1, vem::MeshFamily::th2, vem::MeshFamily::th3}) {
    const auto mesh = vem::generate(f, 4);
    const auto sys = vem::assemble(mesh, pc.coeffs);
    const Eigen::VectorXd rhs = vem::apply_dirichlet_lift(sys, mesh, pc.u_exact);
    const auto sol = vem::solve_load(sys.load_matrix(), rhs);
    const Eigen::VectorXd u = vem::expand_solution(sys, mesh, sol.u, pc.u_exact);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      EXPECT_NEAR(u(static_cast<Eigen::Index>(v)), pc.u_exact(mesh.vertex(v)), 1e-10);
  }
}

TEST(Assembly, ZeroDirichletLeavesLoadUnchanged) {
  const auto mesh = vem::gen_square_th2(4);
  const auto pc = vem::load_test1();
  const auto sys = vem::assemble(mesh, pc.coeffs);
  EXPECT_EQ(vem::apply_dirichlet_lift(sys, mesh, [](Point2) { return 0.0; }), sys.F);
  EXPECT_EQ(vem::apply_dirichlet_lift(sys, mesh, {}), sys.F);
}

TEST(Assembly, ConstantSolutionFromLift) {
  vem::CoefficientSet c;
  c.kappa = [](Point2) { return 1.0; };
  c.gamma = [](Point2 p) { return 1.0 + p.x * p.y; };
  c.f = c.gamma;
  const auto mesh = vem::gen_square_th3(4);
  const auto sys = vem::assemble(mesh, c);
  const auto sol = vem::solve_load(sys.load_matrix(), vem::apply_dirichlet_lift(sys, mesh, [](Point2) { return 1.0; }));
  EXPECT_LE((sol.u - Eigen::VectorXd::Ones(sol.u.size())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Assembly, QuadraticFormEqualsSumOfLocalForms) {
  const auto mesh = vem::gen_square_th1(4);
  const auto pc = vem::load_test2();
  const auto full = vem::assemble_full(mesh, pc.coeffs);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Eigen::VectorXd x(static_cast<Eigen::Index>(mesh.num_vertices())), y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = n01(rng);
    y(i) = n01(rng);
  }
  double a = 0, b = 0, m = 0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto el = vem::local_forms(mesh.cell_polygon(c), pc.coeffs);
    const auto& cell = mesh.cell(c);
    Eigen::VectorXd xl(static_cast<Eigen::Index>(cell.size())), yl(xl.size());
    for (std::size_t i = 0; i < cell.size(); ++i) {
      xl(static_cast<Eigen::Index>(i)) = x(cell[i]);
      yl(static_cast<Eigen::Index>(i)) = y(cell[i]);
    }
    a += yl.dot(el.Ah * xl);
    b += yl.dot(el.Bh * xl);
    m += yl.dot(el.Mh * xl);
  }
  EXPECT_NEAR(y.dot(full.A * x), a, 1e-11 * std::abs(a));
  EXPECT_NEAR(y.dot(full.B * x), b, 1e-11 * std::max(1.0, std::abs(b)));
  EXPECT_NEAR(y.dot(full.M * x), m, 1e-11 * std::max(1.0, std::abs(m)));
}

TEST(Assembly, FullStiffnessAnnihilatesConstants) {
  for (auto f : {vem::MeshFamily::th2, vem::MeshFamily::th4, vem::MeshFamily::th7}) {
    const auto full = vem::assemble_full(vem::generate(f, 8), pure_diffusion());
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(full.A.rows());
    EXPECT_LE((full.A * one).cwiseAbs().maxCoeff(), 1e-12 * max_abs(full.A));
  }
}

TEST(Assembly, DeterministicAcrossWorkerCounts) {
  const auto mesh = vem::gen_square_th2(8);
  const auto pc = vem::load_test1();
  const auto one = vem::assemble_full(mesh, pc.coeffs, 1);
  const auto four = vem::assemble_full(mesh, pc.coeffs, 4);
  const auto again = vem::assemble_full(mesh, pc.coeffs, 4);
  for (const auto* pair : {&four, &again}) {
    EXPECT_EQ(max_abs(one.A - pair->A), 0.0);
    EXPECT_EQ(max_abs(one.B - pair->B), 0.0);
    EXPECT_EQ(max_abs(one.M - pair->M), 0.0);
    EXPECT_EQ(one.F, pair->F);
  }
}

TEST(Assembly, MatrixMarketRoundTrip) {
  const auto sys = vem::assemble(vem::gen_square_th2(4), vem::load_test1().coeffs);
  const auto path = std::filesystem::temp_directory_path() / "vem_test_matrix.mtx";
  const SparseMatrix K = sys.load_matrix();
  vem::write_matrix_market(path, K);
  const SparseMatrix r = vem::read_matrix_market(path);
  EXPECT_EQ(r.rows(), K.rows());
  EXPECT_EQ(max_abs(r - K), 0.0);
  std::filesystem::remove(path);
}

TEST(Assembly, SymmetryOfParts) {
  const auto sys = vem::assemble(vem::gen_square_th3(8), vem::load_test2().coeffs);
  for (const SparseMatrix* m : {&sys.A, &sys.C, &sys.M})
    EXPECT_LE(max_abs(*m - SparseMatrix(m->transpose())), 1e-14 * max_abs(*m));
  // Constant convection with zero boundary trace: B is skew on the interior block.
  vem::CoefficientSet c;
  c.theta = [](Point2) { return Point2{1.0, 0.5}; };
  const auto eig = vem::assemble(vem::gen_square_th2(4, {false, 0}), c);
  EXPECT_LE(max_abs(eig.B + SparseMatrix(eig.B.transpose())), 1e-14);
}

TEST(Assembly, BadCellIsReported) {
  vem::CoefficientSet c;
  c.kappa = [](Point2 p) { return p.x < 0.5 ? 1.0 : -1.0; };
  try {
    vem::assemble(vem::gen_square_th2(2), c);
    FAIL();
  } catch (const vem::AssemblyError& e) {
    EXPECT_NE(std::string(e.what()).find("cell "), std::string::npos);
  }
}
