#include <gtest/gtest.h>

#include <algorithm>
#include <complex>

#include <Eigen/IterativeLinearSolvers>

#include "vem/mesh_generators.hpp"
#include "vem/problems.hpp"
#include "vem/solvers.hpp"

using vem::Point2;
using vem::SparseMatrix;

namespace {

SparseMatrix diag(std::initializer_list<double> d) {
  SparseMatrix m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double v : d) {
    if (v != 0.0) m.insert(i, i) = v;
    ++i;
  }
  m.makeCompressed();
  return m;
}

struct Pencil {
  vem::PolyMesh mesh;
  vem::GlobalSystem sys;
};

Pencil square_pencil(int N, Point2 theta) {
  Pencil p{vem::gen_square_th2(N), {}};
  p.sys = vem::assemble(p.mesh, vem::eigen_case("eigen_square", theta).coeffs);
  return p;
}

// Weighted x-centroid of |x|^2 over the nodes.
double x_centroid(const vem::PolyMesh& mesh, const vem::GlobalSystem& sys, const Eigen::VectorXcd& x) {
  double num = 0, den = 0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const int i = sys.dof.interior[v];
    if (i < 0) continue;
    const double w = std::norm(x(i));
    num += w * mesh.vertex(v).x;
    den += w;
  }
  return num / den;
}

}  // namespace

TEST(LoadSolver, OneByOne) {
  const auto sol = vem::solve_load(diag({4.0}), Eigen::VectorXd::Constant(1, 2.0));
  EXPECT_DOUBLE_EQ(sol.u(0), 0.5);
}

TEST(LoadSolver, SingularMatrixThrows) {
  SparseMatrix K(2, 2);
  K.insert(0, 0) = 1;
  K.insert(0, 1) = 1;
  K.insert(1, 0) = 1;
  K.insert(1, 1) = 1;
  EXPECT_THROW(vem::solve_load(K, Eigen::VectorXd::Ones(2)), vem::SolverError);
  EXPECT_THROW(vem::solve_load(diag({1.0}), Eigen::VectorXd::Ones(2)), vem::SolverError);
}

TEST(LoadSolver, AgreesWithConjugateGradientOnSymmetricSystem) {
  const auto mesh = vem::gen_square_th2(8);
  vem::CoefficientSet c;
  c.gamma = [](Point2) { return 1.0; };
  c.f = [](Point2 p) { return p.x + p.y; };
  const auto sys = vem::assemble(mesh, c);
  const SparseMatrix K = sys.load_matrix();
  const auto lu = vem::solve_load(K, sys.F);
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(10000);
  cg.compute(K);
  const Eigen::VectorXd x = cg.solve(sys.F);
  EXPECT_LE((x - lu.u).norm(), 1e-9 * lu.u.norm());
  EXPECT_LE(lu.relative_residual, 1e-12);
}

TEST(EigenSolver, Diagonal) {
  const auto r = vem::solve_eigs(diag({1.0, 2.0, 3.0}), diag({1.0, 1.0, 1.0}), 2, 0.0);
  ASSERT_EQ(r.eigenvalues.size(), 2U);
  EXPECT_NEAR(r.eigenvalues[0].real(), 1.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[1].real(), 2.0, 1e-12);
  EXPECT_EQ(r.eigenvalues[0].imag(), 0.0);
}

TEST(EigenSolver, OneByOne) {
  const auto r = vem::solve_eigs(diag({5.0}), diag({2.0}), 1, 0.0);
  ASSERT_EQ(r.eigenvalues.size(), 1U);
  EXPECT_NEAR(r.eigenvalues[0].real(), 2.5, 1e-13);
}

TEST(EigenSolver, SingularMassDropsInfiniteMode) {
  const auto r = vem::solve_eigs(diag({1.0, 2.0}), diag({1.0, 0.0}), 2, 0.0);
  ASSERT_EQ(r.eigenvalues.size(), 1U);
  EXPECT_NEAR(r.eigenvalues[0].real(), 1.0, 1e-12);
  EXPECT_EQ(r.discarded_count, 1U);
}

TEST(EigenSolver, ShiftOnEigenvalueIsRetried) {
  const auto r = vem::solve_eigs(diag({1.0, 2.0, 3.0}), diag({1.0, 1.0, 1.0}), 1, 1.0);
  EXPECT_DOUBLE_EQ(r.shift, 2.1);
  EXPECT_NEAR(r.eigenvalues[0].real(), 2.0, 1e-12);
}

TEST(EigenSolver, AdjointSpectrumIsConjugate) {
  const auto p = square_pencil(16, {1.0, 0.0});
  const SparseMatrix K = p.sys.eigen_matrix();
  const double shift = vem::default_shift(true);
  const auto primal = vem::solve_eigs(K, p.sys.M, 6, shift);
  const auto dual = vem::solve_adjoint_eigs(K, p.sys.M, 6, shift);
  ASSERT_EQ(primal.eigenvalues.size(), dual.eigenvalues.size());
  for (std::size_t i = 0; i < primal.eigenvalues.size(); ++i) {
    const auto a = primal.eigenvalues[i], b = dual.eigenvalues[i];
    EXPECT_LE(std::abs(a - std::conj(b)), 1e-8 * std::abs(a));
  }
}

TEST(EigenSolver, SymmetricProblemHasSharedEigenvectors) {
  const auto p = square_pencil(8, {0.0, 0.0});
  const SparseMatrix K = p.sys.eigen_matrix();
  const auto primal = vem::solve_eigs(K, p.sys.M, 1, 15.0);
  const auto dual = vem::solve_adjoint_eigs(K, p.sys.M, 1, 15.0);
  const Eigen::VectorXcd a = primal.eigenvectors.col(0).normalized();
  const Eigen::VectorXcd b = dual.eigenvectors.col(0).normalized();
  EXPECT_NEAR(std::abs(a.dot(b)), 1.0, 1e-10);
}

TEST(EigenSolver, ConvectionTiltsPrimalAndAdjointModesOppositely) {
  const auto p = square_pencil(16, {4.0, 0.0});
  const SparseMatrix K = p.sys.eigen_matrix();
  const double shift = vem::default_shift(true, {4.0, 0.0});
  const auto primal = vem::solve_eigs(K, p.sys.M, 1, shift);
  const auto dual = vem::solve_adjoint_eigs(K, p.sys.M, 1, shift);
  EXPECT_GT(x_centroid(p.mesh, p.sys, primal.eigenvectors.col(0)), 0.5);
  EXPECT_LT(x_centroid(p.mesh, p.sys, dual.eigenvectors.col(0)), 0.5);
}

TEST(EigenSolver, ResidualsAreSmall) {
  const auto p = square_pencil(16, {1.0, 0.0});
  const SparseMatrix K = p.sys.eigen_matrix();
  const auto r = vem::solve_eigs(K, p.sys.M, 6, vem::default_shift(true));
  const double scale = vem::norm1(K);
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    const Eigen::VectorXcd x = r.eigenvectors.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXcd res = K.cast<std::complex<double>>() * x -
                                 r.eigenvalues[i] * (p.sys.M.cast<std::complex<double>>() * x);
    EXPECT_LE(res.norm() / x.norm(), 1e-8 * (scale + std::abs(r.eigenvalues[i]) * vem::norm1(p.sys.M)));
    EXPECT_NEAR(res.norm() / x.norm(), r.residuals[i], 1e-12 * scale);
  }
}

TEST(EigenSolver, MatchesDenseQz) {
  const auto p = square_pencil(4, {1.0, 0.0});
  const SparseMatrix K = p.sys.eigen_matrix();
  const auto ks = vem::solve_eigs(K, p.sys.M, 4, vem::default_shift(true));
  const auto qz = vem::dense_qz_eigs(K, p.sys.M, 4);
  ASSERT_EQ(ks.eigenvalues.size(), qz.size());
  for (std::size_t i = 0; i < qz.size(); ++i)
    EXPECT_LE(std::abs(ks.eigenvalues[i] - qz[i]), 1e-9 * std::abs(qz[i]));
}

TEST(EigenSolver, RejectsBadArguments) {
  EXPECT_THROW(vem::solve_eigs(diag({1.0}), diag({1.0}), 0, 0.0), vem::SolverError);
  EXPECT_THROW(vem::solve_eigs(diag({1.0, 2.0}), diag({1.0}), 1, 0.0), vem::SolverError);
}

TEST(EigenSolver, DefaultShift) {
  EXPECT_NEAR(vem::default_shift(true), 0.9 * (0.25 + 2 * std::numbers::pi * std::numbers::pi), 1e-14);
  EXPECT_EQ(vem::default_shift(false), 1.0);
}
