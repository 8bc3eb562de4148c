#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "vem/analysis.hpp"
#include "vem/mesh_generators.hpp"

using vem::Point2;

namespace {

Eigen::VectorXd interpolate(const vem::PolyMesh& m, const vem::ScalarField& u) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t i = 0; i < m.num_vertices(); ++i) v(static_cast<Eigen::Index>(i)) = u(m.vertex(i));
  return v;
}

std::vector<double> inverse(std::initializer_list<int> Ns) {
  std::vector<double> h;
  for (int N : Ns) h.push_back(1.0 / N);
  return h;
}

}  // namespace

TEST(ErrorNorms, AffineFunctionsHaveZeroError) {
  const auto m = vem::gen_square_th1(4);
  auto u = [](Point2 p) { return 1 - p.x + 4 * p.y; };
  const Eigen::VectorXd uh = interpolate(m, u);
  EXPECT_LE(vem::error_l2(m, uh, u), 1e-13);
  EXPECT_LE(vem::error_h1_semi(m, uh, [](Point2) { return Point2{-1, 4}; }), 1e-12);
  EXPECT_LE(vem::triple_seminorm_interp(m, uh, u, {}), 1e-13);
}

TEST(ErrorNorms, ZeroDiscreteSolutionGivesNormOfExact) {
  const auto m = vem::gen_square_th2(8);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_vertices()));
  // ||xy||_L2 = 1/3 and |xy|_H1 = sqrt(2/3) on the unit square.
  EXPECT_NEAR(vem::error_l2(m, zero, [](Point2 p) { return p.x * p.y; }), 1.0 / 3, 1e-13);
  EXPECT_NEAR(vem::error_h1_semi(m, zero, [](Point2 p) { return Point2{p.y, p.x}; }), std::sqrt(2.0 / 3), 1e-13);
}

TEST(ErrorNorms, TriangleInequality) {
  const auto m = vem::gen_square_th3(8);
  auto u = [](Point2 p) { return std::sin(3 * p.x) * std::cos(2 * p.y); };
  const Eigen::VectorXd a = interpolate(m, [](Point2 p) { return p.x * p.x; });
  const Eigen::VectorXd b = interpolate(m, [](Point2 p) { return p.y * p.y * p.y; });
  auto zero = [](Point2) { return 0.0; };
  const double lhs = vem::error_l2(m, a + b, u);
  const double rhs = vem::error_l2(m, a, u) + vem::error_l2(m, -b, zero);
  EXPECT_LE(lhs, rhs + 1e-14);
}

TEST(FitRate, SyntheticPowerLaws) {
  const std::vector<double> h{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  EXPECT_NEAR(vem::fit_rate(h, e), 2.0, 1e-13);
  e.clear();
  for (double x : h) e.push_back(0.1 * std::pow(x, 1.5));
  EXPECT_NEAR(vem::fit_rate(h, e), 1.5, 1e-13);
  EXPECT_THROW(vem::fit_rate(std::vector<double>{1, 0.5}, std::vector<double>{1, 0.5}), vem::AnalysisError);
  EXPECT_THROW(vem::fit_rate(h, std::vector<double>{1, 0, 1, 1}), vem::AnalysisError);
}

TEST(FitRate, KnownSquareSequence) {
  // First eigenvalue on the split-edge triangle family, unit square, theta = (1, 0).
  const std::vector<double> lam{20.8967, 20.2310, 20.0531, 20.0057};
  std::vector<double> err;
  for (double l : lam) err.push_back(l - 19.9892);
  EXPECT_NEAR(vem::fit_rate(inverse({8, 16, 32, 64}), err), 1.93, 0.01);
}

TEST(Extrapolate, RecoversPlantedModel) {
  const std::vector<double> h{0.2, 0.1, 0.05, 0.025, 0.0125};
  for (double t : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    std::vector<double> v;
    for (double x : h) v.push_back(7.0 + 2.0 * std::pow(x, t));
    const auto ex = vem::extrapolate(h, v);
    ASSERT_TRUE(ex.converged) << t;
    EXPECT_NEAR(ex.limit, 7.0, 1e-8) << t;
    EXPECT_NEAR(ex.order, t, 1e-6) << t;
  }
}

TEST(Extrapolate, NoisyDataStaysClose) {
  const std::vector<double> h{0.2, 0.1, 0.05, 0.025};
  const double noise[] = {1e-6, -1e-6, 1e-6, -1e-6};
  std::vector<double> v;
  for (std::size_t i = 0; i < h.size(); ++i) v.push_back(1.0 - 3.0 * h[i] * h[i] + noise[i]);
  const auto ex = vem::extrapolate(h, v);
  EXPECT_TRUE(ex.converged);
  EXPECT_NEAR(ex.limit, 1.0, 1e-4);
  EXPECT_NEAR(ex.order, 2.0, 0.05);
}

TEST(Extrapolate, KnownRotatedTSequence) {
  const std::vector<double> lam{35.8647, 34.9179, 34.5028, 34.3804};
  const auto ex = vem::extrapolate(inverse({16, 30, 62, 130}), lam);
  ASSERT_TRUE(ex.converged);
  EXPECT_NEAR(ex.limit, 34.3074, 5e-3);
  EXPECT_NEAR(ex.order, 1.50, 0.02);
}

TEST(Extrapolate, BadInput) {
  EXPECT_THROW(vem::extrapolate(std::vector<double>{1, 0.5}, std::vector<double>{1, 2}), vem::AnalysisError);
  EXPECT_THROW(vem::extrapolate(std::vector<double>{1, 0, 0.5}, std::vector<double>{1, 2, 3}), vem::AnalysisError);
}

TEST(ExactEigenvalues, UnitSquareWithUnitConvection) {
  const auto ev = vem::exact_square_eigenvalues({1.0, 0.0}, 1.0, 6);
  const double reference[] = {19.9892, 49.5980, 49.5980, 79.2068, 98.9460, 98.9460};
  ASSERT_EQ(ev.size(), 6U);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(ev[i], reference[i], 5e-5);
  EXPECT_DOUBLE_EQ(ev[0], 0.25 + 2 * std::numbers::pi * std::numbers::pi);
}

TEST(MatchEigs, GreedyNearest) {
  const std::vector<std::complex<double>> computed{{5.1, 0}, {1.0, 1e-3}, {2.05, 0}};
  const std::vector<double> ref{1.0, 2.0, 5.0, 9.0};
  const auto m = vem::match_eigs(computed, ref);
  ASSERT_EQ(m.pairs.size(), 3U);
  EXPECT_EQ(m.pairs[0].computed_index, 1U);
  EXPECT_TRUE(m.pairs[0].imaginary_flag);
  EXPECT_EQ(m.pairs[1].computed_index, 2U);
  EXPECT_NEAR(m.pairs[1].relative_error, 0.025, 1e-12);
  EXPECT_EQ(m.pairs[2].computed_index, 0U);
  EXPECT_EQ(m.unmatched_reference, 1U);
  EXPECT_EQ(m.unmatched_computed, 0U);
}

TEST(ConvergenceRecord, CsvLayout) {
  vem::ConvergenceRecord rec({"L2"});
  rec.add({8, 0.125, 49, {{"L2", 0.04}}});
  rec.add({16, 0.0625, 225, {{"L2", 0.01}}});
  rec.add({32, 0.03125, 961, {{"L2", 0.0025}}});
  rec.fit_error_order("L2");
  EXPECT_NEAR(*rec.order("L2"), 2.0, 1e-12);
  std::ostringstream os;
  const std::vector<std::string> comments{"hello"};
  rec.write_csv(os, comments);
  EXPECT_EQ(os.str(),
            "# hello\nN,h,dofs,L2\n8,0.125,49,0.04\n16,0.0625,225,0.01\n32,0.03125,961,0.0025\n"
            "order,,,2\nextrap,,,\n");
}

TEST(ConvergenceRecord, RequiresDecreasingH) {
  vem::ConvergenceRecord rec({"x"});
  rec.add({8, 0.1, 1, {{"x", 1}}});
  EXPECT_THROW(rec.add({16, 0.1, 1, {{"x", 1}}}), vem::AnalysisError);
}

TEST(ConvergenceRecord, FitAbscissaOverride) {
  vem::ConvergenceRecord rec({"lambda1"});
  const double jitter[] = {1.02, 0.99, 1.01};
  int k = 0;
  for (int N : {8, 16, 32}) {
    vem::ConvergenceRecord::Entry e{N, jitter[k++] * std::sqrt(2.0) / N, 0, {{"lambda1", 3.0 + 1.0 / (N * N)}}};
    e.fit_h = 1.0 / N;
    rec.add(e);
  }
  rec.fit_against("lambda1", 3.0);
  EXPECT_NEAR(*rec.order("lambda1"), 2.0, 1e-12);
}
