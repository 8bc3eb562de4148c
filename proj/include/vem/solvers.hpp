#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "vem/assembly.hpp"
#include "vem/krylov_schur.hpp"

namespace vem {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseLUSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

inline double norm1(const SparseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

/// Lower-bound estimate of the 1-norm condition number from a few solves with
/// random sign vectors.
inline double condition_estimate(const SparseMatrix& K, SparseLUSolver& lu) {
  std::mt19937_64 rng(11);
  double inv = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd x(K.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = (rng() & 1U) ? 1.0 : -1.0;
    const Eigen::VectorXd y = lu.solve(x);
    inv = std::max(inv, y.lpNorm<1>() / x.lpNorm<1>());
  }
  return norm1(K) * inv;
}

struct LoadSolution {
  Eigen::VectorXd u;
  double relative_residual = 0.0;
};

/// Direct sparse LU solve of K u = F with a residual check.
inline LoadSolution solve_load(const SparseMatrix& K, const Eigen::VectorXd& F,
                               double tolerance = 1e-10) {
  if (K.rows() != K.cols() || K.rows() != F.size())
    throw SolverError("solve_load: dimension mismatch");
  LoadSolution sol;
  if (K.rows() == 0) return sol;
  SparseMatrix Kc = K;
  Kc.makeCompressed();
  SparseLUSolver lu;
  lu.compute(Kc);
  if (lu.info() != Eigen::Success)
    throw SolverError("load matrix factorization failed (" + lu.lastErrorMessage() +
                      "); the matrix is singular, condition estimate = inf. The mesh may be too "
                      "coarse for the convection term or the data are inconsistent");
  sol.u = lu.solve(F);
  const double fn = F.norm();
  const double rn = (Kc * sol.u - F).norm();
  sol.relative_residual = fn > 0 ? rn / fn : rn;
  if (!std::isfinite(sol.relative_residual) || sol.relative_residual > tolerance) {
    std::ostringstream msg;
    msg << "load solve residual " << sol.relative_residual << " exceeds " << tolerance
        << " (condition estimate " << condition_estimate(Kc, lu) << ")";
    throw SolverError(msg.str());
  }
  return sol;
}

inline LoadSolution solve_load(const GlobalSystem& sys) { return solve_load(sys.load_matrix(), sys.F); }

struct EigenResult {
  std::vector<std::complex<double>> eigenvalues;  ///< ascending real part
  Eigen::MatrixXcd eigenvectors;                  ///< one column per eigenvalue
  std::vector<double> residuals;                  ///< ||A x - lambda M x|| / ||x||
  std::size_t discarded_count = 0;                ///< near-infinite modes dropped
  double shift = 0.0;
  int restarts = 0;
};

struct EigOptions {
  Eigen::Index ncv = 0;
  double ritz_tolerance = 1e-12;
  double infinite_threshold = 1e-8;  ///< |nu| below this fraction of max |nu| means lambda = inf
  double residual_tolerance = 1e-8;  ///< relative to (||A||_1 + |lambda| ||M||_1)
  int max_restarts = 2000;
  int shift_retries = 5;
  std::uint64_t seed = 7;
};

/// Shift just below the first exact eigenvalue on the unit square, 1 elsewhere.
inline double default_shift(bool unit_square, Point2 theta = {1.0, 0.0}, double kappa = 1.0) {
  if (!unit_square) return 1.0;
  return 0.9 * (dot(theta, theta) / (4.0 * kappa) + 2.0 * kappa * std::numbers::pi * std::numbers::pi);
}

namespace detail {

inline Eigen::VectorXcd sparse_times(const SparseMatrix& A, const Eigen::VectorXcd& x) {
  const Eigen::VectorXd re = A * x.real();
  const Eigen::VectorXd im = A * x.imag();
  Eigen::VectorXcd y(re.size());
  y.real() = re;
  y.imag() = im;
  return y;
}

}  // namespace detail

/// k finite eigenvalues of A x = lambda M x closest to `shift`, by shift-invert
/// Krylov-Schur on (A - shift M)^{-1} M. M may be singular: its kernel maps to
/// zero Ritz values, which are discarded.
inline EigenResult solve_eigs(const SparseMatrix& A, const SparseMatrix& M, int k, double shift,
                              const EigOptions& opt = {}) {
  if (A.rows() != A.cols() || M.rows() != A.rows() || M.cols() != A.cols())
    throw SolverError("solve_eigs: dimension mismatch");
  if (k < 1) throw SolverError("solve_eigs: eigenvalue count must be >= 1");
  const Eigen::Index n = A.rows();
  if (n == 0) throw SolverError("solve_eigs: empty pencil");

  SparseLUSolver lu;
  double sigma = shift;
  for (int attempt = 0;; ++attempt) {
    SparseMatrix shifted = A - sigma * M;
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() == Eigen::Success) break;
    if (attempt >= opt.shift_retries)
      throw SolverError("factorization of A - sigma M failed for all shifts (last sigma = " +
                        std::to_string(sigma) + "): " + lu.lastErrorMessage());
    sigma = sigma * 1.1 + 1.0;
  }

  auto apply = [&](const auto& x) {
    const Eigen::VectorXd re = lu.solve(M * x.real());
    const Eigen::VectorXd im = lu.solve(M * x.imag());
    Eigen::VectorXcd y(n);
    y.real() = re;
    y.imag() = im;
    return y;
  };
  KrylovSchurOptions ks;
  ks.nev = std::min<Eigen::Index>(k, n);
  ks.ncv = opt.ncv;
  ks.tol = opt.ritz_tolerance;
  ks.max_restarts = opt.max_restarts;
  ks.seed = opt.seed;
  const KrylovSchurResult ritz = krylov_schur(apply, n, ks);

  EigenResult out;
  out.shift = sigma;
  out.restarts = ritz.restarts;
  double nu_max = 0.0;
  for (const auto& v : ritz.all_values) nu_max = std::max(nu_max, std::abs(v));
  const double cutoff = opt.infinite_threshold * nu_max;
  for (const auto& v : ritz.all_values)
    if (std::abs(v) < cutoff) ++out.discarded_count;

  struct Pair {
    std::complex<double> lambda;
    Eigen::VectorXcd x;
  };
  std::vector<Pair> pairs;
  for (Eigen::Index i = 0; i < ritz.values.size(); ++i) {
    if (std::abs(ritz.values(i)) < cutoff) continue;
    pairs.push_back({sigma + 1.0 / ritz.values(i), ritz.vectors.col(i)});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.lambda.real() < b.lambda.real();
  });

  const double a1 = norm1(A), m1 = norm1(M);
  out.eigenvectors.resize(n, static_cast<Eigen::Index>(pairs.size()));
  std::ostringstream failures;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [lambda, x] = pairs[i];
    const Eigen::VectorXcd r = detail::sparse_times(A, x) - lambda * detail::sparse_times(M, x);
    const double res = r.norm() / x.norm();
    out.eigenvalues.push_back(lambda);
    out.eigenvectors.col(static_cast<Eigen::Index>(i)) = x;
    out.residuals.push_back(res);
    if (!(res <= opt.residual_tolerance * (a1 + std::abs(lambda) * m1)))
      failures << " lambda=" << lambda << " residual=" << res << ';';
  }
  if (!ritz.converged || !failures.str().empty()) {
    std::ostringstream msg;
    msg << "shift-invert Arnoldi did not converge after " << ritz.restarts
        << " restarts; Ritz estimates:";
    for (Eigen::Index i = 0; i < ritz.estimates.size(); ++i) msg << ' ' << ritz.estimates(i);
    msg << failures.str();
    throw SolverError(msg.str());
  }
  return out;
}

/// Same contract on the transposed pencil; the spectrum is the complex conjugate
/// of the primal one.
inline EigenResult solve_adjoint_eigs(const SparseMatrix& A, const SparseMatrix& M, int k,
                                      double shift, const EigOptions& opt = {}) {
  const SparseMatrix At = A.transpose();
  const SparseMatrix Mt = M.transpose();
  return solve_eigs(At, Mt, k, shift, opt);
}

/// Dense QZ on the full pencil; returns the k finite eigenvalues of smallest real part.
inline std::vector<std::complex<double>> dense_qz_eigs(const SparseMatrix& A, const SparseMatrix& M,
                                                       int k) {
  const Eigen::MatrixXd Ad(A), Md(M);
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> qz(Ad, Md, false);
  if (qz.info() != Eigen::Success) throw SolverError("dense QZ failed");
  const Eigen::VectorXcd alpha = qz.alphas();
  const Eigen::VectorXd beta = qz.betas();
  std::vector<std::complex<double>> finite;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (std::abs(beta(i)) <= 1e-10 * std::abs(alpha(i))) continue;
    finite.push_back(alpha(i) / beta(i));
  }
  std::sort(finite.begin(), finite.end(),
            [](auto a, auto b) { return a.real() < b.real(); });
  if (static_cast<int>(finite.size()) > k) finite.resize(static_cast<std::size_t>(k));
  return finite;
}

}  // namespace vem
