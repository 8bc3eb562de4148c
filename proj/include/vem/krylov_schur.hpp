#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vem {

using cplx = std::complex<double>;

namespace detail {

/// Plane rotation (c real, s complex) with c*f + s*g = r and -conj(s)*f + c*g = 0.
inline void givens(cplx f, cplx g, double& c, cplx& s) {
  if (g == cplx{}) {
    c = 1.0;
    s = {};
    return;
  }
  if (f == cplx{}) {
    c = 0.0;
    s = std::conj(g) / std::abs(g);
    return;
  }
  const double af = std::abs(f);
  const double d = std::hypot(af, std::abs(g));
  c = af / d;
  s = (f / af) * std::conj(g) / d;
}

/// x <- c x + s y, y <- c y - conj(s) x.
template <typename X, typename Y>
void rotate(X&& x, Y&& y, double c, cplx s) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cplx xi = x(i), yi = y(i);
    x(i) = c * xi + s * yi;
    y(i) = c * yi - std::conj(s) * xi;
  }
}

/// Swaps diagonal entries k and k+1 of the upper triangular T, updating the
/// Schur vectors Q so that Q T Q^* is preserved.
inline void swap_schur(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q, Eigen::Index k) {
  const Eigen::Index n = T.rows();
  const cplx t11 = T(k, k), t22 = T(k + 1, k + 1);
  double c = 0;
  cplx s;
  givens(T(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n) rotate(T.row(k).tail(n - k - 2), T.row(k + 1).tail(n - k - 2), c, s);
  if (k > 0) rotate(T.col(k).head(k), T.col(k + 1).head(k), c, std::conj(s));
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  rotate(Q.col(k), Q.col(k + 1), c, std::conj(s));
}

/// Reorders a complex Schur form so that diagonal magnitudes are non-increasing.
inline void sort_schur_by_magnitude(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q) {
  const Eigen::Index n = T.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = i;
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(T(j, j)) > std::abs(T(best, best))) best = j;
    for (Eigen::Index j = best; j > i; --j) swap_schur(T, Q, j - 1);
  }
}

/// Eigenvector of the upper triangular T for diagonal entry i (zero below i).
inline Eigen::VectorXcd triangular_eigenvector(const Eigen::MatrixXcd& T, Eigen::Index i) {
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(T.rows());
  s(i) = 1.0;
  const cplx lambda = T(i, i);
  const double small = std::numeric_limits<double>::epsilon() * std::max(1.0, T.norm());
  for (Eigen::Index r = i - 1; r >= 0; --r) {
    cplx acc = 0.0;
    for (Eigen::Index c = r + 1; c <= i; ++c) acc += T(r, c) * s(c);
    cplx d = T(r, r) - lambda;
    if (std::abs(d) < small) d = small;
    s(r) = -acc / d;
  }
  return s / s.norm();
}

}  // namespace detail

struct KrylovSchurOptions {
  Eigen::Index nev = 6;        ///< wanted eigenvalues (largest magnitude)
  Eigen::Index ncv = 0;        ///< subspace size; 0 selects max(2 nev + 10, 30)
  double tol = 1e-12;          ///< relative Ritz residual tolerance
  int max_restarts = 1000;
  std::uint64_t seed = 7;
};

struct KrylovSchurResult {
  Eigen::VectorXcd values;      ///< wanted Ritz values, by decreasing magnitude
  Eigen::MatrixXcd vectors;     ///< unit Ritz vectors
  Eigen::VectorXd estimates;    ///< Ritz residual estimates
  Eigen::VectorXcd all_values;  ///< every Ritz value of the final subspace
  int restarts = 0;
  bool converged = false;
};

/// Krylov-Schur iteration for the largest-magnitude eigenvalues of a linear
/// operator given as `apply(x) -> y`, in complex arithmetic.
template <typename Apply>
KrylovSchurResult krylov_schur(Apply&& apply, Eigen::Index n, const KrylovSchurOptions& opt) {
  if (n <= 0) throw std::invalid_argument("krylov_schur: empty operator");
  const Eigen::Index nev = std::min(opt.nev, n);
  Eigen::Index m = opt.ncv > 0 ? opt.ncv : std::max<Eigen::Index>(2 * nev + 10, 30);
  m = std::min(m, n);
  if (m <= nev && m < n) m = std::min(n, nev + 1);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_vector = [&] {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = unif(rng);
    return v;
  };

  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  V.col(0) = random_vector().normalized();

  KrylovSchurResult result;
  Eigen::Index start = 0;
  for (int restart = 0;; ++restart) {
    for (Eigen::Index j = start; j < m; ++j) {
      Eigen::VectorXcd w = apply(V.col(j));
      const auto basis = V.leftCols(j + 1);
      Eigen::VectorXcd h = basis.adjoint() * w;
      w -= basis * h;
      const Eigen::VectorXcd h2 = basis.adjoint() * w;  // second Gram-Schmidt pass
      w -= basis * h2;
      h += h2;
      H.col(j).head(j + 1) = h;
      const double beta = w.norm();
      if (beta > 1e-13 * std::max(h.norm(), 1e-300)) {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
        continue;
      }
      // Invariant subspace found.
      H(j + 1, j) = 0.0;
      if (j + 1 >= n) {
        V.col(j + 1).setZero();
        continue;
      }
      Eigen::VectorXcd r = random_vector();
      for (int pass = 0; pass < 2; ++pass) r -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * r);
      V.col(j + 1) = r.normalized();
    }

    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(H.topRows(m));
    Eigen::MatrixXcd T = schur.matrixT();
    Eigen::MatrixXcd U = schur.matrixU();
    detail::sort_schur_by_magnitude(T, U);
    const Eigen::RowVectorXcd b = H.row(m) * U;

    const double vmax = std::abs(T(0, 0));
    const double floor = std::pow(std::numeric_limits<double>::epsilon(), 2.0 / 3.0) * vmax;
    Eigen::MatrixXcd S(m, nev);
    result.estimates.resize(nev);
    Eigen::Index n_conv = 0;
    for (Eigen::Index i = 0; i < nev; ++i) {
      S.col(i) = detail::triangular_eigenvector(T, i);
      result.estimates(i) = std::abs((b * S.col(i))(0));
      if (result.estimates(i) <= opt.tol * std::max(std::abs(T(i, i)), floor)) ++n_conv;
    }
    result.restarts = restart;
    if (n_conv == nev || restart >= opt.max_restarts) {
      result.converged = n_conv == nev;
      result.values = T.diagonal().head(nev);
      result.all_values = T.diagonal();
      result.vectors = V.leftCols(m) * (U * S);
      for (Eigen::Index i = 0; i < nev; ++i) result.vectors.col(i).normalize();
      return result;
    }

    // Keep the leading Schur vectors; the remaining basis vector carries over.
    const Eigen::Index p = std::min(m - 1, nev + (m - nev) / 2);
    const Eigen::MatrixXcd kept = V.leftCols(m) * U.leftCols(p);
    V.leftCols(p) = kept;
    V.col(p) = V.col(m);
    H.setZero();
    H.topLeftCorner(p, p) = T.topLeftCorner(p, p);
    H.row(p).head(p) = b.head(p);
    start = p;
  }
}

}  // namespace vem
