#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/geometry.hpp"

namespace vem {

class ElementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem data for -div(kappa grad u) + theta.grad u + gamma u = f.
/// kappa is treated as piecewise constant (sampled at the cell centroid);
/// empty theta/gamma/f mean zero.
struct CoefficientSet {
  std::function<double(Point2)> kappa = [](Point2) { return 1.0; };
  std::function<Point2(Point2)> theta;
  std::function<double(Point2)> gamma;
  std::function<double(Point2)> f;
};

/// Scaled monomials {1, (x - xE)/hE, (y - yE)/hE} of an element.
struct ScaledMonomials {
  Point2 center;
  double h = 1.0;

  [[nodiscard]] Eigen::Vector3d operator()(Point2 p) const {
    return {1.0, (p.x - center.x) / h, (p.y - center.y) / h};
  }
  /// Coefficients of the affine function a + b.x + c.y in this basis.
  [[nodiscard]] Eigen::Vector3d coefficients(double a, double bx, double by) const {
    return {a + bx * center.x + by * center.y, bx * h, by * h};
  }
};

/// Pieces of the elliptic projector system G * PiNabla = B.
struct ProjectorSystem {
  ScaledMonomials basis;
  double area = 0.0;
  Eigen::Matrix3d G;
  Eigen::MatrixXd B;  // 3 x n
  Eigen::MatrixXd D;  // n x 3, monomials evaluated at the vertices
};

inline ProjectorSystem projector_system(const Polygon& E) {
  const auto [area, centroid] = area_centroid(E);
  const std::size_t n = E.size();
  ProjectorSystem sys;
  sys.basis = {centroid, E.diameter()};
  sys.area = area;
  const double h = sys.basis.h;
  const double perimeter = E.perimeter();

  sys.D.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) sys.D.row(static_cast<Eigen::Index>(i)) = sys.basis(E[i]).transpose();

  // Row 0: boundary average (trapezoid rule is exact for the piecewise linear trace).
  // Rows 1-2: int_E grad(phi_i).grad(m) = sum_e (grad m . n_e) int_e phi_i.
  sys.B = Eigen::MatrixXd::Zero(3, static_cast<Eigen::Index>(n));
  sys.G = Eigen::Matrix3d::Zero();
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t a = e, b = (e + 1) % n;
    const double len = E.edge_length(e);
    const Point2 nrm = E.edge_normal(e);
    for (std::size_t v : {a, b}) {
      const auto col = static_cast<Eigen::Index>(v);
      sys.B(0, col) += 0.5 * len / perimeter;
      sys.B(1, col) += 0.5 * len * nrm.x / h;
      sys.B(2, col) += 0.5 * len * nrm.y / h;
    }
    const Eigen::Vector3d mid = sys.basis(0.5 * (E[a] + E[b]));
    sys.G.row(0) += (len / perimeter) * mid.transpose();
  }
  sys.G(1, 1) = area / (h * h);
  sys.G(2, 2) = area / (h * h);
  return sys;
}

/// Elliptic projector: maps vertex values to P1 coefficients in the scaled
/// monomial basis. The constant part matches the boundary average.
inline Eigen::MatrixXd pi_nabla(const Polygon& E) {
  const ProjectorSystem sys = projector_system(E);
  return sys.G.partialPivLu().solve(sys.B);
}

/// Tangential-derivative boundary stabilization h_E * int_{dE} d_s w d_s v,
/// i.e. h_E times the weighted cycle Laplacian with weights 1/|e|.
inline Eigen::MatrixXd stab_matrix(const Polygon& E) {
  const auto n = static_cast<Eigen::Index>(E.size());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  const double hE = E.diameter();
  for (Eigen::Index e = 0; e < n; ++e) {
    const double len = E.edge_length(static_cast<std::size_t>(e));
    if (!(len > 0.0)) throw ElementError("zero-length edge " + std::to_string(e));
    const Eigen::Index a = e, b = (e + 1) % n;
    const double w = hE / len;
    S(a, a) += w;
    S(b, b) += w;
    S(a, b) -= w;
    S(b, a) -= w;
  }
  return S;
}

/// Local matrices of one element. Row index = test function, column = trial.
struct LocalElement {
  std::size_t n_dof = 0;
  double h_E = 0.0;
  double area = 0.0;
  Point2 centroid;
  double kappa = 1.0;
  Eigen::MatrixXd PiNabla;     // 3 x n
  Eigen::MatrixXd PiNablaDof;  // n x n
  Eigen::MatrixXd S;
  Eigen::MatrixXd Ah, Bh, Ch, Mh;
  Eigen::VectorXd Fh;
};

inline LocalElement local_forms(const Polygon& E, const CoefficientSet& coeffs,
                                int quad_degree = 4) {
  const ProjectorSystem sys = projector_system(E);
  const auto n = static_cast<Eigen::Index>(E.size());

  LocalElement el;
  el.n_dof = E.size();
  el.h_E = sys.basis.h;
  el.area = sys.area;
  el.centroid = sys.basis.center;
  el.kappa = coeffs.kappa(el.centroid);
  if (!(el.kappa > 0.0))
    throw ElementError("diffusion coefficient must be positive, got " + std::to_string(el.kappa));

  el.PiNabla = sys.G.partialPivLu().solve(sys.B);
  el.PiNablaDof = sys.D * el.PiNabla;
  el.S = stab_matrix(E);

  const double h = el.h_E;
  Eigen::Matrix3d grad_gram = Eigen::Matrix3d::Zero();
  grad_gram(1, 1) = grad_gram(2, 2) = el.area / (h * h);
  const Eigen::MatrixXd I_minus_Pi = Eigen::MatrixXd::Identity(n, n) - el.PiNablaDof;
  el.Ah = el.kappa * el.PiNabla.transpose() * grad_gram * el.PiNabla +
          I_minus_Pi.transpose() * el.S * I_minus_Pi;

  // Monomial moments: conv(a,b) = int m_a (theta . grad m_b), etc.
  Eigen::Matrix3d conv = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d react = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
  Eigen::Vector3d load = Eigen::Vector3d::Zero();
  const auto tris = triangulate(E);
  for_each_quadrature_point(std::span<const Triangle>(tris), quad_degree, [&](Point2 p, double w) {
    const Eigen::Vector3d m = sys.basis(p);
    const Eigen::Matrix3d mm = m * m.transpose();
    mass += w * mm;
    if (coeffs.gamma) react += (w * coeffs.gamma(p)) * mm;
    if (coeffs.theta) {
      const Point2 t = coeffs.theta(p);
      const Eigen::Vector3d dir{0.0, t.x / h, t.y / h};  // theta . grad m_b
      conv += w * m * dir.transpose();
    }
    if (coeffs.f) load += (w * coeffs.f(p)) * m;
  });
  const Eigen::MatrixXd& P = el.PiNabla;
  el.Mh = P.transpose() * mass * P;
  el.Ch = P.transpose() * react * P;
  el.Bh = P.transpose() * conv * P;
  el.Fh = P.transpose() * load;
  return el;
}

}  // namespace vem
