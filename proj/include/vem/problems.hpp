#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vem/analysis.hpp"
#include "vem/vem_core.hpp"

namespace vem {

/// Coefficients together with an optional exact solution (for error norms and
/// Dirichlet data).
struct ProblemCase {
  std::string name;
  CoefficientSet coeffs;
  ScalarField u_exact;     ///< also the Dirichlet data when set
  VectorField grad_exact;
};

/// Load test with u = sin(pi x) sin(pi y), kappa = gamma = 1, theta = (x, y).
inline ProblemCase load_test1() {
  using std::numbers::pi;
  ProblemCase pc;
  pc.name = "test1";
  pc.u_exact = [](Point2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
  pc.grad_exact = [](Point2 p) {
    return Point2{pi * std::cos(pi * p.x) * std::sin(pi * p.y),
                  pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
  };
  pc.coeffs.kappa = [](Point2) { return 1.0; };
  pc.coeffs.theta = [](Point2 p) { return p; };
  pc.coeffs.gamma = [](Point2) { return 1.0; };
  pc.coeffs.f = [u = pc.u_exact, g = pc.grad_exact](Point2 p) {
    const Point2 du = g(p);
    return 2 * pi * pi * u(p) + p.x * du.x + p.y * du.y + u(p);
  };
  return pc;
}

/// Load test with smooth reaction gamma = x^2 + y^3 and
/// u = (x - x^2)(y - y^2) + sin(2 pi x) sin(2 pi y).
inline ProblemCase load_test2() {
  using std::numbers::pi;
  ProblemCase pc;
  pc.name = "test2";
  pc.u_exact = [](Point2 p) {
    return (p.x - p.x * p.x) * (p.y - p.y * p.y) + std::sin(2 * pi * p.x) * std::sin(2 * pi * p.y);
  };
  pc.grad_exact = [](Point2 p) {
    return Point2{(1 - 2 * p.x) * (p.y - p.y * p.y) + 2 * pi * std::cos(2 * pi * p.x) * std::sin(2 * pi * p.y),
                  (p.x - p.x * p.x) * (1 - 2 * p.y) + 2 * pi * std::sin(2 * pi * p.x) * std::cos(2 * pi * p.y)};
  };
  pc.coeffs.kappa = [](Point2) { return 1.0; };
  pc.coeffs.theta = [](Point2 p) { return p; };
  pc.coeffs.gamma = [](Point2 p) { return p.x * p.x + p.y * p.y * p.y; };
  pc.coeffs.f = [u = pc.u_exact, g = pc.grad_exact](Point2 p) {
    const double lap = -2 * (p.y - p.y * p.y) - 2 * (p.x - p.x * p.x) -
                       8 * pi * pi * std::sin(2 * pi * p.x) * std::sin(2 * pi * p.y);
    const Point2 du = g(p);
    return -lap + p.x * du.x + p.y * du.y + (p.x * p.x + p.y * p.y * p.y) * u(p);
  };
  return pc;
}

/// Global linear u = 1 + 2x + 3y with kappa = gamma = 1, theta = (x, y):
/// the discrete solution must reproduce it exactly.
inline ProblemCase patch_test() {
  ProblemCase pc;
  pc.name = "patch";
  pc.u_exact = [](Point2 p) { return 1 + 2 * p.x + 3 * p.y; };
  pc.grad_exact = [](Point2) { return Point2{2, 3}; };
  pc.coeffs.kappa = [](Point2) { return 1.0; };
  pc.coeffs.theta = [](Point2 p) { return p; };
  pc.coeffs.gamma = [](Point2) { return 1.0; };
  pc.coeffs.f = [](Point2 p) { return 2 * p.x + 3 * p.y + (1 + 2 * p.x + 3 * p.y); };
  return pc;
}

/// Convection-diffusion eigenproblem data (no reaction), constant theta and kappa.
inline ProblemCase eigen_case(std::string name, Point2 theta = {1.0, 0.0}, double kappa = 1.0) {
  ProblemCase pc;
  pc.name = std::move(name);
  pc.coeffs.kappa = [kappa](Point2) { return kappa; };
  pc.coeffs.theta = [theta](Point2) { return theta; };
  return pc;
}

/// Exact eigenfunction (primal or adjoint) of the square problem:
/// exp(+-theta.x / (2 kappa)) sin(p pi x) sin(q pi y).
inline ScalarField square_eigenfunction(int p, int q, Point2 theta, double kappa, bool adjoint) {
  const double sgn = adjoint ? -1.0 : 1.0;
  return [=](Point2 x) {
    using std::numbers::pi;
    return std::exp(sgn * dot(theta, x) / (2 * kappa)) * std::sin(p * pi * x.x) * std::sin(q * pi * x.y);
  };
}

inline ProblemCase named_case(std::string_view name) {
  if (name == "test1") return load_test1();
  if (name == "test2") return load_test2();
  if (name == "patch") return patch_test();
  if (name == "eigen_square" || name == "eigen_T") return eigen_case(std::string(name));
  throw std::invalid_argument("unknown coefficient case '" + std::string(name) +
                              "' (expected test1, test2, patch, eigen_square, eigen_T)");
}

}  // namespace vem
