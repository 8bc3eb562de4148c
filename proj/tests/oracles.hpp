#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's quadrature or projector code.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vem/geometry.hpp"

namespace oracle {

struct GaussLegendre {
  std::vector<double> x, w;  // on [0, 1]
};

inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre g;
  for (int i = 1; i <= n; ++i) {
    double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.x.push_back(0.5 * (1 - z));
    g.w.push_back(1.0 / ((1 - z * z) * dp * dp));
  }
  return g;
}

/// Collapsed-coordinate tensor Gauss rule on a triangle; exact well beyond
/// the degrees used in the tests.
inline double integrate_triangle(vem::Point2 a, vem::Point2 b, vem::Point2 c,
                                 const std::function<double(vem::Point2)>& f, int n = 16) {
  static const GaussLegendre g = gauss_legendre(16);
  const GaussLegendre& q = n == 16 ? g : gauss_legendre(n);
  const double jac = std::abs(vem::orient(a, b, c));
  double sum = 0;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    for (std::size_t j = 0; j < q.x.size(); ++j) {
      const double u = q.x[i], v = (1 - u) * q.x[j];
      const vem::Point2 p = a + u * (b - a) + v * (c - a);
      sum += q.w[i] * q.w[j] * (1 - u) * f(p);
    }
  return sum * jac;
}

/// Fan from the first vertex; valid for convex polygons (collinear vertices allowed).
inline double integrate_convex(std::span<const vem::Point2> pts, const std::function<double(vem::Point2)>& f) {
  double sum = 0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) sum += integrate_triangle(pts[0], pts[i], pts[i + 1], f);
  return sum;
}

inline double shoelace(std::span<const vem::Point2> pts) {
  double s = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % pts.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

/// Classical P1 finite element stiffness of a triangle.
inline Eigen::Matrix3d p1_stiffness(const std::array<vem::Point2, 3>& t) {
  const double area = 0.5 * vem::orient(t[0], t[1], t[2]);
  Eigen::Matrix<double, 3, 2> grads;
  for (int i = 0; i < 3; ++i) {
    const vem::Point2 p = t[static_cast<std::size_t>((i + 1) % 3)];
    const vem::Point2 q = t[static_cast<std::size_t>((i + 2) % 3)];
    grads(i, 0) = (p.y - q.y) / (2 * area);
    grads(i, 1) = (q.x - p.x) / (2 * area);
  }
  return area * grads * grads.transpose();
}

}  // namespace oracle
