#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/mesh.hpp"
#include "vem/vem_core.hpp"

namespace vem {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarField = std::function<double(Point2)>;
using VectorField = std::function<Point2(Point2)>;

namespace detail {

inline Eigen::VectorXd cell_values(const PolyMesh& mesh, std::size_t c, const Eigen::VectorXd& u) {
  const auto& cell = mesh.cell(c);
  Eigen::VectorXd local(static_cast<Eigen::Index>(cell.size()));
  for (std::size_t i = 0; i < cell.size(); ++i)
    local(static_cast<Eigen::Index>(i)) = u(cell[i]);
  return local;
}

template <typename CellTerm>
double sum_over_cells(const PolyMesh& mesh, CellTerm&& term) {
  // Fixed cell order keeps the reduction reproducible.
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) total += term(c);
  return total;
}

}  // namespace detail

/// sqrt(sum_E int_E (u - Pi u_h)^2), with u_h the full nodal vector.
inline double error_l2(const PolyMesh& mesh, const Eigen::VectorXd& u_h, const ScalarField& u_exact,
                       int degree = 6) {
  const double sq = detail::sum_over_cells(mesh, [&](std::size_t c) {
    const Polygon E = mesh.cell_polygon(c);
    const ProjectorSystem sys = projector_system(E);
    const Eigen::Vector3d coef = sys.G.partialPivLu().solve(sys.B * detail::cell_values(mesh, c, u_h));
    const auto tris = triangulate(E);
    double s = 0.0;
    for_each_quadrature_point(std::span<const Triangle>(tris), degree, [&](Point2 p, double w) {
      const double e = u_exact(p) - coef.dot(sys.basis(p));
      s += w * e * e;
    });
    return s;
  });
  return std::sqrt(sq);
}

/// sqrt(sum_E int_E |grad u - grad Pi u_h|^2).
inline double error_h1_semi(const PolyMesh& mesh, const Eigen::VectorXd& u_h,
                            const VectorField& grad_exact, int degree = 6) {
  const double sq = detail::sum_over_cells(mesh, [&](std::size_t c) {
    const Polygon E = mesh.cell_polygon(c);
    const ProjectorSystem sys = projector_system(E);
    const Eigen::Vector3d coef = sys.G.partialPivLu().solve(sys.B * detail::cell_values(mesh, c, u_h));
    const Point2 g{coef(1) / sys.basis.h, coef(2) / sys.basis.h};
    const auto tris = triangulate(E);
    double s = 0.0;
    for_each_quadrature_point(std::span<const Triangle>(tris), degree, [&](Point2 p, double w) {
      const Point2 d = grad_exact(p) - g;
      s += w * dot(d, d);
    });
    return s;
  });
  return std::sqrt(sq);
}

/// Discrete energy of e = u_I - u_h (u_I the vertex interpolant of u):
/// sum_E kappa_E |grad Pi e|^2 |E| + S^E(e, e). Interpolation stands in for
/// the exact solution inside the stabilization term.
inline double triple_seminorm_interp(const PolyMesh& mesh, const Eigen::VectorXd& u_h,
                                     const ScalarField& u_exact, const ScalarField& kappa) {
  const double sq = detail::sum_over_cells(mesh, [&](std::size_t c) {
    const Polygon E = mesh.cell_polygon(c);
    const ProjectorSystem sys = projector_system(E);
    Eigen::VectorXd e = detail::cell_values(mesh, c, u_h);
    for (std::size_t i = 0; i < E.size(); ++i) e(static_cast<Eigen::Index>(i)) = u_exact(E[i]) - e(static_cast<Eigen::Index>(i));
    const Eigen::Vector3d coef = sys.G.partialPivLu().solve(sys.B * e);
    const double grad_sq = (coef(1) * coef(1) + coef(2) * coef(2)) / (sys.basis.h * sys.basis.h);
    const double k = kappa ? kappa(sys.basis.center) : 1.0;
    return k * grad_sq * sys.area + e.dot(stab_matrix(E) * e);
  });
  return std::sqrt(sq);
}

/// Least-squares slope of log(err) against log(h).
inline double fit_rate(std::span<const double> hs, std::span<const double> errs) {
  if (hs.size() != errs.size()) throw AnalysisError("fit_rate: h and error lists differ in length");
  if (hs.size() < 3) throw AnalysisError("fit_rate: need at least 3 levels");
  const auto n = static_cast<double>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0) || !(errs[i] > 0)) throw AnalysisError("fit_rate: inputs must be positive");
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0) throw AnalysisError("fit_rate: mesh sizes must not all be equal");
  return (n * sxy - sx * sy) / denom;
}

struct Extrapolation {
  double limit = 0.0;
  double order = 0.0;
  double constant = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Fits vals ~ limit + C h^order by damped Gauss-Newton (Levenberg-Marquardt).
/// On failure the limit falls back to the finest value and converged = false.
inline Extrapolation extrapolate(std::span<const double> hs, std::span<const double> vals) {
  if (hs.size() != vals.size()) throw AnalysisError("extrapolate: h and value lists differ in length");
  if (hs.size() < 3) throw AnalysisError("extrapolate: need at least 3 levels");
  for (double h : hs)
    if (!(h > 0)) throw AnalysisError("extrapolate: mesh sizes must be positive");
  const std::size_t n = hs.size();

  Eigen::Vector3d p;  // (limit, C, order)
  p(2) = 2.0;
  p(0) = vals[n - 1];
  const double d0 = std::pow(hs[0], p(2)) - std::pow(hs[1], p(2));
  p(1) = d0 != 0 ? (vals[0] - vals[1]) / d0 : 0.0;

  auto residual = [&](const Eigen::Vector3d& q) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      r(static_cast<Eigen::Index>(i)) = q(0) + q(1) * std::pow(hs[i], q(2)) - vals[i];
    return r;
  };

  Extrapolation out;
  double mu = 1e-3;
  Eigen::VectorXd r = residual(p);
  double cost = r.squaredNorm();
  for (int it = 1; it <= 100; ++it) {
    out.iterations = it;
    Eigen::MatrixXd J(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
      const double ht = std::pow(hs[i], p(2));
      J.row(static_cast<Eigen::Index>(i)) << 1.0, ht, p(1) * ht * std::log(hs[i]);
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::Matrix3d Aug = JtJ;
      Aug.diagonal() += mu * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::LDLT<Eigen::Matrix3d> ldlt(Aug);
      if (ldlt.info() != Eigen::Success) {
        mu *= 10;
        continue;
      }
      step = -ldlt.solve(g);
      const Eigen::VectorXd r_new = residual(p + step);
      const double cost_new = r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new <= cost) {
        p += step;
        r = r_new;
        cost = cost_new;
        mu = std::max(mu / 10, 1e-15);
        accepted = true;
      } else {
        mu *= 10;
      }
    }
    if (!accepted) {
      // No descent direction left: at a minimum if the gradient is negligible.
      out.converged = g.norm() <= 1e-10 * (1.0 + JtJ.norm());
      break;
    }
    if (step.norm() <= 1e-12 * (1.0 + p.norm())) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged || !p.allFinite()) {
    out.limit = vals[n - 1];
    out.order = std::numeric_limits<double>::quiet_NaN();
    out.converged = false;
    return out;
  }
  out.limit = p(0);
  out.constant = p(1);
  out.order = p(2);
  return out;
}

/// Sorted lambda_{p,q} = |theta|^2/(4 kappa) + kappa pi^2 (p^2 + q^2) on the unit
/// square, with multiplicity.
inline std::vector<double> exact_square_eigenvalues(Point2 theta, double kappa, std::size_t count) {
  std::vector<double> all;
  const int range = static_cast<int>(count) + 2;
  for (int p = 1; p <= range; ++p)
    for (int q = 1; q <= range; ++q)
      all.push_back(dot(theta, theta) / (4.0 * kappa) +
                    kappa * std::numbers::pi * std::numbers::pi * (p * p + q * q));
  std::sort(all.begin(), all.end());
  all.resize(std::min(count, all.size()));
  return all;
}

struct EigenMatch {
  std::size_t reference_index = 0;
  std::size_t computed_index = 0;
  std::complex<double> computed;
  double reference = 0.0;
  double relative_error = 0.0;
  bool imaginary_flag = false;  ///< |Im| exceeds 1e-6 |lambda|
};

struct EigenMatching {
  std::vector<EigenMatch> pairs;
  std::size_t unmatched_reference = 0;
  std::size_t unmatched_computed = 0;
};

/// Greedy nearest matching in reference order; each computed value is used once.
inline EigenMatching match_eigs(std::span<const std::complex<double>> computed,
                                std::span<const double> reference) {
  EigenMatching out;
  std::vector<bool> used(computed.size(), false);
  for (std::size_t r = 0; r < reference.size(); ++r) {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < computed.size(); ++c) {
      if (used[c]) continue;
      if (!best || std::abs(computed[c] - reference[r]) < std::abs(computed[*best] - reference[r]))
        best = c;
    }
    if (!best) {
      ++out.unmatched_reference;
      continue;
    }
    used[*best] = true;
    const auto z = computed[*best];
    out.pairs.push_back({r, *best, z, reference[r], std::abs(z - reference[r]) / std::abs(reference[r]),
                         std::abs(z.imag()) > 1e-6 * std::abs(z)});
  }
  out.unmatched_computed = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
  return out;
}

/// One row per mesh level plus fitted orders and extrapolated limits per column.
class ConvergenceRecord {
 public:
  struct Entry {
    int N = 0;
    double h = 0.0;
    std::size_t dof_count = 0;
    std::map<std::string, double> values;
    double fit_h = 0.0;  ///< abscissa for fits when positive (e.g. nominal 1/N), else h
  };

  explicit ConvergenceRecord(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(Entry e) {
    if (!entries_.empty() && !(e.h < entries_.back().h))
      throw AnalysisError("convergence entries must have strictly decreasing h");
    entries_.push_back(std::move(e));
  }

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }

  [[nodiscard]] std::vector<double> hs() const {
    std::vector<double> out;
    for (const auto& e : entries_) out.push_back(e.fit_h > 0 ? e.fit_h : e.h);
    return out;
  }
  [[nodiscard]] std::vector<double> column(const std::string& name) const {
    std::vector<double> out;
    for (const auto& e : entries_) out.push_back(e.values.at(name));
    return out;
  }

  /// Order of an error column (values already errors).
  void fit_error_order(const std::string& name) {
    const auto h = hs();
    const auto v = column(name);
    order_[name] = fit_rate(h, v);
  }
  /// Order of a value column against a known limit.
  void fit_against(const std::string& name, double exact) {
    const auto h = hs();
    auto v = column(name);
    for (double& x : v) x = std::abs(x - exact);
    order_[name] = fit_rate(h, v);
    limit_[name] = exact;
  }
  /// Extrapolated limit and order of a value column.
  Extrapolation fit_extrapolated(const std::string& name) {
    const auto h = hs();
    const auto v = column(name);
    const Extrapolation ex = extrapolate(h, v);
    order_[name] = ex.order;
    limit_[name] = ex.limit;
    return ex;
  }

  [[nodiscard]] std::optional<double> order(const std::string& name) const {
    auto it = order_.find(name);
    return it == order_.end() ? std::nullopt : std::optional<double>(it->second);
  }
  [[nodiscard]] std::optional<double> limit(const std::string& name) const {
    auto it = limit_.find(name);
    return it == limit_.end() ? std::nullopt : std::optional<double>(it->second);
  }

  /// CSV with header N,h,dofs,<columns>; footer rows "order" and "extrap"
  /// (the latter holds exact or extrapolated limits where known).
  void write_csv(std::ostream& out, std::span<const std::string> comments = {}) const {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "N,h,dofs";
    for (const auto& c : columns_) out << ',' << c;
    out << '\n';
    char buf[64];
    auto fmt = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.10g", v);
      return std::string(buf);
    };
    for (const auto& e : entries_) {
      out << e.N << ',' << fmt(e.h) << ',' << e.dof_count;
      for (const auto& c : columns_) {
        auto it = e.values.find(c);
        out << ',' << (it == e.values.end() ? std::string() : fmt(it->second));
      }
      out << '\n';
    }
    out << "order,,";
    for (const auto& c : columns_) {
      auto o = order(c);
      out << ',' << (o ? fmt(*o) : std::string());
    }
    out << "\nextrap,,";
    for (const auto& c : columns_) {
      auto l = limit(c);
      out << ',' << (l ? fmt(*l) : std::string());
    }
    out << '\n';
  }

 private:
  std::vector<std::string> columns_;
  std::vector<Entry> entries_;
  std::map<std::string, double> order_;
  std::map<std::string, double> limit_;
};

}  // namespace vem
