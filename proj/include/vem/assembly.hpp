#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <thread>
#include <vector>

#include <Eigen/Sparse>

#include "vem/mesh.hpp"
#include "vem/vem_core.hpp"

namespace vem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Interior vertices are numbered 0..n_interior-1; boundary vertices carry
/// their own numbering for the Dirichlet lift.
struct DofMap {
  std::vector<int> interior;  // vertex -> interior index or -1
  std::vector<int> boundary;  // vertex -> boundary index or -1
  std::size_t n_interior = 0;
  std::size_t n_boundary = 0;

  static DofMap from_mesh(const PolyMesh& mesh) {
    DofMap map;
    map.interior.assign(mesh.num_vertices(), -1);
    map.boundary.assign(mesh.num_vertices(), -1);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      if (mesh.is_boundary(v))
        map.boundary[v] = static_cast<int>(map.n_boundary++);
      else
        map.interior[v] = static_cast<int>(map.n_interior++);
    }
    return map;
  }
};

/// Operators over all mesh vertices (no boundary elimination).
struct FullOperators {
  SparseMatrix A, B, C, M;
  Eigen::VectorXd F;
};

struct GlobalSystem {
  SparseMatrix A, B, C, M;  // interior x interior
  Eigen::VectorXd F;
  SparseMatrix coupling;  // (A + B + C) restricted to interior rows x boundary columns
  DofMap dof;

  [[nodiscard]] SparseMatrix load_matrix() const { return A + B + C; }
  [[nodiscard]] SparseMatrix eigen_matrix() const { return A + B; }
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct ElementTriplets {
  Triplets A, B, C, M;
  std::vector<std::pair<int, double>> F;
};

inline void scatter(const LocalElement& el, const std::vector<int>& cell, ElementTriplets& out) {
  const auto n = static_cast<Eigen::Index>(cell.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int gi = cell[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const int gj = cell[static_cast<std::size_t>(j)];
      out.A.emplace_back(gi, gj, el.Ah(i, j));
      if (el.Bh(i, j) != 0.0) out.B.emplace_back(gi, gj, el.Bh(i, j));
      if (el.Ch(i, j) != 0.0) out.C.emplace_back(gi, gj, el.Ch(i, j));
      out.M.emplace_back(gi, gj, el.Mh(i, j));
    }
    out.F.emplace_back(gi, el.Fh(i));
  }
}

}  // namespace detail

/// Two-phase assembly: per-worker triplet buffers over contiguous cell ranges,
/// concatenated in cell order so the result does not depend on the worker count.
inline FullOperators assemble_full(const PolyMesh& mesh, const CoefficientSet& coeffs,
                                   unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_cells = mesh.num_cells();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_cells)));
  std::vector<detail::ElementTriplets> buffers(workers);
  std::vector<std::exception_ptr> errors(workers);

  auto run = [&](unsigned w) {
    try {
      const std::size_t begin = n_cells * w / workers, end = n_cells * (w + 1) / workers;
      for (std::size_t c = begin; c < end; ++c) {
        LocalElement el;
        try {
          el = local_forms(mesh.cell_polygon(c), coeffs);
        } catch (const std::exception& e) {
          throw AssemblyError("cell " + std::to_string(c) + ": " + e.what());
        }
        detail::scatter(el, mesh.cell(c), buffers[w]);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  auto finalize = [&](Triplets detail::ElementTriplets::*member) {
    Triplets all;
    for (auto& b : buffers) all.insert(all.end(), (b.*member).begin(), (b.*member).end());
    SparseMatrix m(nv, nv);
    m.setFromTriplets(all.begin(), all.end());
    return m;
  };
  FullOperators ops;
  ops.A = finalize(&detail::ElementTriplets::A);
  ops.B = finalize(&detail::ElementTriplets::B);
  ops.C = finalize(&detail::ElementTriplets::C);
  ops.M = finalize(&detail::ElementTriplets::M);
  ops.F = Eigen::VectorXd::Zero(nv);
  for (auto& b : buffers)
    for (auto [i, v] : b.F) ops.F(i) += v;
  return ops;
}

namespace detail {

inline SparseMatrix restrict(const SparseMatrix& m, const std::vector<int>& rows,
                             const std::vector<int>& cols, std::size_t nr, std::size_t nc) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const int r = rows[static_cast<std::size_t>(it.row())];
      const int c = cols[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  SparseMatrix out(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace detail

/// Assembles the interior system for homogeneous Dirichlet data; use
/// apply_dirichlet_lift for nonzero boundary values.
inline GlobalSystem assemble(const PolyMesh& mesh, const CoefficientSet& coeffs) {
  if (!coeffs.kappa) throw AssemblyError("diffusion coefficient is not set");
  const FullOperators full = assemble_full(mesh, coeffs);
  GlobalSystem sys;
  sys.dof = DofMap::from_mesh(mesh);
  const auto& in = sys.dof.interior;
  const std::size_t ni = sys.dof.n_interior;
  sys.A = detail::restrict(full.A, in, in, ni, ni);
  sys.B = detail::restrict(full.B, in, in, ni, ni);
  sys.C = detail::restrict(full.C, in, in, ni, ni);
  sys.M = detail::restrict(full.M, in, in, ni, ni);
  const SparseMatrix K = full.A + full.B + full.C;
  sys.coupling = detail::restrict(K, in, sys.dof.boundary, ni, sys.dof.n_boundary);
  sys.F.resize(static_cast<Eigen::Index>(ni));
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (in[v] >= 0) sys.F(in[v]) = full.F(static_cast<Eigen::Index>(v));
  return sys;
}

/// Boundary values of g, in boundary numbering.
inline Eigen::VectorXd boundary_values(const GlobalSystem& sys, const PolyMesh& mesh,
                                       const std::function<double(Point2)>& g) {
  Eigen::VectorXd gb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dof.n_boundary));
  if (!g) return gb;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (sys.dof.boundary[v] >= 0) gb(sys.dof.boundary[v]) = g(mesh.vertex(v));
  return gb;
}

/// Right-hand side after eliminating Dirichlet data g: F - K_{IB} g_B.
inline Eigen::VectorXd apply_dirichlet_lift(const GlobalSystem& sys, const PolyMesh& mesh,
                                            const std::function<double(Point2)>& g) {
  return sys.F - sys.coupling * boundary_values(sys, mesh, g);
}

/// Full nodal vector from interior values and boundary data.
inline Eigen::VectorXd expand_solution(const GlobalSystem& sys, const PolyMesh& mesh,
                                       const Eigen::VectorXd& u_interior,
                                       const std::function<double(Point2)>& g = {}) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (sys.dof.interior[v] >= 0)
      u(static_cast<Eigen::Index>(v)) = u_interior(sys.dof.interior[v]);
    else if (g)
      u(static_cast<Eigen::Index>(v)) = g(mesh.vertex(v));
  }
  return u;
}

/// MatrixMarket coordinate export (real general).
inline void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw AssemblyError("cannot open " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n"
      << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n'
      << std::setprecision(17);
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

inline SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AssemblyError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
    throw AssemblyError(path.string() + ": unsupported MatrixMarket header");
  while (in.peek() == '%') std::getline(in, line);
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz)) throw AssemblyError(path.string() + ": missing size line");
  Triplets t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index r = 0, c = 0;
    double v = 0;
    if (!(in >> r >> c >> v))
      throw AssemblyError(path.string() + ": truncated at entry " + std::to_string(k));
    t.emplace_back(r - 1, c - 1, v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace vem
