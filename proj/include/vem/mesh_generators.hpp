#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vem/mesh.hpp"

namespace vem {

enum class MeshFamily { th1, th2, th3, th4, th5, th6, th7 };

inline std::string_view to_string(MeshFamily f) {
  static constexpr std::array<std::string_view, 7> names{"th1", "th2", "th3", "th4",
                                                         "th5", "th6", "th7"};
  return names[static_cast<std::size_t>(f)];
}

inline MeshFamily family_from_string(std::string_view s) {
  for (int i = 0; i < 7; ++i)
    if (to_string(static_cast<MeshFamily>(i)) == s) return static_cast<MeshFamily>(i);
  throw MeshError("unknown mesh family '" + std::string(s) + "' (expected th1..th7)");
}

inline DomainTag family_domain(MeshFamily f) {
  return (f == MeshFamily::th1 || f == MeshFamily::th2 || f == MeshFamily::th3)
             ? DomainTag::unit_square
             : DomainTag::rotated_T;
}

/// Generator knobs. seed = 0 selects the canonical deterministic construction.
/// A nonzero seed selects an alternate: on th2 the endpoint receiving the short
/// edge is drawn per edge from the seed; on the glued families the resolution
/// offset of the second mesh changes.
struct MeshOptions {
  bool split_edges = true;  ///< th2 only: false yields the plain triangle mesh
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  v.back() = b;
  return v;
}

/// Concatenates break lists sharing their end/start points.
inline std::vector<double> join(std::initializer_list<std::vector<double>> parts) {
  std::vector<double> out;
  for (const auto& p : parts) {
    for (double x : p)
      if (out.empty() || x > out.back()) out.push_back(x);
  }
  return out;
}

/// Accumulates polygons with vertex deduplication by snapped coordinates.
class MeshBuilder {
 public:
  int vertex(Point2 p) {
    const auto key = std::make_pair(std::llround(p.x * kSnap), std::llround(p.y * kSnap));
    auto [it, inserted] = index_.try_emplace(key, static_cast<int>(vertices_.size()));
    if (inserted) vertices_.push_back(p);
    return it->second;
  }

  void cell(std::initializer_list<Point2> pts) { cell(std::vector<Point2>(pts)); }
  void cell(const std::vector<Point2>& pts) {
    std::vector<int> c;
    c.reserve(pts.size());
    for (Point2 p : pts) c.push_back(vertex(p));
    cells_.push_back(std::move(c));
  }
  void cell_indices(std::vector<int> c) { cells_.push_back(std::move(c)); }

  std::vector<Point2>& vertices() { return vertices_; }
  std::vector<std::vector<int>>& cells() { return cells_; }

  /// Inserts every vertex lying strictly inside an axis-aligned cell edge into
  /// that edge. This is what turns two glued meshes into a conforming one with
  /// collinear hanging vertices.
  void insert_hanging_vertices() {
    std::map<long long, std::vector<std::pair<double, int>>> by_x;  // vertical lines
    std::map<long long, std::vector<std::pair<double, int>>> by_y;  // horizontal lines
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Point2 p = vertices_[i];
      by_x[std::llround(p.x * kSnap)].push_back({p.y, static_cast<int>(i)});
      by_y[std::llround(p.y * kSnap)].push_back({p.x, static_cast<int>(i)});
    }
    for (auto* m : {&by_x, &by_y})
      for (auto& [k, v] : *m) std::sort(v.begin(), v.end());

    for (auto& cell : cells_) {
      std::vector<int> out;
      out.reserve(cell.size() + 4);
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const int a = cell[i];
        const int b = cell[(i + 1) % cell.size()];
        out.push_back(a);
        const Point2 pa = vertices_[static_cast<std::size_t>(a)];
        const Point2 pb = vertices_[static_cast<std::size_t>(b)];
        const std::vector<std::pair<double, int>>* line = nullptr;
        double ta = 0, tb = 0;
        if (std::llround(pa.x * kSnap) == std::llround(pb.x * kSnap)) {
          line = &by_x[std::llround(pa.x * kSnap)];
          ta = pa.y;
          tb = pb.y;
        } else if (std::llround(pa.y * kSnap) == std::llround(pb.y * kSnap)) {
          line = &by_y[std::llround(pa.y * kSnap)];
          ta = pa.x;
          tb = pb.x;
        }
        if (line == nullptr) continue;
        const double lo = std::min(ta, tb), hi = std::max(ta, tb);
        const double tol = 1e-12;
        auto first = std::upper_bound(line->begin(), line->end(), std::make_pair(lo + tol, -1));
        auto last = std::lower_bound(line->begin(), line->end(), std::make_pair(hi - tol, -1));
        std::vector<int> inner;
        for (auto it = first; it != last; ++it) inner.push_back(it->second);
        if (ta > tb) std::reverse(inner.begin(), inner.end());
        out.insert(out.end(), inner.begin(), inner.end());
      }
      cell = std::move(out);
    }
  }

  PolyMesh build(DomainTag domain) && {
    return PolyMesh(std::move(vertices_), std::move(cells_), domain);
  }

 private:
  static constexpr double kSnap = 1e11;
  std::vector<Point2> vertices_;
  std::vector<std::vector<int>> cells_;
  std::map<std::pair<long long, long long>, int> index_;
};

using Inside = bool (*)(Point2);

inline bool inside_everything(Point2) { return true; }
inline bool inside_rotated_T(Point2 p) {
  return (p.x > -0.5 && p.x < 0.5 && p.y > -0.5 && p.y < 0.0) ||
         (p.x > -0.25 && p.x < 0.25 && p.y > 0.0 && p.y < 1.0);
}

inline void add_quads(MeshBuilder& b, const std::vector<double>& xs, const std::vector<double>& ys,
                      Inside inside) {
  for (std::size_t j = 0; j + 1 < ys.size(); ++j)
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const Point2 c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      if (!inside(c)) continue;
      b.cell({{xs[i], ys[j]}, {xs[i + 1], ys[j]}, {xs[i + 1], ys[j + 1]}, {xs[i], ys[j + 1]}});
    }
}

/// Each rectangle split along its (i, j)-(i+1, j+1) diagonal.
inline void add_triangles(MeshBuilder& b, const std::vector<double>& xs,
                          const std::vector<double>& ys, Inside inside) {
  for (std::size_t j = 0; j + 1 < ys.size(); ++j)
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const Point2 c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      if (!inside(c)) continue;
      const Point2 p00{xs[i], ys[j]}, p10{xs[i + 1], ys[j]};
      const Point2 p11{xs[i + 1], ys[j + 1]}, p01{xs[i], ys[j + 1]};
      b.cell({p00, p10, p11});
      b.cell({p00, p11, p01});
    }
}

/// Staggered brick rows on one rectangle: odd rows are shifted by half a brick,
/// so every interior vertex has valence three as in a Voronoi tessellation.
/// Hanging vertices are inserted afterwards by the builder.
inline void add_bricks(MeshBuilder& b, double x0, double x1, double y0, double y1, int nx, int ny) {
  const auto ys = linspace(y0, y1, ny);
  const double dx = (x1 - x0) / nx;
  for (int j = 0; j < ny; ++j) {
    std::vector<double> xs;
    if (j % 2 == 0) {
      xs = linspace(x0, x1, nx);
    } else {
      xs.push_back(x0);
      for (int i = 0; i < nx; ++i) xs.push_back(x0 + (i + 0.5) * dx);
      xs.push_back(x1);
    }
    const double ya = ys[static_cast<std::size_t>(j)], yb = ys[static_cast<std::size_t>(j) + 1];
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      b.cell({{xs[i], ya}, {xs[i + 1], ya}, {xs[i + 1], yb}, {xs[i], yb}});
  }
}

inline int rows_for(double length, int n) { return std::max(1, static_cast<int>(std::lround(length * n))); }

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw MeshError(msg);
}

}  // namespace detail

/// Unit square glued at y = 0.6: structured quads with N columns below, N+1
/// (incommensurate) columns above. Interface vertices of both sides become
/// hanging vertices, producing edges as short as 1/(N(N+1)).
inline PolyMesh gen_square_th1(int N, const MeshOptions& opt = {}) {
  detail::require(N >= 2, "th1 requires N >= 2, got " + std::to_string(N));
  const int M = N + 1 + static_cast<int>(opt.seed % 3);
  detail::MeshBuilder b;
  detail::add_quads(b, detail::linspace(0, 1, N), detail::linspace(0, 0.6, detail::rows_for(0.6, N)),
                    detail::inside_everything);
  detail::add_quads(b, detail::linspace(0, 1, M), detail::linspace(0.6, 1, detail::rows_for(0.4, M)),
                    detail::inside_everything);
  b.insert_hanging_vertices();
  return std::move(b).build(DomainTag::unit_square);
}

/// Right-triangle mesh of the unit square (N x N x 2). With edge splitting each
/// edge of length h_e gets a vertex at distance h_e^2 from its lexicographically
/// smaller endpoint, turning every triangle into a hexagon with three edges of
/// length h_e^2.
inline PolyMesh gen_square_th2(int N, const MeshOptions& opt = {}) {
  detail::require(N >= 2, "th2 requires N >= 2, got " + std::to_string(N));
  detail::MeshBuilder b;
  const auto xs = detail::linspace(0, 1, N);
  detail::add_triangles(b, xs, xs, detail::inside_everything);
  if (!opt.split_edges) return std::move(b).build(DomainTag::unit_square);

  std::mt19937_64 rng(opt.seed);
  std::map<std::pair<int, int>, int> edge_vertex;
  std::vector<std::vector<int>> split_cells;
  auto& verts = b.vertices();
  for (const auto& tri : b.cells()) {
    std::vector<int> poly;
    for (std::size_t i = 0; i < tri.size(); ++i) {
      const int a = tri[i];
      const int c = tri[(i + 1) % tri.size()];
      poly.push_back(a);
      const auto key = std::make_pair(std::min(a, c), std::max(a, c));
      auto it = edge_vertex.find(key);
      if (it == edge_vertex.end()) {
        const Point2 pa = verts[static_cast<std::size_t>(key.first)];
        const Point2 pc = verts[static_cast<std::size_t>(key.second)];
        bool a_first = std::make_pair(pa.x, pa.y) < std::make_pair(pc.x, pc.y);
        if (opt.seed != 0) a_first = (rng() & 1U) != 0;
        const Point2 from = a_first ? pa : pc;
        const Point2 to = a_first ? pc : pa;
        const double he = distance(from, to);
        const Point2 p = from + he * (to - from);  // distance he * he from `from`
        it = edge_vertex.emplace(key, static_cast<int>(verts.size())).first;
        verts.push_back(p);
      }
      poly.push_back(it->second);
    }
    split_cells.push_back(std::move(poly));
  }
  b.cells() = std::move(split_cells);
  return std::move(b).build(DomainTag::unit_square);
}

/// Unit square glued at y = 0.6: structured quads below, a triangle mesh with
/// N+1 columns above.
inline PolyMesh gen_square_th3(int N, const MeshOptions& opt = {}) {
  detail::require(N >= 2, "th3 requires N >= 2, got " + std::to_string(N));
  const int M = N + 1 + static_cast<int>(opt.seed % 3);
  detail::MeshBuilder b;
  detail::add_quads(b, detail::linspace(0, 1, N), detail::linspace(0, 0.6, detail::rows_for(0.6, N)),
                    detail::inside_everything);
  detail::add_triangles(b, detail::linspace(0, 1, M),
                        detail::linspace(0.6, 1, detail::rows_for(0.4, M)),
                        detail::inside_everything);
  b.insert_hanging_vertices();
  return std::move(b).build(DomainTag::unit_square);
}

namespace detail {

enum class Primitive { quads, triangles, bricks };

/// Fills the half of the rotated T with x in [x0, x0 + 0.5] (x0 = -0.5 or 0)
/// using resolution n: grid lines at the quarter points, spacing about 1/n.
inline void add_T_half(MeshBuilder& b, Primitive kind, double x0, int n) {
  const int nq = std::max(1, static_cast<int>(std::lround(n / 4.0)));
  const int nb = std::max(1, n / 2);
  const double xa = x0, xm = x0 + 0.25, xb = x0 + 0.5;
  // The stem occupies the inner quarter of each half.
  const bool left = x0 < 0;
  const double sx0 = left ? xm : xa, sx1 = left ? xb : xm;
  if (kind == Primitive::bricks) {
    add_bricks(b, xa, xb, -0.5, 0.0, 2 * nq, nb);
    add_bricks(b, sx0, sx1, 0.0, 1.0, nq, 2 * nb);
    return;
  }
  const auto xs = join({linspace(xa, xm, nq), linspace(xm, xb, nq)});
  const auto ys = join({linspace(-0.5, 0.0, nb), linspace(0.0, 1.0, 2 * nb)});
  if (kind == Primitive::quads)
    add_quads(b, xs, ys, inside_rotated_T);
  else
    add_triangles(b, xs, ys, inside_rotated_T);
}

}  // namespace detail

/// Rotated-T domain (-0.5,0.5)x(-0.5,0) U (-0.25,0.25)x(0,1) glued at x = 0.
/// Left/right primitives: th4 quads/quads, th5 quads/triangles,
/// th6 triangles/triangles, th7 staggered bricks/quads. The right half uses
/// resolution N+2 so the interface traces do not match.
inline PolyMesh gen_rotated_T(MeshFamily family, int N, const MeshOptions& opt = {}) {
  detail::require(family_domain(family) == DomainTag::rotated_T,
                  "family " + std::string(to_string(family)) + " is not a rotated-T family");
  detail::require(N >= 4 && N % 2 == 0, "rotated-T meshes require an even N >= 4, got " +
                                            std::to_string(N));
  using detail::Primitive;
  const int M = N + 2 + 2 * static_cast<int>(opt.seed % 3);
  Primitive left = Primitive::quads, right = Primitive::quads;
  switch (family) {
    case MeshFamily::th4: left = Primitive::quads; right = Primitive::quads; break;
    case MeshFamily::th5: left = Primitive::quads; right = Primitive::triangles; break;
    case MeshFamily::th6: left = Primitive::triangles; right = Primitive::triangles; break;
    case MeshFamily::th7: left = Primitive::bricks; right = Primitive::quads; break;
    default: break;
  }
  detail::MeshBuilder b;
  detail::add_T_half(b, left, -0.5, N);
  detail::add_T_half(b, right, 0.0, M);
  b.insert_hanging_vertices();
  return std::move(b).build(DomainTag::rotated_T);
}

/// Dispatch by family name.
inline PolyMesh generate(MeshFamily family, int N, const MeshOptions& opt = {}) {
  switch (family) {
    case MeshFamily::th1: return gen_square_th1(N, opt);
    case MeshFamily::th2: return gen_square_th2(N, opt);
    case MeshFamily::th3: return gen_square_th3(N, opt);
    default: return gen_rotated_T(family, N, opt);
  }
}

}  // namespace vem
