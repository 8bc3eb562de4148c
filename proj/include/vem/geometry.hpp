#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vem/quadrature.hpp"

namespace vem {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

inline constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

/// Twice the signed area of triangle (a, b, c).
inline constexpr double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

inline double diameter(std::span<const Point2> pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, distance(pts[i], pts[j]));
  return d;
}

/// Signed shoelace area, computed relative to the first vertex.
inline double signed_area(std::span<const Point2> pts) {
  double twice = 0.0;
  const Point2 o = pts.front();
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) twice += orient(o, pts[i], pts[i + 1]);
  return 0.5 * twice;
}

/// Simple polygon with counterclockwise vertices. Construction checks the cheap
/// invariants (vertex count, distinct consecutive vertices, positive area);
/// self-intersection is checked on demand by is_simple().
class Polygon {
 public:
  Polygon() = default;

  explicit Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3)
      throw GeometryError("polygon needs at least 3 vertices, got " +
                          std::to_string(vertices_.size()));
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Point2 a = vertices_[i];
      const Point2 b = vertices_[(i + 1) % vertices_.size()];
      if (!std::isfinite(a.x) || !std::isfinite(a.y))
        throw GeometryError("polygon vertex " + std::to_string(i) + " is not finite");
      if (a == b) throw GeometryError("polygon edge " + std::to_string(i) + " has zero length");
    }
    diameter_ = vem::diameter(vertices_);
    const double area = signed_area(vertices_);
    if (area <= 1e-14 * diameter_ * diameter_)
      throw GeometryError("polygon has non-positive signed area (" + std::to_string(area) +
                          "); vertices must be counterclockwise");
  }

  [[nodiscard]] std::size_t size() const { return vertices_.size(); }
  [[nodiscard]] const Point2& operator[](std::size_t i) const { return vertices_[i]; }
  [[nodiscard]] const Point2& vertex(std::size_t i) const { return vertices_[i % size()]; }
  [[nodiscard]] std::span<const Point2> vertices() const { return vertices_; }
  [[nodiscard]] double diameter() const { return diameter_; }

  [[nodiscard]] double edge_length(std::size_t i) const {
    return distance(vertex(i), vertex(i + 1));
  }
  [[nodiscard]] double perimeter() const {
    double p = 0.0;
    for (std::size_t i = 0; i < size(); ++i) p += edge_length(i);
    return p;
  }
  /// Outward unit normal of edge i (from vertex i to vertex i+1).
  [[nodiscard]] Point2 edge_normal(std::size_t i) const {
    const Point2 t = vertex(i + 1) - vertex(i);
    const double len = norm(t);
    return {t.y / len, -t.x / len};
  }

 private:
  std::vector<Point2> vertices_;
  double diameter_ = 0.0;
};

struct AreaCentroid {
  double area = 0.0;
  Point2 centroid;
};

inline AreaCentroid area_centroid(const Polygon& poly) {
  const Point2 o = poly[0];
  double twice = 0.0;
  Point2 moment{};
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Point2 a = poly[i] - o;
    const Point2 b = poly[i + 1] - o;
    const double c = cross(a, b);
    twice += c;
    moment = moment + (c / 3.0) * (a + b);
  }
  if (twice <= 2e-14 * poly.diameter() * poly.diameter())
    throw GeometryError("degenerate polygon: area is not positive");
  return {0.5 * twice, o + (1.0 / twice) * moment};
}

namespace detail {

inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](Point2 a, Point2 b, Point2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace detail

/// True when no two non-adjacent edges intersect and adjacent edges only share
/// their common vertex (collinear hanging vertices are allowed).
inline bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const Point2 a0 = poly.vertex(i), a1 = poly.vertex(i + 1);
      const Point2 b0 = poly.vertex(j), b1 = poly.vertex(j + 1);
      if (adjacent) {
        // Folding back onto the previous edge.
        const Point2 shared = (j == i + 1) ? a1 : a0;
        const Point2 p = (j == i + 1) ? a0 : a1;
        const Point2 q = (j == i + 1) ? b1 : b0;
        if (orient(p, shared, q) == 0.0 && dot(p - shared, q - shared) > 0.0) return false;
        continue;
      }
      if (detail::segments_intersect(a0, a1, b0, b1)) return false;
    }
  }
  return true;
}

struct Triangle {
  std::array<Point2, 3> v;
  [[nodiscard]] double area() const { return 0.5 * orient(v[0], v[1], v[2]); }
};

namespace detail {

inline std::vector<Triangle> ear_clip(const Polygon& poly) {
  std::vector<std::size_t> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<Triangle> tris;
  tris.reserve(poly.size() - 2);
  const double eps = 1e-14 * poly.diameter() * poly.diameter();

  auto is_ear = [&](std::size_t k) {
    const std::size_t m = idx.size();
    const Point2 a = poly[idx[(k + m - 1) % m]];
    const Point2 b = poly[idx[k]];
    const Point2 c = poly[idx[(k + 1) % m]];
    if (orient(a, b, c) <= eps) return false;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k || j == (k + 1) % m || j == (k + m - 1) % m) continue;
      const Point2 p = poly[idx[j]];
      if (p == a || p == b || p == c) continue;
      if (orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0) return false;
    }
    return true;
  };

  while (idx.size() > 3) {
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (!is_ear(k)) continue;
      const std::size_t m = idx.size();
      tris.push_back({{poly[idx[(k + m - 1) % m]], poly[idx[k]], poly[idx[(k + 1) % m]]}});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) {
      // Only collinear runs remain; drop a flat vertex without emitting a triangle.
      bool dropped = false;
      for (std::size_t k = 0; k < idx.size() && !dropped; ++k) {
        const std::size_t m = idx.size();
        if (std::abs(orient(poly[idx[(k + m - 1) % m]], poly[idx[k]], poly[idx[(k + 1) % m]])) <=
            eps) {
          idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
          dropped = true;
        }
      }
      if (!dropped) throw GeometryError("ear clipping failed: polygon is not simple");
    }
  }
  tris.push_back({{poly[idx[0]], poly[idx[1]], poly[idx[2]]}});
  return tris;
}

}  // namespace detail

/// Partition of a simple polygon into triangles: a fan from the centroid when every
/// fan triangle is positively oriented, ear clipping otherwise.
inline std::vector<Triangle> triangulate(const Polygon& poly) {
  const Point2 c = area_centroid(poly).centroid;
  const double eps = 1e-12 * poly.diameter() * poly.diameter();
  bool fan_ok = true;
  for (std::size_t i = 0; i < poly.size() && fan_ok; ++i)
    fan_ok = orient(c, poly.vertex(i), poly.vertex(i + 1)) > eps;
  if (fan_ok) {
    std::vector<Triangle> tris;
    tris.reserve(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i)
      tris.push_back({{c, poly.vertex(i), poly.vertex(i + 1)}});
    return tris;
  }
  if (!is_simple(poly)) throw GeometryError("cannot triangulate a non-simple polygon");
  return detail::ear_clip(poly);
}

/// Applies `visit(point, weight)` at every quadrature node of the polygon
/// triangulation; weights already include the triangle areas.
template <typename Visitor>
void for_each_quadrature_point(std::span<const Triangle> tris, int degree, Visitor&& visit) {
  const TriQuadRule& rule = triangle_rule(degree);
  for (const Triangle& t : tris) {
    const double area = t.area();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const Point2 p{l[0] * t.v[0].x + l[1] * t.v[1].x + l[2] * t.v[2].x,
                     l[0] * t.v[0].y + l[1] * t.v[1].y + l[2] * t.v[2].y};
      visit(p, rule.weights[q] * area);
    }
  }
}

/// Integral of g over the polygon, exact for polynomials of total degree <= degree.
template <typename Field>
double integrate(const Polygon& poly, Field&& g, int degree = 4) {
  const TriQuadRule& rule = triangle_rule(degree);  // validates degree up front
  (void)rule;
  const auto tris = triangulate(poly);
  double sum = 0.0;
  for_each_quadrature_point(std::span<const Triangle>(tris), degree,
                            [&](Point2 p, double w) { sum += w * g(p); });
  return sum;
}

// ---------------------------------------------------------------------------
// Star-shapedness diagnostic

struct StarMetric {
  bool is_star = false;
  std::optional<Point2> center;
  double rho = 0.0;       ///< inscribed kernel radius divided by the polygon diameter
  double radius = 0.0;    ///< inscribed kernel radius
  std::vector<Point2> kernel;
};

namespace detail {

struct HalfPlane {
  Point2 normal;  // unit outward normal; feasible side is dot(normal, p) <= offset
  double offset;
};

inline std::vector<Point2> clip(const std::vector<Point2>& poly, const HalfPlane& hp) {
  std::vector<Point2> out;
  if (poly.empty()) return out;
  auto value = [&](Point2 p) { return dot(hp.normal, p) - hp.offset; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % poly.size()];
    const double va = value(a);
    const double vb = value(b);
    if (va <= 0) out.push_back(a);
    if ((va < 0 && vb > 0) || (va > 0 && vb < 0)) {
      const double t = va / (va - vb);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

}  // namespace detail

/// Polygon kernel by clipping the bounding box with every inward edge half-plane,
/// and the largest disc inside it (Chebyshev center).
inline StarMetric star_metric(const Polygon& poly) {
  StarMetric result;
  double xmin = poly[0].x, xmax = poly[0].x, ymin = poly[0].y, ymax = poly[0].y;
  for (const Point2& p : poly.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::vector<Point2> kernel{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
  std::vector<detail::HalfPlane> planes;
  planes.reserve(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 n = poly.edge_normal(i);
    planes.push_back({n, dot(n, poly[i])});
  }
  for (const auto& hp : planes) {
    kernel = detail::clip(kernel, hp);
    if (kernel.size() < 3) break;
  }
  const double scale = poly.diameter();
  if (kernel.size() < 3 || std::abs(signed_area(kernel)) <= 1e-14 * scale * scale) {
    // Empty or flat kernel: no ball fits.
    result.is_star = !kernel.empty();
    result.kernel = kernel;
    if (result.is_star) result.center = kernel.front();
    return result;
  }
  result.is_star = true;
  result.kernel = kernel;

  // Distinct supporting lines (collinear edges collapse to one constraint).
  std::vector<detail::HalfPlane> lines;
  for (const auto& hp : planes) {
    const bool dup = std::any_of(lines.begin(), lines.end(), [&](const detail::HalfPlane& l) {
      return dot(l.normal, hp.normal) > 1.0 - 1e-12 &&
             std::abs(l.offset - hp.offset) <= 1e-12 * scale;
    });
    if (!dup) lines.push_back(hp);
  }

  // The LP max r s.t. n_i.c + r <= d_i attains its optimum where three
  // constraints are active; enumerate them.
  double best_r = 0.0;
  Point2 best_c = kernel.front();
  const double tol = 1e-12 * scale;
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (std::size_t b = a + 1; b < lines.size(); ++b)
      for (std::size_t c = b + 1; c < lines.size(); ++c) {
        const std::array<const detail::HalfPlane*, 3> l{&lines[a], &lines[b], &lines[c]};
        // Solve [nx ny 1] [cx cy r]^T = d by Cramer's rule.
        double m[3][4];
        for (int r = 0; r < 3; ++r) {
          m[r][0] = l[r]->normal.x;
          m[r][1] = l[r]->normal.y;
          m[r][2] = 1.0;
          m[r][3] = l[r]->offset;
        }
        auto det3 = [&](int c0, int c1, int c2) {
          return m[0][c0] * (m[1][c1] * m[2][c2] - m[1][c2] * m[2][c1]) -
                 m[0][c1] * (m[1][c0] * m[2][c2] - m[1][c2] * m[2][c0]) +
                 m[0][c2] * (m[1][c0] * m[2][c1] - m[1][c1] * m[2][c0]);
        };
        const double det = det3(0, 1, 2);
        if (std::abs(det) < 1e-12) continue;
        const Point2 center{det3(3, 1, 2) / det, det3(0, 3, 2) / det};
        const double r = det3(0, 1, 3) / det;
        if (r <= best_r) continue;
        bool feasible = true;
        for (const auto& hp : lines)
          if (dot(hp.normal, center) + r > hp.offset + tol) {
            feasible = false;
            break;
          }
        if (feasible) {
          best_r = r;
          best_c = center;
        }
      }
  result.center = best_c;
  result.radius = best_r;
  result.rho = best_r / scale;
  return result;
}

}  // namespace vem
