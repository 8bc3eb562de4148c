#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vem/geometry.hpp"

namespace vem {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DomainTag { unit_square, rotated_T, custom };

inline std::string_view to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::unit_square: return "unit_square";
    case DomainTag::rotated_T: return "rotated_T";
    case DomainTag::custom: return "custom";
  }
  return "custom";
}

inline DomainTag domain_from_string(std::string_view s) {
  if (s == "unit_square") return DomainTag::unit_square;
  if (s == "rotated_T") return DomainTag::rotated_T;
  if (s == "custom") return DomainTag::custom;
  throw MeshError("unknown domain '" + std::string(s) + "'");
}

/// Counterclockwise outline of the named domains; empty for custom meshes.
inline std::vector<Point2> domain_outline(DomainTag tag) {
  switch (tag) {
    case DomainTag::unit_square: return {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    case DomainTag::rotated_T:
      return {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.0},   {0.25, 0.0},
              {0.25, 1.0},  {-0.25, 1.0}, {-0.25, 0.0}, {-0.5, 0.0}};
    case DomainTag::custom: return {};
  }
  return {};
}

inline double domain_area(DomainTag tag) {
  const auto outline = domain_outline(tag);
  return outline.empty() ? 0.0 : signed_area(outline);
}

/// Distance from p to the boundary of a named domain.
inline double distance_to_boundary(DomainTag tag, Point2 p) {
  const auto outline = domain_outline(tag);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outline.size(); ++i) {
    const Point2 a = outline[i];
    const Point2 b = outline[(i + 1) % outline.size()];
    const Point2 ab = b - a;
    const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
    d = std::min(d, distance(p, a + t * ab));
  }
  return d;
}

/// Polygonal mesh. Immutable after construction; boundary flags are derived
/// from edge adjacency unless supplied explicitly (e.g. when read from a file).
class PolyMesh {
 public:
  PolyMesh() = default;

  PolyMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> cells,
           DomainTag domain = DomainTag::custom)
      : vertices_(std::move(vertices)), cells_(std::move(cells)), domain_(domain) {
    check_indices();
    boundary_ = boundary_from_edges();
    compute_h();
  }

  PolyMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> cells,
           std::vector<bool> boundary, DomainTag domain)
      : vertices_(std::move(vertices)),
        cells_(std::move(cells)),
        boundary_(std::move(boundary)),
        domain_(domain) {
    check_indices();
    if (boundary_.size() != vertices_.size())
      throw MeshError("boundary flag count " + std::to_string(boundary_.size()) +
                      " does not match vertex count " + std::to_string(vertices_.size()));
    compute_h();
  }

  [[nodiscard]] std::span<const Point2> vertices() const { return vertices_; }
  [[nodiscard]] const Point2& vertex(std::size_t i) const { return vertices_[i]; }
  [[nodiscard]] std::span<const std::vector<int>> cells() const { return cells_; }
  [[nodiscard]] const std::vector<int>& cell(std::size_t c) const { return cells_[c]; }
  [[nodiscard]] const std::vector<bool>& boundary() const { return boundary_; }
  [[nodiscard]] bool is_boundary(std::size_t v) const { return boundary_[v]; }
  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] DomainTag domain() const { return domain_; }
  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }

  [[nodiscard]] std::vector<Point2> cell_points(std::size_t c) const {
    std::vector<Point2> pts;
    pts.reserve(cells_[c].size());
    for (int v : cells_[c]) pts.push_back(vertices_[static_cast<std::size_t>(v)]);
    return pts;
  }

  [[nodiscard]] Polygon cell_polygon(std::size_t c) const { return Polygon(cell_points(c)); }

  /// Undirected edge key (min, max) -> number of incident cells.
  [[nodiscard]] std::map<std::pair<int, int>, int> edge_counts() const {
    std::map<std::pair<int, int>, int> counts;
    for (const auto& cell : cells_)
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const int a = cell[i];
        const int b = cell[(i + 1) % cell.size()];
        ++counts[{std::min(a, b), std::max(a, b)}];
      }
    return counts;
  }

  friend bool operator==(const PolyMesh&, const PolyMesh&) = default;

 private:
  void check_indices() const {
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (cells_[c].size() < 3)
        throw MeshError("cell " + std::to_string(c) + " has fewer than 3 vertices");
      for (int v : cells_[c])
        if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
          throw MeshError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                          " out of range");
    }
  }

  [[nodiscard]] std::vector<bool> boundary_from_edges() const {
    std::vector<bool> flags(vertices_.size(), false);
    for (const auto& [edge, count] : edge_counts())
      if (count == 1) {
        flags[static_cast<std::size_t>(edge.first)] = true;
        flags[static_cast<std::size_t>(edge.second)] = true;
      }
    return flags;
  }

  void compute_h() {
    h_ = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c) h_ = std::max(h_, diameter(cell_points(c)));
  }

  std::vector<Point2> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<bool> boundary_;
  double h_ = 0.0;
  DomainTag domain_ = DomainTag::custom;
};

struct MeshQualityReport {
  double h = 0.0;
  double min_edge = 0.0;
  double min_edge_over_h = 0.0;  ///< min over cells of (shortest edge / cell diameter)
  double min_rho = 0.0;          ///< min over cells of the star-shapedness ratio
  std::size_t cell_count = 0;
  std::size_t vertex_count = 0;
  std::size_t max_cell_vertices = 0;
  std::vector<Point2> reentrant_corners;
};

/// Interior angle of polygon `pts` at vertex i, in (0, 2*pi).
inline double interior_angle(std::span<const Point2> pts, std::size_t i) {
  const std::size_t n = pts.size();
  const Point2 v = pts[i];
  const Point2 to_next = pts[(i + 1) % n] - v;
  const Point2 to_prev = pts[(i + n - 1) % n] - v;
  double a = std::atan2(cross(to_next, to_prev), dot(to_next, to_prev));
  if (a <= 0) a += 2 * std::numbers::pi;
  return a;
}

/// Full conformity check plus quality statistics. Throws MeshError naming the
/// offending cell or edge; small star-shapedness ratios are reported, not rejected.
inline MeshQualityReport validate(const PolyMesh& mesh) {
  MeshQualityReport report;
  report.h = mesh.h();
  report.cell_count = mesh.num_cells();
  report.vertex_count = mesh.num_vertices();
  report.min_edge = std::numeric_limits<double>::infinity();
  report.min_edge_over_h = std::numeric_limits<double>::infinity();
  report.min_rho = std::numeric_limits<double>::infinity();

  std::vector<double> angle_sum(mesh.num_vertices(), 0.0);
  std::vector<int> valence(mesh.num_vertices(), 0);
  double area_sum = 0.0;

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cell(c);
    for (std::size_t i = 0; i < cell.size(); ++i)
      for (std::size_t j = i + 1; j < cell.size(); ++j)
        if (cell[i] == cell[j])
          throw MeshError("cell " + std::to_string(c) + " repeats vertex " +
                          std::to_string(cell[i]));
    const auto pts = mesh.cell_points(c);
    Polygon poly;
    try {
      poly = Polygon(pts);
    } catch (const GeometryError& e) {
      throw MeshError("cell " + std::to_string(c) + ": " + e.what());
    }
    if (!is_simple(poly)) throw MeshError("cell " + std::to_string(c) + " is not simple");
    area_sum += area_centroid(poly).area;
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) shortest = std::min(shortest, poly.edge_length(i));
    report.min_edge = std::min(report.min_edge, shortest);
    report.min_edge_over_h = std::min(report.min_edge_over_h, shortest / poly.diameter());
    report.min_rho = std::min(report.min_rho, star_metric(poly).rho);
    report.max_cell_vertices = std::max(report.max_cell_vertices, cell.size());
    for (std::size_t i = 0; i < cell.size(); ++i) {
      angle_sum[static_cast<std::size_t>(cell[i])] += interior_angle(pts, i);
      ++valence[static_cast<std::size_t>(cell[i])];
    }
  }

  // Edge adjacency: each undirected edge is used once (boundary) or twice with
  // opposite orientations (interior).
  std::map<std::pair<int, int>, std::vector<std::pair<std::size_t, bool>>> edges;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cell(c);
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const int a = cell[i];
      const int b = cell[(i + 1) % cell.size()];
      edges[{std::min(a, b), std::max(a, b)}].push_back({c, a < b});
    }
  }
  std::vector<bool> on_boundary_edge(mesh.num_vertices(), false);
  double boundary_twice_area = 0.0;
  for (const auto& [e, uses] : edges) {
    const std::string name = "edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")";
    if (uses.size() > 2)
      throw MeshError(name + " is shared by " + std::to_string(uses.size()) + " cells (first: cell " +
                      std::to_string(uses[0].first) + ")");
    if (uses.size() == 2 && uses[0].second == uses[1].second)
      throw MeshError(name + " has the same orientation in cells " + std::to_string(uses[0].first) +
                      " and " + std::to_string(uses[1].first) + "; cell " +
                      std::to_string(uses[1].first) + " is misoriented");
    if (uses.size() == 1) {
      on_boundary_edge[static_cast<std::size_t>(e.first)] = true;
      on_boundary_edge[static_cast<std::size_t>(e.second)] = true;
      const Point2 a = mesh.vertex(static_cast<std::size_t>(uses[0].second ? e.first : e.second));
      const Point2 b = mesh.vertex(static_cast<std::size_t>(uses[0].second ? e.second : e.first));
      boundary_twice_area += cross(a, b);
    }
  }

  const double expected_area =
      mesh.domain() == DomainTag::custom ? 0.5 * boundary_twice_area : domain_area(mesh.domain());
  if (std::abs(area_sum - expected_area) > 1e-10 * std::abs(expected_area))
    throw MeshError("coverage mismatch: cell areas sum to " + std::to_string(area_sum) +
                    " but the domain area is " + std::to_string(expected_area) +
                    " (overlapping cells or gaps)");

  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (valence[v] == 0) throw MeshError("vertex " + std::to_string(v) + " is not used by any cell");
    if (mesh.is_boundary(v) != on_boundary_edge[v])
      throw MeshError("vertex " + std::to_string(v) + " boundary flag is inconsistent with edge adjacency");
    if (mesh.domain() != DomainTag::custom) {
      const bool on_domain_boundary = distance_to_boundary(mesh.domain(), mesh.vertex(v)) < 1e-12;
      if (on_domain_boundary != mesh.is_boundary(v))
        throw MeshError("vertex " + std::to_string(v) +
                        (mesh.is_boundary(v) ? " is flagged boundary but lies inside the domain"
                                             : " lies on the domain boundary but is not flagged"));
    }
    if (mesh.is_boundary(v) && angle_sum[v] > std::numbers::pi * (1.0 + 1e-9))
      report.reentrant_corners.push_back(mesh.vertex(v));
  }

  return report;
}

}  // namespace vem
