#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "vem/mesh.hpp"

namespace vem {

class MeshIOError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json mesh_to_json(const PolyMesh& mesh) {
  nlohmann::json j;
  j["version"] = 1;
  j["domain"] = std::string(to_string(mesh.domain()));
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const Point2& p : mesh.vertices()) verts.push_back({p.x, p.y});
  j["cells"] = std::vector<std::vector<int>>(mesh.cells().begin(), mesh.cells().end());
  j["boundary"] = mesh.boundary();
  return j;
}

inline PolyMesh mesh_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1)
      throw MeshIOError("unsupported mesh file version " + j.at("version").dump());
    const DomainTag domain = domain_from_string(j.at("domain").get<std::string>());
    std::vector<Point2> vertices;
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 2) throw MeshIOError("vertex entry must be [x, y]: " + v.dump());
      vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    auto cells = j.at("cells").get<std::vector<std::vector<int>>>();
    auto boundary = j.at("boundary").get<std::vector<bool>>();
    return PolyMesh(std::move(vertices), std::move(cells), std::move(boundary), domain);
  } catch (const nlohmann::json::exception& e) {
    throw MeshIOError(std::string("malformed mesh: ") + e.what());
  } catch (const MeshError& e) {
    throw MeshIOError(std::string("invalid mesh: ") + e.what());
  }
}

inline void write_mesh(const std::filesystem::path& path, const PolyMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshIOError("cannot open " + path.string() + " for writing");
  out << mesh_to_json(mesh).dump() << '\n';
  if (!out) throw MeshIOError("failed writing " + path.string());
}

/// Reads a mesh; parse errors carry the byte position reported by the parser.
inline PolyMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshIOError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw MeshIOError(path.string() + ": " + e.what());
  }
  return mesh_from_json(j);
}

/// Legacy ASCII VTK, POLYDATA with one POLYGON per cell and optional nodal scalars.
inline void export_vtk(const std::filesystem::path& path, const PolyMesh& mesh,
                       std::optional<std::span<const double>> nodal = std::nullopt,
                       const std::string& field_name = "u") {
  std::ofstream out(path);
  if (!out) throw MeshIOError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\npolygonal mesh\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Point2& p : mesh.vertices()) out << p.x << ' ' << p.y << " 0\n";
  std::size_t total = 0;
  for (const auto& c : mesh.cells()) total += c.size() + 1;
  out << "POLYGONS " << mesh.num_cells() << ' ' << total << '\n';
  for (const auto& c : mesh.cells()) {
    out << c.size();
    for (int v : c) out << ' ' << v;
    out << '\n';
  }
  if (nodal) {
    if (nodal->size() != mesh.num_vertices())
      throw MeshIOError("nodal field has " + std::to_string(nodal->size()) + " values for " +
                        std::to_string(mesh.num_vertices()) + " vertices");
    out << "POINT_DATA " << mesh.num_vertices() << "\nSCALARS " << field_name
        << " double 1\nLOOKUP_TABLE default\n";
    for (double v : *nodal) out << v << '\n';
  }
  if (!out) throw MeshIOError("failed writing " + path.string());
}

}  // namespace vem
