#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "seatbear/geometry.hpp"

namespace seatbear {

/// Wavefront OBJ (ASCII). Polygons are fan-triangulated; normals and texture
/// coordinates are ignored. Degenerate triangles are dropped with a warning
/// on stderr.
Mesh read_obj(std::istream& in);
void write_obj(std::ostream& out, const Mesh& mesh);

/// Binary STL. Coincident vertices are welded.
Mesh read_stl(std::istream& in);
void write_stl(std::ostream& out, const Mesh& mesh);

/// Dispatches on the file extension (.obj / .stl). When a sidecar
/// `<file>.physics.json` exists its attributes are used; otherwise mass
/// properties are computed from the closed surface at `default_density`.
Mesh load_mesh(const std::filesystem::path& path, double default_density = 600.0);
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);

nlohmann::json to_json(const MassProperties& props);
MassProperties mass_properties_from_json(const nlohmann::json& j);

/// Sidecar path used by load_mesh: "chair.obj" -> "chair.obj.physics.json".
std::filesystem::path physics_sidecar_path(const std::filesystem::path& mesh_path);

}  // namespace seatbear
