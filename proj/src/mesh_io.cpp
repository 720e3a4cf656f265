#include "seatbear/mesh_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "seatbear/error.hpp"

namespace seatbear {

namespace {

void finish_loaded(Mesh& mesh, const std::string& what) {
  if (mesh.empty()) throw EmptyMesh(what + ": no vertices");
  mesh.validate();
  if (const auto dropped = mesh.drop_degenerate_faces(); dropped > 0) {
    std::cerr << "warning: " << what << ": dropped " << dropped << " degenerate triangle(s)\n";
  }
}

int parse_obj_index(const std::string& token, int vertex_count) {
  const auto slash = token.find('/');
  const int idx = std::stoi(token.substr(0, slash));
  if (idx > 0) return idx - 1;
  if (idx < 0) return vertex_count + idx;
  throw MeshFormatError("OBJ: face index 0 is invalid");
}

}  // namespace

Mesh read_obj(std::istream& in) {
  Mesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw MeshFormatError("OBJ line " + std::to_string(line_no) + ": bad vertex");
      }
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        try {
          poly.push_back(parse_obj_index(tok, static_cast<int>(mesh.vertices.size())));
        } catch (const std::invalid_argument&) {
          throw MeshFormatError("OBJ line " + std::to_string(line_no) + ": bad face index");
        }
      }
      if (poly.size() < 3) {
        throw MeshFormatError("OBJ line " + std::to_string(line_no) + ": face with < 3 vertices");
      }
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
      }
    }
  }
  finish_loaded(mesh, "OBJ");
  return mesh;
}

void write_obj(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

Mesh read_stl(std::istream& in) {
  char header[80];
  if (!in.read(header, sizeof(header))) throw MeshFormatError("STL: truncated header");
  std::uint32_t count = 0;
  if (!in.read(reinterpret_cast<char*>(&count), 4)) throw MeshFormatError("STL: missing triangle count");
  Mesh mesh;
  std::map<std::array<float, 3>, int> weld;
  for (std::uint32_t t = 0; t < count; ++t) {
    float data[12];
    std::uint16_t attr;
    if (!in.read(reinterpret_cast<char*>(data), sizeof(data)) ||
        !in.read(reinterpret_cast<char*>(&attr), 2)) {
      throw MeshFormatError("STL: truncated at triangle " + std::to_string(t));
    }
    Triangle tri;
    for (int k = 0; k < 3; ++k) {
      const std::array<float, 3> key{data[3 + 3 * k], data[4 + 3 * k], data[5 + 3 * k]};
      auto [it, inserted] = weld.try_emplace(key, static_cast<int>(mesh.vertices.size()));
      if (inserted) mesh.vertices.emplace_back(key[0], key[1], key[2]);
      tri[k] = it->second;
    }
    mesh.faces.push_back(tri);
  }
  finish_loaded(mesh, "STL");
  return mesh;
}

void write_stl(std::ostream& out, const Mesh& mesh) {
  char header[80] = {};
  std::strncpy(header, "seatbear binary stl", sizeof(header) - 1);
  out.write(header, sizeof(header));
  const auto count = static_cast<std::uint32_t>(mesh.faces.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() > 0) n.normalize();
    float data[12];
    for (int k = 0; k < 3; ++k) data[k] = static_cast<float>(n[k]);
    for (int k = 0; k < 3; ++k) {
      data[3 + k] = static_cast<float>(a[k]);
      data[6 + k] = static_cast<float>(b[k]);
      data[9 + k] = static_cast<float>(c[k]);
    }
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(data), sizeof(data));
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
}

std::filesystem::path physics_sidecar_path(const std::filesystem::path& mesh_path) {
  return mesh_path.string() + ".physics.json";
}

nlohmann::json to_json(const MassProperties& p) {
  nlohmann::json j;
  j["mass"] = p.mass;
  j["com"] = {p.com.x(), p.com.y(), p.com.z()};
  j["inertia"] = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) j["inertia"].push_back({p.inertia(r, 0), p.inertia(r, 1), p.inertia(r, 2)});
  j["friction"] = p.friction;
  return j;
}

MassProperties mass_properties_from_json(const nlohmann::json& j) {
  MassProperties p;
  try {
    p.mass = j.at("mass").get<double>();
    const auto com = j.at("com");
    p.com = Vec3(com.at(0).get<double>(), com.at(1).get<double>(), com.at(2).get<double>());
    const auto& in = j.at("inertia");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p.inertia(r, c) = in.at(r).at(c).get<double>();
    p.friction = j.value("friction", p.friction);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("physical attributes: ") + e.what());
  }
  if (!(p.mass > 0)) throw ConfigError("physical attributes: mass must be > 0");
  return p;
}

Mesh load_mesh(const std::filesystem::path& path, double default_density) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshFormatError("cannot open " + path.string());
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  Mesh mesh;
  if (ext == ".obj") {
    mesh = read_obj(in);
  } else if (ext == ".stl") {
    mesh = read_stl(in);
  } else {
    throw MeshFormatError("unsupported mesh extension '" + ext + "'");
  }
  const auto sidecar = physics_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream js(sidecar);
    nlohmann::json j;
    try {
      js >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(sidecar.string() + ": " + e.what());
    }
    mesh.physical = mass_properties_from_json(j);
  } else {
    const double friction = mesh.physical.friction;
    mesh.physical = compute_mass_properties(mesh, default_density);
    mesh.physical.friction = friction;
  }
  return mesh;
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshFormatError("cannot write " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".stl") {
    write_stl(out, mesh);
  } else {
    write_obj(out, mesh);
  }
  std::ofstream side(physics_sidecar_path(path));
  side << to_json(mesh.physical).dump(2) << '\n';
}

}  // namespace seatbear
