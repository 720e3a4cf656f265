#pragma once

#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seatbear/geometry.hpp"

// JSON encodings of the small geometric types. Doubles survive a dump/parse
// round trip exactly, so records written with these compare byte-identically.
namespace seatbear::json_util {

template <typename Derived>
nlohmann::json vec(const Eigen::MatrixBase<Derived>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v[i];
  return out;
}

inline Eigen::VectorXd vecx(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vec3 vec3(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw nlohmann::json::type_error::create(302, "expected 3 numbers", &j);
  return {v[0], v[1], v[2]};
}

inline Vec2 vec2(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw nlohmann::json::type_error::create(302, "expected 2 numbers", &j);
  return {v[0], v[1]};
}

inline nlohmann::json obb(const Obb& b) {
  return {{"center", vec(b.center)}, {"yaw", b.yaw}, {"half_extents", vec(b.half_extents)}};
}

inline Obb obb(const nlohmann::json& j) {
  Obb b;
  b.center = vec3(j.at("center"));
  b.yaw = j.at("yaw").get<double>();
  b.half_extents = vec3(j.at("half_extents"));
  return b;
}

/// Rotation stored row-major.
inline nlohmann::json transform(const RigidTransform& g) {
  std::vector<double> r;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(g.rotation(i, k));
  return {{"rotation", r}, {"translation", vec(g.translation)}};
}

inline RigidTransform transform(const nlohmann::json& j) {
  const auto r = j.at("rotation").get<std::vector<double>>();
  if (r.size() != 9) throw nlohmann::json::type_error::create(302, "expected 9 numbers", &j);
  RigidTransform g;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) g.rotation(i, k) = r[static_cast<std::size_t>(3 * i + k)];
  g.translation = vec3(j.at("translation"));
  return g;
}

inline nlohmann::json planar(const PlanarPose& p) { return {p.x, p.y, p.heading}; }

inline PlanarPose planar(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw nlohmann::json::type_error::create(302, "expected 3 numbers", &j);
  return {v[0], v[1], v[2]};
}

}  // namespace seatbear::json_util
