#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace seatbear {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Rotation by `yaw` radians about the world z axis.
Mat3 rot_z(double yaw);

/// Yaw of a rotation, read from the image of the x axis projected to the
/// xy-plane.
double yaw_of(const Mat3& r);

/// Element of SE(3). Acts on points as g . p = R p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_yaw(double yaw, const Vec3& t = Vec3::Zero()) {
    return {rot_z(yaw), t};
  }
  /// Yaw of `yaw` about the vertical axis through `pivot`.
  static RigidTransform yaw_about(double yaw, const Vec3& pivot);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 inverse_apply(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  /// (this * other) . p == this . (other . p)
  RigidTransform operator*(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
  double yaw() const { return yaw_of(rotation); }

  /// Re-orthonormalises the rotation (polar decomposition via SVD).
  /// Callers that chain many compositions call this every few hundred steps.
  void renormalize();
};

/// Element of SE(2): planar position and heading.
struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 direction() const { return {std::cos(heading), std::sin(heading)}; }
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool empty() const { return (lo.array() > hi.array()).any(); }
};

struct MassProperties {
  double mass = 1.0;
  Vec3 com = Vec3::Zero();
  /// Inertia tensor about the center of mass, in the mesh frame.
  Mat3 inertia = Mat3::Identity();
  double friction = 0.8;
};

using Triangle = std::array<int, 3>;

/// Triangle surface. Vertex units are meters.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> faces;
  MassProperties physical;

  bool empty() const { return vertices.empty(); }
  Aabb bounds() const;
  Mesh transformed(const RigidTransform& g) const;
  /// Throws MeshFormatError on out-of-range indices.
  void validate() const;
  /// Drops zero-area faces; returns how many were removed.
  std::size_t drop_degenerate_faces(double area_eps = 1e-14);
  /// Appends another mesh's geometry (physical attributes untouched).
  void append(const Mesh& other);
};

/// Volume, center of mass and inertia of a closed, outward-oriented mesh
/// with uniform density. Friction is left at its default.
MassProperties compute_mass_properties(const Mesh& mesh, double density);

/// Z-aligned oriented bounding box. `yaw` is the angle of the box x axis.
struct Obb {
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;
  Vec3 half_extents = Vec3::Zero();

  double footprint_area() const { return 4.0 * half_extents.x() * half_extents.y(); }
  double top() const { return center.z() + half_extents.z(); }
  double bottom() const { return center.z() - half_extents.z(); }
  Vec2 axis_x() const { return {std::cos(yaw), std::sin(yaw)}; }
  Vec2 axis_y() const { return {-std::sin(yaw), std::cos(yaw)}; }
  /// Footprint corners, counterclockwise.
  std::array<Vec2, 4> footprint() const;
  bool contains(const Vec3& p, double tol = 0.0) const;
};

/// Convex hull of planar points (Andrew's monotone chain), counterclockwise,
/// without collinear points.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points);

/// Minimum-footprint z-aligned box containing every vertex.
/// Throws EmptyMesh when there are no vertices.
Obb compute_obb(const Mesh& mesh);
Obb compute_obb(std::span<const Vec3> points);

/// Pure yaw-plus-horizontal-translation that maps the box axes onto the world
/// axes and the box center onto the z axis.
RigidTransform obb_alignment_transform(const Obb& obb);

/// Box obtained by moving `obb` rigidly with a yaw-only transform.
Obb transform_obb(const Obb& obb, const RigidTransform& g);

}  // namespace seatbear
