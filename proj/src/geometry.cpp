#include "seatbear/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "seatbear/error.hpp"

namespace seatbear {

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Mat3 rot_z(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

double yaw_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

RigidTransform RigidTransform::yaw_about(double yaw, const Vec3& pivot) {
  const Mat3 r = rot_z(yaw);
  Vec3 c = pivot;
  c.z() = 0.0;
  return {r, c - r * c};
}

void RigidTransform::renormalize() {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  rotation = r;
}

Aabb Mesh::bounds() const {
  Aabb b;
  for (const auto& v : vertices) b.extend(v);
  return b;
}

Mesh Mesh::transformed(const RigidTransform& g) const {
  Mesh out = *this;
  for (auto& v : out.vertices) v = g.apply(v);
  out.physical.com = g.apply(physical.com);
  out.physical.inertia = g.rotation * physical.inertia * g.rotation.transpose();
  return out;
}

void Mesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (const auto& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) {
        throw MeshFormatError("face index " + std::to_string(idx) +
                              " out of range (vertex count " + std::to_string(n) + ")");
      }
    }
  }
}

std::size_t Mesh::drop_degenerate_faces(double area_eps) {
  const auto before = faces.size();
  std::erase_if(faces, [&](const Triangle& f) {
    const Vec3 e1 = vertices[f[1]] - vertices[f[0]];
    const Vec3 e2 = vertices[f[2]] - vertices[f[0]];
    return 0.5 * e1.cross(e2).norm() <= area_eps;
  });
  return before - faces.size();
}

void Mesh::append(const Mesh& other) {
  const int offset = static_cast<int>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& f : other.faces) faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
}

// Volume integrals over a closed triangle mesh (Eberly, "Polyhedral Mass
// Properties"). Integrals are accumulated per face from the divergence
// theorem and converted to inertia about the centroid at the end.
MassProperties compute_mass_properties(const Mesh& mesh, double density) {
  if (mesh.empty()) throw EmptyMesh("compute_mass_properties: mesh has no vertices");
  auto subexpressions = [](double w0, double w1, double w2, double& f1, double& f2,
                           double& f3, double& g0, double& g1, double& g2) {
    const double temp0 = w0 + w1;
    f1 = temp0 + w2;
    const double temp1 = w0 * w0;
    const double temp2 = temp1 + w1 * temp0;
    f2 = temp2 + w2 * f1;
    f3 = w0 * temp1 + w1 * temp2 + w2 * f2;
    g0 = f2 + w0 * (f1 + w0);
    g1 = f2 + w1 * (f1 + w1);
    g2 = f2 + w2 * (f1 + w2);
  };
  std::array<double, 10> integral{};
  for (const auto& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3& p1 = mesh.vertices[f[1]];
    const Vec3& p2 = mesh.vertices[f[2]];
    const Vec3 d = (p1 - p0).cross(p2 - p0);
    double f1x, f2x, f3x, g0x, g1x, g2x;
    double f1y, f2y, f3y, g0y, g1y, g2y;
    double f1z, f2z, f3z, g0z, g1z, g2z;
    subexpressions(p0.x(), p1.x(), p2.x(), f1x, f2x, f3x, g0x, g1x, g2x);
    subexpressions(p0.y(), p1.y(), p2.y(), f1y, f2y, f3y, g0y, g1y, g2y);
    subexpressions(p0.z(), p1.z(), p2.z(), f1z, f2z, f3z, g0z, g1z, g2z);
    integral[0] += d.x() * f1x;
    integral[1] += d.x() * f2x;
    integral[2] += d.y() * f2y;
    integral[3] += d.z() * f2z;
    integral[4] += d.x() * f3x;
    integral[5] += d.y() * f3y;
    integral[6] += d.z() * f3z;
    integral[7] += d.x() * (p0.y() * g0x + p1.y() * g1x + p2.y() * g2x);
    integral[8] += d.y() * (p0.z() * g0y + p1.z() * g1y + p2.z() * g2y);
    integral[9] += d.z() * (p0.x() * g0z + p1.x() * g1z + p2.x() * g2z);
  }
  constexpr std::array<double, 10> kMult{1.0 / 6,  1.0 / 24,  1.0 / 24,  1.0 / 24,  1.0 / 60,
                                         1.0 / 60, 1.0 / 60, 1.0 / 120, 1.0 / 120, 1.0 / 120};
  for (std::size_t i = 0; i < integral.size(); ++i) integral[i] *= kMult[i];

  const double volume = integral[0];
  if (!(volume > 0.0)) {
    throw MeshFormatError("mesh is not closed or has inward-facing triangles (volume " +
                          std::to_string(volume) + ")");
  }
  MassProperties props;
  props.mass = density * volume;
  props.com = Vec3(integral[1], integral[2], integral[3]) / volume;
  const Vec3& c = props.com;
  const double ixx = integral[5] + integral[6] - volume * (c.y() * c.y() + c.z() * c.z());
  const double iyy = integral[4] + integral[6] - volume * (c.z() * c.z() + c.x() * c.x());
  const double izz = integral[4] + integral[5] - volume * (c.x() * c.x() + c.y() * c.y());
  const double ixy = -(integral[7] - volume * c.x() * c.y());
  const double iyz = -(integral[8] - volume * c.y() * c.z());
  const double ixz = -(integral[9] - volume * c.z() * c.x());
  props.inertia << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
  props.inertia *= density;
  return props;
}

std::array<Vec2, 4> Obb::footprint() const {
  const Vec2 c = center.head<2>();
  const Vec2 ax = axis_x() * half_extents.x();
  const Vec2 ay = axis_y() * half_extents.y();
  return {c - ax - ay, c + ax - ay, c + ax + ay, c - ax + ay};
}

bool Obb::contains(const Vec3& p, double tol) const {
  const Vec2 d = p.head<2>() - center.head<2>();
  return std::abs(d.dot(axis_x())) <= half_extents.x() + tol &&
         std::abs(d.dot(axis_y())) <= half_extents.y() + tol &&
         std::abs(p.z() - center.z()) <= half_extents.z() + tol;
}

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    const Vec2& p = pts[i - 1];
    while (k >= t && cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

Obb compute_obb(const Mesh& mesh) { return compute_obb(std::span<const Vec3>(mesh.vertices)); }

Obb compute_obb(std::span<const Vec3> points) {
  if (points.empty()) throw EmptyMesh("compute_obb: no vertices");
  constexpr double kHalfPi = 0.5 * kPi;
  constexpr double kMinHalfExtent = 1e-9;

  double zlo = points[0].z(), zhi = points[0].z();
  std::vector<Vec2> xy;
  xy.reserve(points.size());
  for (const auto& p : points) {
    xy.emplace_back(p.x(), p.y());
    zlo = std::min(zlo, p.z());
    zhi = std::max(zhi, p.z());
  }
  const auto hull = convex_hull_2d(std::move(xy));

  // One flush edge of the minimum-area rectangle lies on a hull edge, so the
  // candidate yaws are the hull edge directions reduced modulo pi/2.
  std::vector<double> candidates;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 e = hull[(i + 1) % hull.size()] - hull[i];
    if (e.squaredNorm() == 0.0) continue;
    double yaw = std::fmod(std::atan2(e.y(), e.x()), kHalfPi);
    if (yaw < 0) yaw += kHalfPi;
    if (yaw > kHalfPi - 1e-12) yaw = 0.0;
    candidates.push_back(yaw);
  }
  if (candidates.empty()) candidates.push_back(0.0);

  struct Rect {
    double yaw, area;
    Vec2 lo, hi;
  };
  auto fit = [&](double yaw) {
    const Vec2 ax(std::cos(yaw), std::sin(yaw));
    const Vec2 ay(-ax.y(), ax.x());
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const auto& p : hull) {
      const Vec2 q(p.dot(ax), p.dot(ay));
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
    return Rect{yaw, (hi.x() - lo.x()) * (hi.y() - lo.y()), lo, hi};
  };

  Rect best = fit(candidates.front());
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const Rect r = fit(candidates[i]);
    const double tol = 1e-12 * std::max(1.0, best.area);
    if (r.area < best.area - tol || (std::abs(r.area - best.area) <= tol && r.yaw < best.yaw)) {
      best = r;
    }
  }

  const Vec2 ax(std::cos(best.yaw), std::sin(best.yaw));
  const Vec2 ay(-ax.y(), ax.x());
  const Vec2 mid = 0.5 * (best.lo + best.hi);
  Obb obb;
  obb.yaw = best.yaw;
  const Vec2 c = ax * mid.x() + ay * mid.y();
  obb.center = Vec3(c.x(), c.y(), 0.5 * (zlo + zhi));
  obb.half_extents = Vec3(std::max(0.5 * (best.hi.x() - best.lo.x()), kMinHalfExtent),
                          std::max(0.5 * (best.hi.y() - best.lo.y()), kMinHalfExtent),
                          std::max(0.5 * (zhi - zlo), kMinHalfExtent));
  return obb;
}

RigidTransform obb_alignment_transform(const Obb& obb) {
  const Mat3 r = rot_z(-obb.yaw);
  const Vec3 c(obb.center.x(), obb.center.y(), 0.0);
  return {r, -(r * c)};
}

Obb transform_obb(const Obb& obb, const RigidTransform& g) {
  Obb out = obb;
  out.center = g.apply(obb.center);
  out.yaw = wrap_angle(obb.yaw + g.yaw());
  return out;
}

}  // namespace seatbear
