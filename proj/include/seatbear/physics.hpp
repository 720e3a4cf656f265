#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <cstdint>
#include <vector>

#include "seatbear/geometry.hpp"

/// Small deterministic rigid-body engine used for the sitting drops and the
/// bear-release check. Bodies are simulated in maximal coordinates with
/// substepped position-based dynamics: hinge joints, joint limits, joint
/// drives, attachments and contacts are all positional constraints, and
/// friction, restitution (always zero) and joint damping are applied as
/// velocity corrections after each substep.
///
/// Collision model: articulated bodies carry sets of spheres; static or
/// dynamic props carry a triangle mesh plus support points that are tested
/// against the ground plane z = 0. Agent self-collision is not modelled.
namespace seatbear::physics {

using Quat = Eigen::Quaterniond;

struct Sphere {
  Vec3 center = Vec3::Zero();  ///< body frame
  double radius = 0.0;
};

/// Triangle mesh with an AABB tree for sphere proximity queries.
class TriangleMeshShape {
 public:
  explicit TriangleMeshShape(Mesh mesh);

  struct Hit {
    Vec3 point;   ///< closest point on the surface, mesh frame
    Vec3 normal;  ///< unit, from surface toward the query point
    double distance;
  };
  /// Closest surface point within `radius` of `p`, if any.
  std::optional<Hit> closest_within(const Vec3& p, double radius) const;

  const Mesh& mesh() const { return mesh_; }

 private:
  struct Node {
    Aabb box;
    int left = -1, right = -1;
    int first = 0, count = 0;
  };
  int build(int first, int count);

  Mesh mesh_;
  std::vector<int> order_;
  std::vector<Aabb> tri_boxes_;
  std::vector<Vec3> tri_normals_;
  std::vector<Node> nodes_;
};

struct BodyDef {
  std::string name;
  double mass = 1.0;
  Mat3 inertia = Mat3::Identity();  ///< about the body origin (its COM)
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  std::vector<Sphere> spheres;
  std::shared_ptr<const TriangleMeshShape> mesh;  ///< in body frame
  std::vector<Vec3> support_points;               ///< body frame, tested against ground
  bool fixed = false;
  double friction = 0.8;
};

struct HingeDef {
  int parent = -1;
  int child = -1;
  Vec3 anchor_parent = Vec3::Zero();
  Vec3 anchor_child = Vec3::Zero();
  Vec3 axis_parent = Vec3::UnitY();
  Vec3 axis_child = Vec3::UnitY();
  /// Perpendicular to the axis; the joint angle is zero when both refs align.
  Vec3 ref_parent = Vec3::UnitZ();
  Vec3 ref_child = Vec3::UnitZ();
  double lower = -kPi;
  double upper = kPi;
  /// Relative angular-velocity damping rate about the axis (1/s).
  double damping = 0.0;
  /// Dry friction about the axis (N m): relative spin is held until the
  /// required torque exceeds this bound.
  double friction_torque = 0.0;
  std::optional<double> drive_target;
  double drive_compliance = 0.0;  ///< rad / (N m); 0 = rigid lock
};

struct WorldParams {
  Vec3 gravity{0.0, 0.0, -9.81};
  int substeps = 4;
  /// Gauss-Seidel passes over all position constraints per substep.
  int iterations = 1;
  double static_friction_scale = 1.0;
  double dynamic_friction_scale = 0.9;
  /// Velocity decay rates (1/s) applied to every dynamic body.
  double linear_damping = 0.05;
  double angular_damping = 0.05;
  bool ground = true;
};

struct BodyState {
  Vec3 x = Vec3::Zero();
  Quat q = Quat::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

class World {
 public:
  explicit World(WorldParams params = {});

  int add_body(BodyDef def);
  int add_hinge(HingeDef def);
  /// Changes the drive and friction of an existing hinge.
  void set_hinge_drive(int j, std::optional<double> target, double damping, double friction_torque);
  /// Pins a body to a kinematic target pose until detached.
  int attach(int body, const RigidTransform& target);
  void set_attachment_target(int attachment, const RigidTransform& target);
  void detach(int attachment);

  /// Advances one frame of length `dt` split into `params.substeps` substeps.
  void step(double dt);

  std::size_t body_count() const { return bodies_.size(); }
  const BodyDef& body_def(int i) const { return bodies_[i].def; }
  const BodyState& state(int i) const { return bodies_[i].state; }
  RigidTransform transform(int i) const;
  void set_state(int i, const BodyState& s);

  std::size_t hinge_count() const { return hinges_.size(); }
  const HingeDef& hinge(int j) const { return hinges_[j]; }
  double hinge_angle(int j) const;

  double kinetic_energy() const;
  /// Kinetic energy from the net displacement over the last step() call.
  /// Sub-step solver jitter cancels out, so this is the settle measure.
  double frame_kinetic_energy() const;
  /// Gravitational potential energy relative to z = 0.
  double potential_energy() const;

  /// Contact points per body against everything else, counting surfaces within
  /// `margin` of a collision shape.
  std::vector<int> contact_counts(double margin) const;

  double time() const { return time_; }
  const WorldParams& params() const { return params_; }

 private:
  struct Body {
    BodyDef def;
    BodyState state;
    Vec3 x_prev = Vec3::Zero();
    Quat q_prev = Quat::Identity();
    Vec3 v_frame = Vec3::Zero();
    Vec3 w_frame = Vec3::Zero();
    double inv_mass = 0.0;
    Mat3 inv_inertia_local = Mat3::Zero();
  };
  struct Attachment {
    int body;
    RigidTransform target;
    bool active = true;
  };
  struct Contact {
    int a;       ///< body owning the sphere / support point
    int b;       ///< other body, or -1 for the ground
    Vec3 ra;     ///< contact point on a, body-a frame
    Vec3 rb;     ///< contact point on b, body-b frame (world if b = -1)
    Vec3 n;      ///< world normal pointing from b toward a
    double depth;
    double friction;
    std::uint64_t key = 0;  ///< (a, feature, b) identity, stable across substeps
    double lambda_n = 0.0;
  };

  Mat3 inv_inertia_world(const Body& b) const;
  double generalized_inv_mass(const Body* b, const Vec3& r, const Vec3& n) const;
  double generalized_inv_mass_angular(const Body* b, const Vec3& n) const;
  Body* body_ptr(int i) { return i >= 0 ? &bodies_[i] : nullptr; }

  /// Moves the point r1 on body 1 toward r2 on body 2 by `corr`.
  double apply_positional(Body* b1, Body* b2, const Vec3& r1, const Vec3& r2, const Vec3& corr,
                          double compliance, double h);
  /// Rotates body 1 by `rotvec` relative to body 2.
  void apply_angular(Body* b1, Body* b2, const Vec3& rotvec, double compliance, double h);
  void apply_impulse(Body* b, const Vec3& p, const Vec3& r, double sign);

  void collect_contacts(std::vector<Contact>& out, double margin) const;
  void solve_hinge(int index, double h);
  void solve_contacts(double h, bool collect);
  void solve_velocities(double h);

  WorldParams params_;
  std::vector<Body> bodies_;
  std::vector<HingeDef> hinges_;
  std::vector<double> hinge_stick_angle_;  ///< dry-friction anchor angle (NaN = unset)
  std::vector<Attachment> attachments_;
  std::vector<Contact> contacts_;
  /// Static-friction anchors per contact key: the point on b (b frame, or
  /// world for the ground) the contact point on a sticks to.
  std::unordered_map<std::uint64_t, Vec3> stick_;
  double time_ = 0.0;
};

}  // namespace seatbear::physics
