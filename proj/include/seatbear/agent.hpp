#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seatbear/geometry.hpp"
#include "seatbear/physics.hpp"

namespace seatbear {

/// Contact partition used by the sitting test. `Other` links (head, arms)
/// are not contact-relevant.
enum class BodyPart { Lower, Upper, Other };

/// One rigid link plus the revolute joint connecting it to its parent.
/// Link frames coincide with the parent frame at zero joint angles; the
/// pelvis frame has x forward, y left and z up.
struct AgentLink {
  std::string name;
  int parent = -1;                    ///< parent link index; -1 for the pelvis
  std::string joint;                  ///< joint name (empty for the pelvis)
  Vec3 joint_origin = Vec3::Zero();   ///< in the parent link frame
  Vec3 axis = Vec3::UnitY();          ///< in the parent link frame
  double lower = -kPi;
  double upper = kPi;
  double damping = 0.0;               ///< 1/s, relative angular velocity decay
  double mass = 1.0;
  Vec3 com = Vec3::Zero();            ///< link frame
  Vec3 inertia_diag = Vec3::Constant(1e-3);  ///< about the COM, link axes
  std::vector<physics::Sphere> spheres;      ///< link frame
  BodyPart part = BodyPart::Lower;
};

/// Articulated humanoid used both as the imagination agent and as the bear.
/// Link 0 is the pelvis (base link). Joint i drives link i + 1.
struct AgentModel {
  std::vector<AgentLink> links;
  Eigen::VectorXd pre_sitting;  ///< joint angles before a drop
  Eigen::VectorXd key;          ///< joint angles of the key sitting configuration
  /// Initial base rotation: upright, facing world +x.
  Mat3 r0 = Mat3::Identity();

  int link_count() const { return static_cast<int>(links.size()); }
  int joint_count() const { return static_cast<int>(links.size()) - 1; }
  double total_mass() const;
  std::vector<std::string> joint_names() const;

  /// Throws ConfigError on structural problems (tree order, sizes, limits).
  void validate() const;

  /// Child-scale default: 9 links, 8 pitch joints, 0.9 m, 12 kg.
  static AgentModel default_child(double height = 0.9, double mass = 12.0);
  /// Uniformly rescales lengths and masses.
  AgentModel scaled(double length_scale, double mass_scale) const;
};

/// World frames of every link for a base pose and joint vector.
std::vector<RigidTransform> agent_forward_kinematics(const AgentModel& agent,
                                                     const RigidTransform& base,
                                                     const Eigen::VectorXd& theta);

/// Agent description file (JSON, URDF-like: links, joints, limits, damping,
/// lower/upper-body tags, pre-sitting and key configurations).
nlohmann::json agent_to_json(const AgentModel& agent);
AgentModel agent_from_json(const nlohmann::json& j);
AgentModel load_agent(const std::filesystem::path& path);

}  // namespace seatbear
