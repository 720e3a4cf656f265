#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seatbear/agent.hpp"
#include "seatbear/geometry.hpp"
#include "seatbear/physics.hpp"

namespace seatbear {

struct SimParams {
  double gravity = 9.81;           ///< m/s^2, along -z
  double timestep = 1.0 / 240.0;   ///< frame length (s)
  int substeps = 8;
  int solver_iterations = 2;       ///< position-constraint passes per substep
  double restitution = 0.0;        ///< must stay 0: all contacts are inelastic
  double ground_friction = 0.8;
  double agent_friction = 0.8;
  double ke_threshold = 1e-4;      ///< J
  double settle_window = 0.25;     ///< s below ke_threshold to count as settled
  double max_time = 10.0;          ///< s
  double agent_height = 0.9;       ///< m
  double agent_mass = 12.0;        ///< kg
  double drop_damping = 6.0;       ///< joint damping during imagination drops (1/s)
  double drop_joint_friction = 4.0;  ///< N m, dry joint friction during drops
  double bear_damping = 200.0;     ///< joint damping of the placed bear (1/s)
  bool lock_bear_joints = false;   ///< keep the bear's joints locked after release (else they go limp)
  double contact_margin = 0.005;   ///< m, proximity that still counts as contact
  double sanity_bound = 50.0;      ///< m, positions beyond this signal a blow-up
  double drop_height = 0.15;       ///< m above the chair OBB top

  void validate() const;
};

nlohmann::json to_json(const SimParams& p);
SimParams sim_params_from_json(const nlohmann::json& j);

/// Resulting configuration of the agent in a scene.
struct Configuration {
  Eigen::VectorXd theta;                 ///< joint angles, length n
  RigidTransform base;                   ///< pelvis link frame in the world
  std::vector<Vec3> link_z;              ///< world z axis of every link, length m
  std::vector<int> contacts;             ///< contact points per link, length m
  bool settled = false;                  ///< KE criterion met before max_time
  double sim_time = 0.0;

  /// Pelvis-link origin height above the ground plane.
  double height() const { return base.translation.z(); }
};

/// Configuration of a kinematically posed agent (no contacts).
Configuration configuration_from_pose(const AgentModel& agent, const RigidTransform& base,
                                      const Eigen::VectorXd& theta);

enum class JointMode { Damped, Locked };

/// Physics scene holding an optional chair and one articulated agent.
/// A scene is single-owner; distinct scenes can be stepped concurrently.
class Scene {
 public:
  Scene(const SimParams& params, const AgentModel& agent);

  /// Adds the chair as a dynamic body. `chair_to_world` places the chair
  /// mesh (given in its own frame) in the world.
  void add_chair(const Mesh& chair, const RigidTransform& chair_to_world);
  /// Spawns the agent with the given base pose and joint angles.
  void add_agent(const RigidTransform& base, const Eigen::VectorXd& theta, JointMode mode,
                 double damping, double joint_friction = 0.0);

  void step();
  double kinetic_energy() const { return world_.kinetic_energy(); }
  /// Frame-averaged kinetic energy used by the settle criterion.
  double settle_energy() const { return world_.frame_kinetic_energy(); }
  double mechanical_energy() const { return world_.kinetic_energy() + world_.potential_energy(); }
  /// Throws Diverged if any body left the sanity box or became non-finite.
  void check_sanity() const;

  Configuration configuration() const;
  bool has_chair() const { return chair_body_ >= 0; }
  /// Current chair frame (the frame the chair mesh was given in) in the world.
  RigidTransform chair_transform() const;
  double time() const { return world_.time(); }

  /// Pelvis attachment used to carry the agent kinematically.
  void hold_base(const RigidTransform& base);
  void release_base();
  /// Relocks every joint at its current angle, or frees it with damping.
  void set_joint_mode(JointMode mode, double damping, double joint_friction = 0.0);
  bool holding() const { return hold_ >= 0; }

  const AgentModel& agent() const { return agent_; }
  const physics::World& world() const { return world_; }
  nlohmann::json snapshot() const;

 private:
  SimParams params_;
  AgentModel agent_;
  physics::World world_;
  int chair_body_ = -1;
  Vec3 chair_com_ = Vec3::Zero();
  Mesh chair_mesh_;
  std::vector<int> link_bodies_;
  int hold_ = -1;
};

/// Imagination drop: chair (already in its OBB-aligned frame) rotated by
/// `chair_yaw` about the world z axis; agent in its pre-sitting configuration
/// facing +x with its base at `drop_xy` on the plane `drop_height` above the
/// chair OBB top. An empty chair mesh gives a ground-only scene.
Scene build_drop_scene(const Mesh& aligned_chair, double chair_yaw, const AgentModel& agent,
                       const Vec2& drop_xy, const SimParams& params);

/// Steps until kinetic energy stays below the threshold for the settle
/// window, or max_time elapses. Throws Diverged on blow-up.
Configuration settle(Scene& scene, const SimParams& params);

/// Agent model with the harness' height/mass scaling applied to the default
/// child model.
AgentModel default_agent(const SimParams& params);

}  // namespace seatbear
