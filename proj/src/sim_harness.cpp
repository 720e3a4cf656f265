#include "seatbear/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "seatbear/error.hpp"

namespace seatbear {

void SimParams::validate() const {
  if (!(timestep > 0)) throw ConfigError("sim: timestep must be > 0");
  if (substeps < 1) throw ConfigError("sim: substeps must be >= 1");
  if (solver_iterations < 1) throw ConfigError("sim: solver_iterations must be >= 1");
  if (restitution != 0.0) throw ConfigError("sim: restitution is fixed at 0 (inelastic contacts)");
  if (!(ke_threshold > 0) || !(settle_window > 0) || !(max_time > 0)) {
    throw ConfigError("sim: settle criterion values must be > 0");
  }
  if (!(agent_height > 0) || !(agent_mass > 0)) throw ConfigError("sim: agent scale must be > 0");
  if (drop_damping < 0 || bear_damping < 0 || drop_joint_friction < 0) throw ConfigError("sim: damping must be >= 0");
}

nlohmann::json to_json(const SimParams& p) {
  return {{"gravity", p.gravity},
          {"timestep", p.timestep},
          {"substeps", p.substeps},
          {"solver_iterations", p.solver_iterations},
          {"restitution", p.restitution},
          {"ground_friction", p.ground_friction},
          {"agent_friction", p.agent_friction},
          {"ke_threshold", p.ke_threshold},
          {"settle_window", p.settle_window},
          {"max_time", p.max_time},
          {"agent_height", p.agent_height},
          {"agent_mass", p.agent_mass},
          {"drop_damping", p.drop_damping},
          {"drop_joint_friction", p.drop_joint_friction},
          {"bear_damping", p.bear_damping},
          {"lock_bear_joints", p.lock_bear_joints},
          {"contact_margin", p.contact_margin},
          {"sanity_bound", p.sanity_bound},
          {"drop_height", p.drop_height}};
}

SimParams sim_params_from_json(const nlohmann::json& j) {
  SimParams p;
  try {
    p.gravity = j.value("gravity", p.gravity);
    p.timestep = j.value("timestep", p.timestep);
    p.substeps = j.value("substeps", p.substeps);
    p.solver_iterations = j.value("solver_iterations", p.solver_iterations);
    p.restitution = j.value("restitution", p.restitution);
    p.ground_friction = j.value("ground_friction", p.ground_friction);
    p.agent_friction = j.value("agent_friction", p.agent_friction);
    p.ke_threshold = j.value("ke_threshold", p.ke_threshold);
    p.settle_window = j.value("settle_window", p.settle_window);
    p.max_time = j.value("max_time", p.max_time);
    p.agent_height = j.value("agent_height", p.agent_height);
    p.agent_mass = j.value("agent_mass", p.agent_mass);
    p.drop_damping = j.value("drop_damping", p.drop_damping);
    p.drop_joint_friction = j.value("drop_joint_friction", p.drop_joint_friction);
    p.bear_damping = j.value("bear_damping", p.bear_damping);
    p.lock_bear_joints = j.value("lock_bear_joints", p.lock_bear_joints);
    p.contact_margin = j.value("contact_margin", p.contact_margin);
    p.sanity_bound = j.value("sanity_bound", p.sanity_bound);
    p.drop_height = j.value("drop_height", p.drop_height);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sim params: ") + e.what());
  }
  p.validate();
  return p;
}

Configuration configuration_from_pose(const AgentModel& agent, const RigidTransform& base,
                                      const Eigen::VectorXd& theta) {
  Configuration c;
  const auto frames = agent_forward_kinematics(agent, base, theta);
  c.theta = theta;
  c.base = base;
  for (const auto& f : frames) c.link_z.push_back(f.rotation.col(2));
  c.contacts.assign(frames.size(), 0);
  return c;
}

AgentModel default_agent(const SimParams& params) {
  return AgentModel::default_child(params.agent_height, params.agent_mass);
}

Scene::Scene(const SimParams& params, const AgentModel& agent)
    : params_(params), agent_(agent), world_([&] {
        physics::WorldParams wp;
        wp.gravity = Vec3(0, 0, -params.gravity);
        wp.substeps = params.substeps;
        wp.iterations = params.solver_iterations;
        return wp;
      }()) {
  params_.validate();
  agent_.validate();
}

void Scene::add_chair(const Mesh& chair, const RigidTransform& chair_to_world) {
  if (chair.empty()) return;
  chair_com_ = chair.physical.com;
  chair_mesh_ = chair;

  Mesh local = chair;
  for (auto& v : local.vertices) v -= chair_com_;

  // Only the lower part of an upright chair can meet the floor.
  const auto box = chair.bounds();
  const double band = box.lo.z() + 0.3 * (box.hi.z() - box.lo.z());
  std::map<std::array<double, 3>, bool> seen;
  physics::BodyDef def;
  for (const auto& v : chair.vertices) {
    if (v.z() > band) continue;
    if (!seen.try_emplace({v.x(), v.y(), v.z()}, true).second) continue;
    def.support_points.push_back(v - chair_com_);
  }
  def.name = "chair";
  def.mass = chair.physical.mass;
  def.inertia = chair.physical.inertia;
  def.position = chair_to_world.apply(chair_com_);
  def.orientation = physics::Quat(chair_to_world.rotation);
  def.mesh = std::make_shared<physics::TriangleMeshShape>(std::move(local));
  def.friction = chair.physical.friction;
  chair_body_ = world_.add_body(std::move(def));
}

void Scene::add_agent(const RigidTransform& base, const Eigen::VectorXd& theta, JointMode mode,
                      double damping, double joint_friction) {
  const auto frames = agent_forward_kinematics(agent_, base, theta);
  link_bodies_.clear();
  for (std::size_t i = 0; i < agent_.links.size(); ++i) {
    const auto& l = agent_.links[i];
    physics::BodyDef def;
    def.name = l.name;
    def.mass = l.mass;
    def.inertia = l.inertia_diag.asDiagonal();
    def.position = frames[i].apply(l.com);
    def.orientation = physics::Quat(frames[i].rotation);
    for (const auto& s : l.spheres) def.spheres.push_back({s.center - l.com, s.radius});
    def.friction = params_.agent_friction;
    link_bodies_.push_back(world_.add_body(std::move(def)));
  }
  for (std::size_t i = 1; i < agent_.links.size(); ++i) {
    const auto& l = agent_.links[i];
    const auto& p = agent_.links[l.parent];
    physics::HingeDef h;
    h.parent = link_bodies_[l.parent];
    h.child = link_bodies_[i];
    h.anchor_parent = l.joint_origin - p.com;
    h.anchor_child = -l.com;
    h.axis_parent = h.axis_child = l.axis.normalized();
    h.ref_parent = h.ref_child = l.axis.unitOrthogonal();
    h.lower = l.lower;
    h.upper = l.upper;
    h.damping = damping;
    h.friction_torque = joint_friction;
    if (mode == JointMode::Locked) {
      h.drive_target = theta[static_cast<Eigen::Index>(i) - 1];
      h.drive_compliance = 0.0;
    }
    world_.add_hinge(h);
  }
}

void Scene::step() { world_.step(params_.timestep); }

void Scene::check_sanity() const {
  for (std::size_t i = 0; i < world_.body_count(); ++i) {
    const auto& s = world_.state(static_cast<int>(i));
    if (!s.x.allFinite() || !s.q.coeffs().allFinite() || s.x.norm() > params_.sanity_bound) {
      throw Diverged("simulation diverged: body '" + world_.body_def(static_cast<int>(i)).name +
                     "' left the sanity bounds");
    }
  }
}

Configuration Scene::configuration() const {
  Configuration c;
  const int n = agent_.joint_count();
  c.theta.resize(n);
  for (int j = 0; j < n; ++j) c.theta[j] = world_.hinge_angle(j);
  const auto& pelvis = agent_.links[0];
  const RigidTransform body = world_.transform(link_bodies_[0]);
  c.base = {body.rotation, body.translation - body.rotation * pelvis.com};
  const auto counts = world_.contact_counts(params_.contact_margin);
  for (std::size_t i = 0; i < agent_.links.size(); ++i) {
    c.link_z.push_back(world_.transform(link_bodies_[i]).rotation.col(2));
    c.contacts.push_back(counts[link_bodies_[i]]);
  }
  c.sim_time = world_.time();
  return c;
}

RigidTransform Scene::chair_transform() const {
  if (chair_body_ < 0) return RigidTransform::identity();
  const RigidTransform body = world_.transform(chair_body_);
  return {body.rotation, body.translation - body.rotation * chair_com_};
}

void Scene::hold_base(const RigidTransform& base) {
  const RigidTransform target{base.rotation, base.apply(agent_.links[0].com)};
  if (hold_ < 0) {
    hold_ = world_.attach(link_bodies_[0], target);
  } else {
    world_.set_attachment_target(hold_, target);
  }
}

void Scene::release_base() {
  if (hold_ >= 0) world_.detach(hold_);
  hold_ = -1;
}

void Scene::set_joint_mode(JointMode mode, double damping, double joint_friction) {
  for (int j = 0; j < static_cast<int>(world_.hinge_count()); ++j) {
    const std::optional<double> target =
        mode == JointMode::Locked ? std::optional<double>(world_.hinge_angle(j)) : std::nullopt;
    world_.set_hinge_drive(j, target, damping, joint_friction);
  }
}

nlohmann::json Scene::snapshot() const {
  nlohmann::json j;
  j["time"] = world_.time();
  auto pose_json = [](const RigidTransform& t) {
    const physics::Quat q(t.rotation);
    return nlohmann::json{{"position", {t.translation.x(), t.translation.y(), t.translation.z()}},
                          {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
  };
  if (chair_body_ >= 0) {
    nlohmann::json mesh;
    for (const auto& v : chair_mesh_.vertices) mesh["vertices"].push_back({v.x(), v.y(), v.z()});
    for (const auto& f : chair_mesh_.faces) mesh["faces"].push_back({f[0], f[1], f[2]});
    j["chair"] = {{"mesh", mesh}, {"pose", pose_json(chair_transform())}};
  }
  j["agent"] = nlohmann::json::array();
  for (std::size_t i = 0; i < link_bodies_.size(); ++i) {
    const auto& l = agent_.links[i];
    const RigidTransform body = world_.transform(link_bodies_[i]);
    const RigidTransform frame{body.rotation, body.translation - body.rotation * l.com};
    nlohmann::json spheres = nlohmann::json::array();
    for (const auto& s : l.spheres) spheres.push_back({{"center", {s.center.x(), s.center.y(), s.center.z()}}, {"radius", s.radius}});
    j["agent"].push_back({{"link", l.name}, {"pose", pose_json(frame)}, {"spheres", spheres}});
  }
  return j;
}

Scene build_drop_scene(const Mesh& aligned_chair, double chair_yaw, const AgentModel& agent,
                       const Vec2& drop_xy, const SimParams& params) {
  Scene scene(params, agent);
  double top = 0.0;
  if (!aligned_chair.empty()) {
    scene.add_chair(aligned_chair, RigidTransform::from_yaw(chair_yaw));
    top = compute_obb(aligned_chair).top();
  }
  const RigidTransform base{agent.r0, Vec3(drop_xy.x(), drop_xy.y(), top + params.drop_height)};
  scene.add_agent(base, agent.pre_sitting, JointMode::Damped, params.drop_damping,
                  params.drop_joint_friction);
  return scene;
}

Configuration settle(Scene& scene, const SimParams& params) {
  const double t0 = scene.time();
  double quiet = 0.0;
  bool settled = false;
  while (scene.time() - t0 < params.max_time) {
    scene.step();
    scene.check_sanity();
    if (scene.settle_energy() < params.ke_threshold) {
      quiet += params.timestep;
      if (quiet >= params.settle_window) {
        settled = true;
        break;
      }
    } else {
      quiet = 0.0;
    }
  }
  Configuration c = scene.configuration();
  c.settled = settled;
  return c;
}

}  // namespace seatbear
