#include "seatbear/agent.hpp"

#include <fstream>

#include "seatbear/error.hpp"

namespace seatbear {

namespace {

// Solid cylinder of radius r and length l along z, about its center.
Vec3 cylinder_inertia(double mass, double r, double l) {
  const double ixx = mass * (3 * r * r + l * l) / 12.0;
  return {ixx, ixx, 0.5 * mass * r * r};
}

AgentLink make_link(std::string name, int parent, std::string joint, Vec3 origin, Vec3 axis,
                    double lower, double upper, double mass, Vec3 com, Vec3 inertia,
                    std::vector<physics::Sphere> spheres, BodyPart part) {
  AgentLink l;
  l.name = std::move(name);
  l.parent = parent;
  l.joint = std::move(joint);
  l.joint_origin = origin;
  l.axis = axis;
  l.lower = lower;
  l.upper = upper;
  l.mass = mass;
  l.com = com;
  l.inertia_diag = inertia;
  l.spheres = std::move(spheres);
  l.part = part;
  return l;
}

Vec3 vec3_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

nlohmann::json json_from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

// Back modelled as a 3 x 3 sphere grid so flush back support yields several
// contacts while an edge yields few.
std::vector<physics::Sphere> torso_spheres() {
  std::vector<physics::Sphere> out;
  for (double z : {0.06, 0.12, 0.18}) {
    for (double y : {-0.03, 0.0, 0.03}) out.push_back({Vec3(0.005, y, z), 0.055});
  }
  return out;
}

}  // namespace

double AgentModel::total_mass() const {
  double m = 0;
  for (const auto& l : links) m += l.mass;
  return m;
}

std::vector<std::string> AgentModel::joint_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < links.size(); ++i) out.push_back(links[i].joint);
  return out;
}

void AgentModel::validate() const {
  if (links.empty()) throw ConfigError("agent: no links");
  if (links[0].parent != -1) throw ConfigError("agent: link 0 must be the root (pelvis)");
  bool has_lower = false, has_upper = false;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if (i > 0 && (l.parent < 0 || l.parent >= static_cast<int>(i))) {
      throw ConfigError("agent: link '" + l.name + "' must follow its parent");
    }
    if (!(l.mass > 0)) throw ConfigError("agent: link '" + l.name + "' needs mass > 0");
    if (!(l.lower < l.upper)) throw ConfigError("agent: joint '" + l.joint + "' has empty limits");
    if (l.damping < 0) throw ConfigError("agent: joint '" + l.joint + "' has negative damping");
    has_lower |= l.part == BodyPart::Lower;
    has_upper |= l.part == BodyPart::Upper;
  }
  if (!has_lower || !has_upper) throw ConfigError("agent: needs both lower- and upper-body links");
  const auto n = static_cast<Eigen::Index>(joint_count());
  if (pre_sitting.size() != n || key.size() != n) {
    throw ConfigError("agent: pre_sitting/key must have one angle per joint");
  }
}

AgentModel AgentModel::default_child(double height, double mass) {
  constexpr double kBaseHeight = 0.9;
  constexpr double kBaseMass = 12.0;
  AgentModel a;
  const Vec3 pitch_fwd(0, 1, 0);  // positive = bend forward (torso, neck, knee back)
  const Vec3 flex(0, -1, 0);      // positive = swing the limb forward (hip, shoulder)
  auto& L = a.links;
  L.push_back(make_link("pelvis", -1, "", Vec3::Zero(), Vec3::UnitY(), -kPi, kPi, 2.2,
                        Vec3(-0.01, 0, 0.02), Vec3(0.012, 0.008, 0.012),
                        {{Vec3(-0.01, 0.045, 0.025), 0.05}, {Vec3(-0.01, -0.045, 0.025), 0.05}},
                        BodyPart::Lower));
  L.push_back(make_link("torso", 0, "lumbar", Vec3(0, 0, 0.06), pitch_fwd, -0.6, 0.35, 4.2,
                        Vec3(0, 0, 0.12), cylinder_inertia(4.2, 0.08, 0.25),
                        torso_spheres(),
                        BodyPart::Upper));
  L.push_back(make_link("head", 1, "neck", Vec3(0, 0, 0.25), pitch_fwd, -0.4, 0.5, 1.7,
                        Vec3(0, 0, 0.08), Vec3::Constant(0.4 * 1.7 * 0.075 * 0.075),
                        {{Vec3(0, 0, 0.08), 0.075}}, BodyPart::Other));
  for (int side : {1, -1}) {
    const std::string s = side > 0 ? "l_" : "r_";
    const int thigh = a.link_count();
    L.push_back(make_link(s + "thigh", 0, s + "hip", Vec3(0, side * 0.05, 0), flex, 1.0, 2.1,
                          0.95, Vec3(0.01, 0, -0.11), cylinder_inertia(0.95, 0.045, 0.21),
                          {{Vec3(0.015, 0, -0.05), 0.04},
                           {Vec3(0.015, 0, -0.12), 0.04},
                           {Vec3(0.015, 0, -0.19), 0.04}},
                          BodyPart::Lower));
    L.push_back(make_link(s + "shin", thigh, s + "knee", Vec3(0, 0, -0.21), pitch_fwd, 0.3, 2.4,
                          0.55, Vec3(0, 0, -0.11), cylinder_inertia(0.55, 0.035, 0.22),
                          {{Vec3(0, 0, -0.05), 0.035},
                           {Vec3(0, 0, -0.12), 0.035},
                           {Vec3(0, 0, -0.19), 0.035}},
                          BodyPart::Lower));
  }
  for (int side : {1, -1}) {
    const std::string s = side > 0 ? "l_" : "r_";
    L.push_back(make_link(s + "arm", 1, s + "shoulder", Vec3(0, side * 0.11, 0.22), flex, -0.6,
                          2.6, 0.45, Vec3(0, 0, -0.14), cylinder_inertia(0.45, 0.03, 0.28),
                          {{Vec3(0, 0, -0.06), 0.03}, {Vec3(0, 0, -0.15), 0.03},
                           {Vec3(0, 0, -0.24), 0.03}},
                          BodyPart::Other));
  }
  for (std::size_t i = 1; i < L.size(); ++i) L[i].damping = 6.0;

  // lumbar, neck, l_hip, l_knee, r_hip, r_knee, l_shoulder, r_shoulder
  a.pre_sitting.resize(8);
  a.pre_sitting << -0.25, 0.15, kPi / 2, kPi / 2, kPi / 2, kPi / 2, 1.2, 1.2;
  a.key = a.pre_sitting;
  if (height != kBaseHeight || mass != kBaseMass) {
    return a.scaled(height / kBaseHeight, mass / kBaseMass);
  }
  return a;
}

AgentModel AgentModel::scaled(double s, double m) const {
  AgentModel out = *this;
  for (auto& l : out.links) {
    l.joint_origin *= s;
    l.com *= s;
    l.mass *= m;
    l.inertia_diag *= m * s * s;
    for (auto& sp : l.spheres) {
      sp.center *= s;
      sp.radius *= s;
    }
  }
  return out;
}

std::vector<RigidTransform> agent_forward_kinematics(const AgentModel& agent,
                                                     const RigidTransform& base,
                                                     const Eigen::VectorXd& theta) {
  if (theta.size() != agent.joint_count()) {
    throw LengthMismatch("forward kinematics: expected " + std::to_string(agent.joint_count()) +
                         " joint angles, got " + std::to_string(theta.size()));
  }
  std::vector<RigidTransform> frames(agent.links.size());
  frames[0] = base;
  for (std::size_t i = 1; i < agent.links.size(); ++i) {
    const auto& l = agent.links[i];
    RigidTransform local;
    local.translation = l.joint_origin;
    local.rotation = Eigen::AngleAxisd(theta[static_cast<Eigen::Index>(i) - 1], l.axis.normalized())
                         .toRotationMatrix();
    frames[i] = frames[l.parent] * local;
  }
  return frames;
}

nlohmann::json agent_to_json(const AgentModel& a) {
  nlohmann::json j;
  j["links"] = nlohmann::json::array();
  for (const auto& l : a.links) {
    nlohmann::json lj;
    lj["name"] = l.name;
    lj["parent"] = l.parent;
    lj["part"] = l.part == BodyPart::Upper ? "upper" : l.part == BodyPart::Lower ? "lower" : "other";
    lj["inertial"] = {{"mass", l.mass}, {"com", json_from(l.com)}, {"inertia_diag", json_from(l.inertia_diag)}};
    lj["collision"] = nlohmann::json::array();
    for (const auto& s : l.spheres) lj["collision"].push_back({{"center", json_from(s.center)}, {"radius", s.radius}});
    if (l.parent >= 0) {
      lj["joint"] = {{"name", l.joint},
                     {"type", "revolute"},
                     {"origin", json_from(l.joint_origin)},
                     {"axis", json_from(l.axis)},
                     {"limit", {{"lower", l.lower}, {"upper", l.upper}}},
                     {"damping", l.damping}};
    }
    j["links"].push_back(lj);
  }
  j["pre_sitting"] = std::vector<double>(a.pre_sitting.data(), a.pre_sitting.data() + a.pre_sitting.size());
  j["key"] = std::vector<double>(a.key.data(), a.key.data() + a.key.size());
  return j;
}

AgentModel agent_from_json(const nlohmann::json& j) {
  AgentModel a;
  try {
    for (const auto& lj : j.at("links")) {
      AgentLink l;
      l.name = lj.at("name").get<std::string>();
      l.parent = lj.at("parent").get<int>();
      const auto part = lj.value("part", std::string("lower"));
      if (part == "upper") {
        l.part = BodyPart::Upper;
      } else if (part == "lower") {
        l.part = BodyPart::Lower;
      } else if (part == "other") {
        l.part = BodyPart::Other;
      } else {
        throw ConfigError("agent: unknown body part '" + part + "'");
      }
      const auto& in = lj.at("inertial");
      l.mass = in.at("mass").get<double>();
      l.com = vec3_from(in.at("com"));
      l.inertia_diag = vec3_from(in.at("inertia_diag"));
      for (const auto& c : lj.value("collision", nlohmann::json::array())) {
        l.spheres.push_back({vec3_from(c.at("center")), c.at("radius").get<double>()});
      }
      if (l.parent >= 0) {
        const auto& jt = lj.at("joint");
        l.joint = jt.at("name").get<std::string>();
        l.joint_origin = vec3_from(jt.at("origin"));
        l.axis = vec3_from(jt.at("axis"));
        l.lower = jt.at("limit").at("lower").get<double>();
        l.upper = jt.at("limit").at("upper").get<double>();
        l.damping = jt.value("damping", 0.0);
      }
      a.links.push_back(std::move(l));
    }
    const auto pre = j.at("pre_sitting").get<std::vector<double>>();
    const auto key = j.value("key", pre);
    a.pre_sitting = Eigen::Map<const Eigen::VectorXd>(pre.data(), static_cast<Eigen::Index>(pre.size()));
    a.key = Eigen::Map<const Eigen::VectorXd>(key.data(), static_cast<Eigen::Index>(key.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("agent description: ") + e.what());
  }
  a.validate();
  return a;
}

AgentModel load_agent(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open agent description " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return agent_from_json(j);
}

}  // namespace seatbear
