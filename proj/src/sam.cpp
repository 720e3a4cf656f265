#include "seatbear/sam.hpp"

#include <cmath>

#include "seatbear/error.hpp"

namespace seatbear::sam {

namespace {

Eigen::VectorXd vec_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void SamConfig::validate(int joints, int links) const {
  if (joint_weights.size() != joints) throw LengthMismatch("sam: joint weight count mismatch");
  if (link_weights.size() != links) throw LengthMismatch("sam: link weight count mismatch");
  if ((joint_weights.array() < 0).any() || (link_weights.array() < 0).any()) {
    throw ConfigError("sam: weights must be >= 0");
  }
  if (!(j_max > 0) || !(l_max > 0) || !(h_min > 0) || !(h_max > h_min)) {
    throw ConfigError("sam: thresholds must be > 0 with h_min < h_max");
  }
  if (min_total_contacts < 0) throw ConfigError("sam: min_total_contacts must be >= 0");
  if (min_upper_contacts < 1) throw ConfigError("sam: min_upper_contacts must be >= 1");
}

SamConfig SamConfig::defaults_for(const AgentModel& agent) {
  // Calibrated on the three calibration chairs.
  SamConfig cfg;
  const int n = agent.joint_count();
  const int m = agent.link_count();
  cfg.joint_weights = Eigen::VectorXd::Ones(n);
  cfg.link_weights = Eigen::VectorXd::Ones(m);
  for (int j = 0; j < n; ++j) {
    const auto& name = agent.links[j + 1].joint;
    if (name == "neck" || name.ends_with("shoulder")) cfg.joint_weights[j] = 0.2;
    if (name.ends_with("knee")) cfg.joint_weights[j] = 0.5;
  }
  for (int i = 0; i < m; ++i) {
    const auto& name = agent.links[i].name;
    if (name == "pelvis" || name == "torso") cfg.link_weights[i] = 3.0;
    if (name == "head" || name.ends_with("arm")) cfg.link_weights[i] = 0.2;
  }
  cfg.j_max = 1.6;
  cfg.l_max = 0.9;
  cfg.h_min = 0.22;
  cfg.h_max = 0.60;
  cfg.min_total_contacts = 5;
  // one touching sphere is a corner graze, a flush back gives three
  cfg.min_upper_contacts = 2;
  return cfg;
}

nlohmann::json to_json(const SamConfig& c) {
  return {{"joint_weights", to_std(c.joint_weights)},
          {"link_weights", to_std(c.link_weights)},
          {"j_max", c.j_max},
          {"l_max", c.l_max},
          {"h_min", c.h_min},
          {"h_max", c.h_max},
          {"min_total_contacts", c.min_total_contacts},
          {"min_upper_contacts", c.min_upper_contacts}};
}

SamConfig sam_config_from_json(const nlohmann::json& j) {
  SamConfig c;
  try {
    c.joint_weights = vec_from(j.at("joint_weights"));
    c.link_weights = vec_from(j.at("link_weights"));
    c.j_max = j.at("j_max").get<double>();
    c.l_max = j.at("l_max").get<double>();
    c.h_min = j.at("h_min").get<double>();
    c.h_max = j.at("h_max").get<double>();
    c.min_total_contacts = j.at("min_total_contacts").get<int>();
    c.min_upper_contacts = j.value("min_upper_contacts", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sam config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const SamVerdict& v) {
  return {{"J", v.J}, {"L", v.L}, {"H", v.H}, {"T", v.T},
          {"phi", v.phi}, {"correct", v.correct}, {"JL", v.JL}};
}

SamVerdict sam_verdict_from_json(const nlohmann::json& j) {
  SamVerdict v;
  v.J = j.at("J").get<double>();
  v.L = j.at("L").get<double>();
  v.H = j.at("H").get<double>();
  v.T = j.at("T").get<std::vector<int>>();
  v.phi = j.at("phi").get<bool>();
  v.correct = j.at("correct").get<bool>();
  v.JL = j.at("JL").get<double>();
  return v;
}

double joint_angle_score(const Configuration& res, const Configuration& key,
                         const Eigen::VectorXd& w) {
  if (res.theta.size() != key.theta.size() || w.size() != res.theta.size()) {
    throw LengthMismatch("joint_angle_score: theta/weight lengths differ");
  }
  return (w.array() * (res.theta - key.theta).array().abs()).sum();
}

double link_rotation_score(const Configuration& res, const Configuration& key,
                           const Eigen::VectorXd& w) {
  if (res.link_z.size() != key.link_z.size() ||
      static_cast<std::size_t>(w.size()) != res.link_z.size()) {
    throw LengthMismatch("link_rotation_score: link/weight lengths differ");
  }
  double l = 0.0;
  for (std::size_t i = 0; i < res.link_z.size(); ++i) {
    l += w[static_cast<Eigen::Index>(i)] * (1.0 - res.link_z[i].dot(key.link_z[i]));
  }
  return l;
}

bool contact_ok(std::span<const int> contacts, std::span<const BodyPart> parts, int min_total,
                int min_upper) {
  if (contacts.size() != parts.size()) throw LengthMismatch("contact_ok: partition size mismatch");
  int total = 0, lower = 0, upper = 0;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    if (parts[i] == BodyPart::Other) continue;
    total += contacts[i];
    (parts[i] == BodyPart::Lower ? lower : upper) += contacts[i];
  }
  return total > min_total && lower > 0 && upper >= min_upper;
}

SamVerdict classify(const Configuration& res, const Configuration& key, const SamConfig& cfg,
                    std::span<const BodyPart> parts) {
  SamVerdict v;
  v.J = joint_angle_score(res, key, cfg.joint_weights);
  v.L = link_rotation_score(res, key, cfg.link_weights);
  v.H = res.height();
  v.T = res.contacts;
  v.phi = contact_ok(res.contacts, parts, cfg.min_total_contacts, cfg.min_upper_contacts);
  v.JL = v.J * v.L;
  v.correct = v.J < cfg.j_max && v.L < cfg.l_max && v.H > cfg.h_min && v.H < cfg.h_max && v.phi;
  return v;
}

std::vector<BodyPart> body_parts(const AgentModel& agent) {
  std::vector<BodyPart> out;
  for (const auto& l : agent.links) out.push_back(l.part);
  return out;
}

Configuration key_configuration(const AgentModel& agent, double yaw) {
  return configuration_from_pose(agent, RigidTransform{rot_z(yaw) * agent.r0, Vec3::Zero()}, agent.key);
}

}  // namespace seatbear::sam
