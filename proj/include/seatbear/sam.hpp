#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seatbear/agent.hpp"
#include "seatbear/sim_harness.hpp"

/// Sitting affordance model: scores a settled configuration against the key
/// sitting configuration and decides whether it is a correct sitting.
namespace seatbear::sam {

struct SamConfig {
  Eigen::VectorXd joint_weights;  ///< length n
  Eigen::VectorXd link_weights;   ///< length m
  double j_max = 1.0;
  double l_max = 1.0;
  double h_min = 0.1;             ///< m
  double h_max = 0.6;             ///< m
  int min_total_contacts = 5;
  int min_upper_contacts = 1;     ///< upper-body contacts needed

  void validate(int joints, int links) const;
  /// Calibrated defaults for the given agent (see configs/default.json).
  static SamConfig defaults_for(const AgentModel& agent);
};

nlohmann::json to_json(const SamConfig& cfg);
SamConfig sam_config_from_json(const nlohmann::json& j);

struct SamVerdict {
  double J = 0.0;
  double L = 0.0;
  double H = 0.0;
  std::vector<int> T;
  bool phi = false;
  bool correct = false;
  double JL = 0.0;
};

nlohmann::json to_json(const SamVerdict& v);
SamVerdict sam_verdict_from_json(const nlohmann::json& j);

/// J = sum_i w_i |theta_res_i - theta_key_i|
double joint_angle_score(const Configuration& res, const Configuration& key,
                         const Eigen::VectorXd& weights);
/// L = sum_i w_i (1 - z_res_i . z_key_i)
double link_rotation_score(const Configuration& res, const Configuration& key,
                           const Eigen::VectorXd& weights);
/// True iff total contacts exceed `min_total`, the lower body touches something
/// and the upper body has at least `min_upper` contacts.
bool contact_ok(std::span<const int> contacts, std::span<const BodyPart> parts, int min_total,
                int min_upper = 1);

SamVerdict classify(const Configuration& res, const Configuration& key, const SamConfig& cfg,
                    std::span<const BodyPart> parts);

/// Link partition of an agent, in link order.
std::vector<BodyPart> body_parts(const AgentModel& agent);

/// Key configuration of an agent: key joint angles, upright base facing `yaw`.
Configuration key_configuration(const AgentModel& agent, double yaw = 0.0);

}  // namespace seatbear::sam
