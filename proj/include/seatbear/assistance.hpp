#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seatbear/imagination.hpp"
#include "seatbear/se2_nav.hpp"

namespace seatbear {

/// Counterclockwise (seen from above) is positive yaw.
enum class RotationDirection { Clockwise, Counterclockwise };

std::string to_string(RotationDirection d);

struct Instruction {
  RotationDirection direction = RotationDirection::Counterclockwise;
  int angle_deg = 0;  ///< 0, 30, ..., 180
  double precise_deg = 0.0;

  std::string text() const;
  /// Signed commanded yaw (rad).
  double yaw() const;
};

/// Inverse of Instruction::text. Throws ConfigError on anything else.
Instruction parse_instruction(const std::string& text);

/// Nearest multiple of 30 degrees; a 15-degree tie goes to the smaller
/// magnitude; +-180 is reported counterclockwise.
Instruction quantize_rotation(double precise_deg);

enum class HumanPolicy { Obey, DisobeyFirst, AlwaysDisobey };

std::string to_string(HumanPolicy p);
HumanPolicy human_policy_from_string(const std::string& s);

struct AssistanceParams {
  int max_rounds = 3;
  double search_step = deg2rad(1.0);  ///< heading search when the direct line is blocked
  double disobey_error = deg2rad(60.0);

  void validate() const;
};

nlohmann::json to_json(const AssistanceParams& p);
AssistanceParams assistance_params_from_json(const nlohmann::json& j);

/// Signed yaw (degrees) that turns the sitting direction toward `robot_pos`
/// along an obstacle-free corridor, quantized.
Instruction required_rotation(const SittingPose& g, const Obb& chair, const Vec2& robot_pos,
                              const Arena& arena, const Footprint& fp,
                              const AssistanceParams& params);

/// Yaw the simulated human applies in `round` (1-based).
double human_rotation(const Instruction& instr, HumanPolicy policy, int round,
                      const AssistanceParams& params, std::uint64_t seed);

/// Everything the rotation moves.
struct ChairState {
  Obb obb;
  SittingPose pose;
  RigidTransform chair_to_world;  ///< accumulated placement of the chair mesh
};

ChairState apply_rotation(const ChairState& s, double yaw);

struct AssistanceRound {
  Instruction instruction;
  double applied_yaw = 0.0;
  RigidTransform g_rot;
  bool plan_found = false;
  std::string failure;  ///< NoPlan / GoalOutsideArena message
};

enum class AccessStatus { Accessible, Failed };

struct AssistanceOutcome {
  std::vector<AssistanceRound> rounds;
  AccessStatus status = AccessStatus::Failed;
  ChairState final_state;
  std::optional<GoalResult> goal;
  std::optional<Se2Trajectory> trajectory;
};

nlohmann::json to_json(const AssistanceOutcome& o);
AssistanceOutcome assistance_outcome_from_json(const nlohmann::json& j);

/// Goal + plan for the current chair state; fills `goal`/`trajectory` or the
/// failure text. Returns true on success.
bool try_plan(const ChairState& s, const Arena& arena, const PlanarPose& start,
              const Footprint& fp, const Se2Params& se2, std::uint64_t seed,
              std::optional<GoalResult>& goal, std::optional<Se2Trajectory>& traj,
              std::string& failure);

/// Instruction -> rotation -> replanning, at most max_rounds times.
AssistanceOutcome assistance_loop(const ChairState& initial, const Arena& arena,
                                  const PlanarPose& start, const Footprint& fp,
                                  const Se2Params& se2, HumanPolicy policy,
                                  const AssistanceParams& params, std::uint64_t seed);

}  // namespace seatbear
