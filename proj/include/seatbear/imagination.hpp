#pragma once

#include <array>
#include <span>
#include <vector>

#include <json.hpp>

#include "seatbear/agent.hpp"
#include "seatbear/geometry.hpp"
#include "seatbear/sam.hpp"
#include "seatbear/sim_harness.hpp"

namespace seatbear {

/// Imagined sitting pose: base position p and yaw gamma (sitting direction
/// (cos gamma, sin gamma)).
struct SittingPose {
  Vec3 p = Vec3::Zero();
  double gamma = 0.0;

  Vec2 direction() const { return {std::cos(gamma), std::sin(gamma)}; }
  RigidTransform transform() const { return RigidTransform::from_yaw(gamma, p); }
  /// Pose moved rigidly by a yaw-only transform.
  SittingPose mapped(const RigidTransform& g) const {
    return {g.apply(p), wrap_angle(gamma + g.yaw())};
  }
};

nlohmann::json to_json(const SittingPose& s);
SittingPose sitting_pose_from_json(const nlohmann::json& j);

struct DropSpec {
  int rotation = 0;      ///< i, alpha_i = i pi/4
  int offset_index = 0;  ///< k, offset k * l_sit along x
  double alpha = 0.0;
  double offset = 0.0;
};

struct DropSchedule {
  double l_sit = 0.0;
  bool extended = false;
  std::vector<DropSpec> drops;
};

/// Base offsets {0, +-1}; extended adds {+-2, +-3} (in units of l_sit).
DropSchedule make_schedule(const Obb& obb, bool extended, double l_sit_scale = 0.15);
/// Only the drops the extended schedule adds to the base one.
std::vector<DropSpec> extension_drops(const DropSchedule& extended);

struct ImaginationParams {
  double l_sit_scale = 0.15;
  int workers = 0;  ///< 0: hardware concurrency

  void validate() const;
};

nlohmann::json to_json(const ImaginationParams& p);
ImaginationParams imagination_params_from_json(const nlohmann::json& j);

struct DropRecord {
  DropSpec spec;
  sam::SamVerdict verdict;
  SittingPose pose_chair;  ///< settled base pose in the aligned chair frame
  bool settled = false;
  bool diverged = false;
  double sim_time = 0.0;
};

struct ImaginationReport {
  std::vector<DropRecord> drops;  ///< sorted by (rotation, offset_index)
  std::array<int, 8> n_correct{};
  int alpha_star = -1;
  bool extended = false;
  bool found = false;
  double l_sit = 0.0;
  Obb obb;
  SittingPose pose;
  double wall_time = 0.0;
};

nlohmann::json to_json(const ImaginationReport& r);
ImaginationReport imagination_report_from_json(const nlohmann::json& j);

struct WeightedSitting {
  SittingPose pose;  ///< aligned chair frame
  double jl = 0.0;
};

/// Weighted mean (weights 1/JL, clamped) mapped back through g_obb^-1.
/// Yaw uses a weighted circular mean. Throws EmptyList.
SittingPose aggregate_pose(std::span<const WeightedSitting> sittings, const RigidTransform& g_obb);

/// Runs one drop and classifies it. Never throws Diverged; flags it instead.
DropRecord run_drop(const Mesh& aligned_chair, const DropSpec& spec, const AgentModel& agent,
                    const sam::SamConfig& sam_cfg, const SimParams& sim);

/// Returns the report with `found` set; throws NoSittingFound when nothing is
/// correct after the extension. `report_out`, when given, receives the report
/// in both cases.
SittingPose imagine(const Mesh& chair, const AgentModel& agent, const sam::SamConfig& sam_cfg,
                    const SimParams& sim, const ImaginationParams& params,
                    ImaginationReport* report_out = nullptr);

/// Reduction used by imagine: counts, alpha* selection and aggregation.
/// Order of `drops` is irrelevant.
void reduce_report(ImaginationReport& report, const RigidTransform& g_obb);

}  // namespace seatbear
