#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seatbear/assistance.hpp"
#include "seatbear/chair_gen.hpp"
#include "seatbear/imagination.hpp"
#include "seatbear/sam.hpp"
#include "seatbear/se2_nav.hpp"
#include "seatbear/sim_harness.hpp"
#include "seatbear/wholebody.hpp"

namespace seatbear {

enum class Protocol { Accessible, InaccessibleObey, InaccessibleDisobey };

std::string to_string(Protocol p);
/// Accepts the enum names and the short forms accessible / obey / disobey.
Protocol protocol_from_string(const std::string& s);
HumanPolicy default_policy(Protocol p);

/// Trial arena. The robot starts on the -x side; the chair is placed in a
/// square around `square_center`; an arm bench fills the far side of the
/// arena beyond the chair.
struct LayoutParams {
  Vec2 lo{-1.5, -1.5};
  Vec2 hi{1.5, 1.5};
  PlanarPose robot_start{-1.0, 0.0, 0.0};
  Vec2 square_center{0.0, 0.0};
  double square = 0.5;                     ///< m, side of the placement square
  double direction_spread = deg2rad(30.0);
  double bench_gap = 0.03;                 ///< m between the chair's swing circle and the bench
  double bench_half_width = 1.3;           ///< m, clipped to the bounds

  void validate() const;
};

nlohmann::json to_json(const LayoutParams& p);
LayoutParams layout_params_from_json(const nlohmann::json& j);

struct WholebodyParams {
  wholebody::PlanarChain chain = wholebody::PlanarChain::default_chain();
  Eigen::VectorXd q_start;  ///< carrying posture
  double w1 = 1.0;
  double w2 = 0.5;
  int N = 20;
  double dt = 0.25;
  double clearance = 0.01;
  double com_margin = 0.005;
  double release_lift = 0.02;  ///< m above the imagined pelvis height

  WholebodyParams();
  void validate() const;
};

nlohmann::json to_json(const WholebodyParams& p);
WholebodyParams wholebody_params_from_json(const nlohmann::json& j);

/// Every module's parameters. Missing JSON keys keep their defaults.
struct PipelineConfig {
  SimParams sim;
  std::optional<sam::SamConfig> sam;  ///< defaults for the agent when unset
  ImaginationParams imagination;
  Se2Params se2;
  Footprint footprint;
  AssistanceParams assistance;
  FollowNoise noise{0.01, deg2rad(2.0)};
  LayoutParams layout;
  WholebodyParams wholebody;

  void validate() const;
  AgentModel agent() const { return default_agent(sim); }
  sam::SamConfig sam_config() const;
};

nlohmann::json to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// A mesh file, or generator parameters when `mesh_path` is empty.
struct ChairSpec {
  std::string mesh_path;
  ChairGenParams gen;
};

struct TrialConfig {
  ChairSpec chair;
  std::optional<PlanarPose> chair_pose;  ///< chair frame in the world; sampled when unset
  Protocol protocol = Protocol::Accessible;
  std::optional<HumanPolicy> policy;     ///< overrides the protocol's policy
  PipelineConfig config;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const TrialConfig& c);
TrialConfig trial_config_from_json(const nlohmann::json& j);

/// Stages of run_trial in order; a trial can be stopped after any of them.
enum class Stage { Imagination, Navigation, Follow, GoalConfig, Trajectory, Execution, Verdict };

std::string to_string(Stage s);

struct StageTimes {
  double setup = 0.0;
  double imagination = 0.0;
  double navigation = 0.0;
  double follow = 0.0;
  double goal_config = 0.0;
  double trajectory = 0.0;
  double execution = 0.0;
  double verdict = 0.0;
  double total = 0.0;

  double stage_sum() const {
    return setup + imagination + navigation + follow + goal_config + trajectory + execution + verdict;
  }
};

struct TrialResult {
  Protocol protocol = Protocol::Accessible;
  HumanPolicy policy = HumanPolicy::Obey;
  std::uint64_t seed = 0;
  std::string chair;         ///< mesh path or generator description
  PlanarPose chair_pose;     ///< initial placement
  Arena arena;               ///< static obstacles, chair excluded
  PlanarPose robot_start;

  std::optional<ImaginationReport> imagination;
  std::optional<SittingPose> pose;           ///< imagined pose in the world, before rotations
  std::optional<GoalResult> initial_goal;
  bool initially_accessible = false;
  std::string initial_failure;
  std::optional<AssistanceOutcome> assistance;  ///< set when the initial plan failed
  std::optional<GoalResult> goal;               ///< goal that was planned to
  std::optional<Se2Trajectory> se2_trajectory;
  std::vector<PlanarPose> executed;
  std::optional<Vec2> bear_target;              ///< sagittal frame of the final stance
  std::optional<Eigen::VectorXd> q_goal;
  std::optional<Eigen::MatrixXd> wb_trajectory;
  std::optional<RigidTransform> released_base;
  std::optional<RigidTransform> bear_base;      ///< settled bear pelvis
  std::optional<sam::SamVerdict> verdict;

  bool plan_found = false;
  bool success = false;
  std::string failure_stage;  ///< empty on success
  std::string failure;
  StageTimes times;
};

nlohmann::json to_json(const TrialResult& r);
TrialResult trial_result_from_json(const nlohmann::json& j);
/// Copy of a TrialResult JSON without wall-clock fields.
nlohmann::json without_timing(const nlohmann::json& result);

struct LoadedChair {
  Mesh mesh;                      ///< chair frame
  std::optional<SeatFrame> seat;  ///< generator ground truth
  std::string description;
};

/// Throws on I/O errors and invalid generator parameters.
LoadedChair load_chair(const ChairSpec& spec);

/// Chair placement for a protocol, deterministic in `seed`. The world sitting
/// direction is taken from the ground truth when known, else +x of the chair.
PlanarPose sample_chair_pose(const LoadedChair& chair, Protocol protocol, const LayoutParams& layout,
                             std::uint64_t seed);

/// Static arena for a placed chair (the bench sits beyond the chair's swing circle).
Arena make_arena(const Mesh& chair, const PlanarPose& chair_pose, const LayoutParams& layout);

/// Sub-seed for a named stage.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage);

/// Never throws on pipeline failures; they are recorded in the result.
/// ConfigError / I/O errors still propagate.
TrialResult run_trial(const TrialConfig& cfg, Stage last = Stage::Verdict);

struct BenchRow {
  std::string name;
  int trials = 0;
  int successes = 0;
  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct BenchSummary {
  std::vector<BenchRow> rows;  ///< Accessible, Obey, Disobey, Total
  double wall_time = 0.0;
};

BenchSummary summarize(const std::vector<TrialResult>& results);
nlohmann::json to_json(const BenchSummary& s);
std::string format_table(const BenchSummary& s);

/// 12 chairs x {3 Accessible, 2 InaccessibleObey, 1 InaccessibleDisobey}.
std::vector<TrialConfig> bench_suite(const std::vector<std::uint64_t>& chair_seeds,
                                     const PipelineConfig& config, std::uint64_t seed);

/// Runs trials on `parallel` threads; results keep the suite order.
std::vector<TrialResult> run_suite(const std::vector<TrialConfig>& suite, int parallel);

/// Generator seeds used to calibrate SAM, and the held-out bench seeds.
std::vector<std::uint64_t> calibration_seeds();
std::vector<std::uint64_t> heldout_seeds();
/// Standard chairs for the imagination desk check.
std::vector<std::uint64_t> desk_seeds();

}  // namespace seatbear
