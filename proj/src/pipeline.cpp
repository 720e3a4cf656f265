#include "seatbear/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "seatbear/error.hpp"
#include "seatbear/json_util.hpp"
#include "seatbear/mesh_io.hpp"

namespace seatbear {

namespace ju = json_util;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto with_config_errors(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

json goal_json(const GoalResult& g) {
  return {{"s_goal", ju::planar(g.s_goal)}, {"adjusted_p", ju::vec(g.adjusted_p)}, {"distance", g.distance}};
}

GoalResult goal_from_json(const json& j) {
  return {ju::planar(j.at("s_goal")), ju::vec3(j.at("adjusted_p")), j.at("distance").get<double>()};
}

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(ju::vec(m.row(r).transpose()));
  return rows;
}

MatrixXd matrix_from_json(const json& j) {
  if (j.empty()) return {};
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const VectorXd v = ju::vecx(j.at(r));
    if (v.size() != cols) throw ConfigError("ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = v.transpose();
  }
  return m;
}

template <typename T, typename F>
json opt_json(const std::optional<T>& v, F&& f) {
  return v ? json(f(*v)) : json(nullptr);
}

template <typename T, typename F>
std::optional<T> opt_from(const json& j, const char* key, F&& f) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return f(j.at(key));
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum SeedStage : std::uint64_t { kLayout = 1, kPlan = 2, kAssist = 3, kFollow = 4 };

}  // namespace

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) { return mix(mix(seed) ^ mix(stage + 0x51)); }

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::Accessible: return "Accessible";
    case Protocol::InaccessibleObey: return "InaccessibleObey";
    case Protocol::InaccessibleDisobey: return "InaccessibleDisobey";
  }
  return "?";
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "Accessible" || s == "accessible") return Protocol::Accessible;
  if (s == "InaccessibleObey" || s == "obey") return Protocol::InaccessibleObey;
  if (s == "InaccessibleDisobey" || s == "disobey") return Protocol::InaccessibleDisobey;
  throw ConfigError("unknown protocol: " + s);
}

HumanPolicy default_policy(Protocol p) {
  return p == Protocol::InaccessibleDisobey ? HumanPolicy::DisobeyFirst : HumanPolicy::Obey;
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Imagination: return "imagination";
    case Stage::Navigation: return "navigation";
    case Stage::Follow: return "follow";
    case Stage::GoalConfig: return "goal_config";
    case Stage::Trajectory: return "trajectory";
    case Stage::Execution: return "execution";
    case Stage::Verdict: return "verdict";
  }
  return "?";
}

// ---- configuration ----

void LayoutParams::validate() const {
  if (!(hi.x() > lo.x()) || !(hi.y() > lo.y())) throw ConfigError("layout: degenerate bounds");
  if (!(square > 0) || !(direction_spread >= 0) || !(bench_gap >= 0) || !(bench_half_width > 0)) {
    throw ConfigError("layout: square, spread, gap and bench width must be positive");
  }
  if (!(robot_start.x < square_center.x() - 0.5 * square)) {
    throw ConfigError("layout: the robot must start on the -x side of the placement square");
  }
  const Vec2 s = robot_start.position();
  if (s.x() < lo.x() || s.x() > hi.x() || s.y() < lo.y() || s.y() > hi.y()) {
    throw ConfigError("layout: robot start outside the bounds");
  }
}

json to_json(const LayoutParams& p) {
  return {{"lo", ju::vec(p.lo)},
          {"hi", ju::vec(p.hi)},
          {"robot_start", ju::planar(p.robot_start)},
          {"square_center", ju::vec(p.square_center)},
          {"square", p.square},
          {"direction_spread", p.direction_spread},
          {"bench_gap", p.bench_gap},
          {"bench_half_width", p.bench_half_width}};
}

LayoutParams layout_params_from_json(const json& j) {
  return with_config_errors("layout", [&] {
    LayoutParams p;
    if (j.contains("lo")) p.lo = ju::vec2(j.at("lo"));
    if (j.contains("hi")) p.hi = ju::vec2(j.at("hi"));
    if (j.contains("robot_start")) p.robot_start = ju::planar(j.at("robot_start"));
    if (j.contains("square_center")) p.square_center = ju::vec2(j.at("square_center"));
    p.square = j.value("square", p.square);
    p.direction_spread = j.value("direction_spread", p.direction_spread);
    p.bench_gap = j.value("bench_gap", p.bench_gap);
    p.bench_half_width = j.value("bench_half_width", p.bench_half_width);
    p.validate();
    return p;
  });
}

WholebodyParams::WholebodyParams() {
  q_start = VectorXd::Zero(chain.n());
  q_start << 0.0, 0.0, 0.0, 0.2, 1.0;
}

void WholebodyParams::validate() const {
  chain.validate();
  if (q_start.size() != chain.n()) throw ConfigError("wholebody: q_start length must match the chain");
  if (((q_start - chain.lower).array() < 0).any() || ((chain.upper - q_start).array() < 0).any()) {
    throw ConfigError("wholebody: q_start outside the joint limits");
  }
  if (!(w1 >= 0) || !(w2 >= 0) || N < 2 || !(dt > 0) || !(clearance >= 0) || !(com_margin >= 0) ||
      !(release_lift >= 0)) {
    throw ConfigError("wholebody: invalid parameters");
  }
}

json to_json(const WholebodyParams& p) {
  return {{"chain", wholebody::to_json(p.chain)},
          {"q_start", ju::vec(p.q_start)},
          {"w1", p.w1},
          {"w2", p.w2},
          {"N", p.N},
          {"dt", p.dt},
          {"clearance", p.clearance},
          {"com_margin", p.com_margin},
          {"release_lift", p.release_lift}};
}

WholebodyParams wholebody_params_from_json(const json& j) {
  return with_config_errors("wholebody", [&] {
    WholebodyParams p;
    if (j.contains("chain")) p.chain = wholebody::planar_chain_from_json(j.at("chain"));
    if (j.contains("q_start")) p.q_start = ju::vecx(j.at("q_start"));
    p.w1 = j.value("w1", p.w1);
    p.w2 = j.value("w2", p.w2);
    p.N = j.value("N", p.N);
    p.dt = j.value("dt", p.dt);
    p.clearance = j.value("clearance", p.clearance);
    p.com_margin = j.value("com_margin", p.com_margin);
    p.release_lift = j.value("release_lift", p.release_lift);
    p.validate();
    return p;
  });
}

void PipelineConfig::validate() const {
  sim.validate();
  const AgentModel a = agent();
  if (sam) sam->validate(a.joint_count(), a.link_count());
  imagination.validate();
  se2.validate();
  footprint.validate();
  assistance.validate();
  if (!(noise.xy >= 0) || !(noise.heading >= 0)) throw ConfigError("noise bounds must be >= 0");
  layout.validate();
  wholebody.validate();
}

sam::SamConfig PipelineConfig::sam_config() const {
  return sam ? *sam : sam::SamConfig::defaults_for(agent());
}

json to_json(const PipelineConfig& c) {
  return {{"sim", to_json(c.sim)},
          {"sam", to_json(c.sam_config())},
          {"imagination", to_json(c.imagination)},
          {"se2", to_json(c.se2)},
          {"footprint", to_json(c.footprint)},
          {"assistance", to_json(c.assistance)},
          {"noise", {{"xy", c.noise.xy}, {"heading", c.noise.heading}}},
          {"layout", to_json(c.layout)},
          {"wholebody", to_json(c.wholebody)}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  return with_config_errors("config", [&] {
    if (!j.is_object()) throw ConfigError("config: expected an object");
    PipelineConfig c;
    if (j.contains("sim")) c.sim = sim_params_from_json(j.at("sim"));
    if (j.contains("sam")) c.sam = sam::sam_config_from_json(j.at("sam"));
    if (j.contains("imagination")) c.imagination = imagination_params_from_json(j.at("imagination"));
    if (j.contains("se2")) c.se2 = se2_params_from_json(j.at("se2"));
    if (j.contains("footprint")) c.footprint = footprint_from_json(j.at("footprint"));
    if (j.contains("assistance")) c.assistance = assistance_params_from_json(j.at("assistance"));
    if (j.contains("noise")) {
      c.noise.xy = j.at("noise").value("xy", c.noise.xy);
      c.noise.heading = j.at("noise").value("heading", c.noise.heading);
    }
    if (j.contains("layout")) c.layout = layout_params_from_json(j.at("layout"));
    if (j.contains("wholebody")) c.wholebody = wholebody_params_from_json(j.at("wholebody"));
    c.validate();
    return c;
  });
}

json to_json(const TrialConfig& c) {
  json chair;
  if (!c.chair.mesh_path.empty()) {
    chair = {{"mesh", c.chair.mesh_path}};
  } else {
    chair = {{"generator", to_json(c.chair.gen)}};
  }
  return {{"chair", chair},
          {"chair_pose", opt_json(c.chair_pose, [](const PlanarPose& p) { return ju::planar(p); })},
          {"protocol", to_string(c.protocol)},
          {"policy", opt_json(c.policy, [](HumanPolicy p) { return to_string(p); })},
          {"config", to_json(c.config)},
          {"seed", c.seed}};
}

TrialConfig trial_config_from_json(const json& j) {
  return with_config_errors("trial config", [&] {
    TrialConfig c;
    if (j.contains("chair")) {
      const json& ch = j.at("chair");
      if (ch.contains("mesh")) c.chair.mesh_path = ch.at("mesh").get<std::string>();
      if (ch.contains("generator")) c.chair.gen = chair_gen_params_from_json(ch.at("generator"));
    }
    c.chair_pose = opt_from<PlanarPose>(j, "chair_pose", [](const json& v) { return ju::planar(v); });
    if (j.contains("protocol")) c.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    c.policy = opt_from<HumanPolicy>(j, "policy", [](const json& v) {
      return human_policy_from_string(v.get<std::string>());
    });
    if (j.contains("config")) c.config = pipeline_config_from_json(j.at("config"));
    c.seed = j.value("seed", c.seed);
    return c;
  });
}

// ---- results ----

json to_json(const TrialResult& r) {
  json executed = json::array();
  for (const auto& p : r.executed) executed.push_back(ju::planar(p));
  const auto& t = r.times;
  return {
      {"protocol", to_string(r.protocol)},
      {"policy", to_string(r.policy)},
      {"seed", r.seed},
      {"chair", r.chair},
      {"chair_pose", ju::planar(r.chair_pose)},
      {"arena", to_json(r.arena)},
      {"robot_start", ju::planar(r.robot_start)},
      {"imagination", opt_json(r.imagination, [](const ImaginationReport& v) { return to_json(v); })},
      {"pose", opt_json(r.pose, [](const SittingPose& v) { return to_json(v); })},
      {"initial_goal", opt_json(r.initial_goal, goal_json)},
      {"initially_accessible", r.initially_accessible},
      {"initial_failure", r.initial_failure},
      {"assistance", opt_json(r.assistance, [](const AssistanceOutcome& v) { return to_json(v); })},
      {"goal", opt_json(r.goal, goal_json)},
      {"se2_trajectory", opt_json(r.se2_trajectory, [](const Se2Trajectory& v) { return to_json(v); })},
      {"executed", executed},
      {"bear_target", opt_json(r.bear_target, [](const Vec2& v) { return ju::vec(v); })},
      {"q_goal", opt_json(r.q_goal, [](const VectorXd& v) { return ju::vec(v); })},
      {"wb_trajectory", opt_json(r.wb_trajectory, matrix_json)},
      {"released_base", opt_json(r.released_base, [](const RigidTransform& g) { return ju::transform(g); })},
      {"bear_base", opt_json(r.bear_base, [](const RigidTransform& g) { return ju::transform(g); })},
      {"verdict", opt_json(r.verdict, [](const sam::SamVerdict& v) { return sam::to_json(v); })},
      {"plan_found", r.plan_found},
      {"success", r.success},
      {"failure_stage", r.failure_stage},
      {"failure", r.failure},
      {"times",
       {{"setup", t.setup},
        {"imagination", t.imagination},
        {"navigation", t.navigation},
        {"follow", t.follow},
        {"goal_config", t.goal_config},
        {"trajectory", t.trajectory},
        {"execution", t.execution},
        {"verdict", t.verdict},
        {"total", t.total}}}};
}

TrialResult trial_result_from_json(const json& j) {
  return with_config_errors("trial result", [&] {
    TrialResult r;
    r.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    r.policy = human_policy_from_string(j.at("policy").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.chair = j.at("chair").get<std::string>();
    r.chair_pose = ju::planar(j.at("chair_pose"));
    r.arena = arena_from_json(j.at("arena"));
    r.robot_start = ju::planar(j.at("robot_start"));
    r.imagination = opt_from<ImaginationReport>(j, "imagination", imagination_report_from_json);
    r.pose = opt_from<SittingPose>(j, "pose", sitting_pose_from_json);
    r.initial_goal = opt_from<GoalResult>(j, "initial_goal", goal_from_json);
    r.initially_accessible = j.at("initially_accessible").get<bool>();
    r.initial_failure = j.at("initial_failure").get<std::string>();
    r.assistance = opt_from<AssistanceOutcome>(j, "assistance", assistance_outcome_from_json);
    r.goal = opt_from<GoalResult>(j, "goal", goal_from_json);
    r.se2_trajectory = opt_from<Se2Trajectory>(j, "se2_trajectory", se2_trajectory_from_json);
    for (const auto& p : j.at("executed")) r.executed.push_back(ju::planar(p));
    r.bear_target = opt_from<Vec2>(j, "bear_target", [](const json& v) { return ju::vec2(v); });
    r.q_goal = opt_from<VectorXd>(j, "q_goal", [](const json& v) { return ju::vecx(v); });
    r.wb_trajectory = opt_from<MatrixXd>(j, "wb_trajectory", matrix_from_json);
    r.released_base = opt_from<RigidTransform>(j, "released_base", [](const json& v) { return ju::transform(v); });
    r.bear_base = opt_from<RigidTransform>(j, "bear_base", [](const json& v) { return ju::transform(v); });
    r.verdict = opt_from<sam::SamVerdict>(j, "verdict", sam::sam_verdict_from_json);
    r.plan_found = j.at("plan_found").get<bool>();
    r.success = j.at("success").get<bool>();
    r.failure_stage = j.at("failure_stage").get<std::string>();
    r.failure = j.at("failure").get<std::string>();
    const json& t = j.at("times");
    r.times.setup = t.at("setup").get<double>();
    r.times.imagination = t.at("imagination").get<double>();
    r.times.navigation = t.at("navigation").get<double>();
    r.times.follow = t.at("follow").get<double>();
    r.times.goal_config = t.at("goal_config").get<double>();
    r.times.trajectory = t.at("trajectory").get<double>();
    r.times.execution = t.at("execution").get<double>();
    r.times.verdict = t.at("verdict").get<double>();
    r.times.total = t.at("total").get<double>();
    return r;
  });
}

json without_timing(const json& result) {
  json out = result;
  out.erase("times");
  if (out.contains("imagination") && out["imagination"].is_object()) out["imagination"].erase("wall_time");
  return out;
}

// ---- layout ----

LoadedChair load_chair(const ChairSpec& spec) {
  LoadedChair out;
  if (!spec.mesh_path.empty()) {
    out.mesh = load_mesh(spec.mesh_path);
    out.description = spec.mesh_path;
    return out;
  }
  GeneratedChair g = generate_chair(spec.gen);
  out.mesh = std::move(g.mesh);
  out.seat = g.seat;
  out.description = to_string(spec.gen.variant) + ":" + std::to_string(spec.gen.seed);
  return out;
}

PlanarPose sample_chair_pose(const LoadedChair& chair, Protocol protocol, const LayoutParams& layout,
                             std::uint64_t seed) {
  layout.validate();
  std::mt19937_64 rng(stage_seed(seed, kLayout));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const Vec2 c = layout.square_center + layout.square * Vec2(u(rng), u(rng));
  const double spread = 2.0 * layout.direction_spread * u(rng);
  // Accessible: sitting direction toward the robot; otherwise away from it,
  // into the arm bench.
  const Vec2 to_robot = layout.robot_start.position() - c;
  const double toward = std::atan2(to_robot.y(), to_robot.x());
  const double dir = protocol == Protocol::Accessible ? toward + spread : toward + kPi + spread;
  const double seat_yaw = chair.seat ? chair.seat->sitting_yaw : 0.0;
  // the placement moves the chair frame; shift so the OBB center lands on c
  const double yaw = wrap_angle(dir - seat_yaw);
  const Obb local = compute_obb(chair.mesh);
  const Vec2 offset = (rot_z(yaw) * local.center).head<2>();
  return {c.x() - offset.x(), c.y() - offset.y(), yaw};
}

Arena make_arena(const Mesh& chair, const PlanarPose& chair_pose, const LayoutParams& layout) {
  Arena a;
  a.lo = layout.lo;
  a.hi = layout.hi;
  const Obb obb = transform_obb(compute_obb(chair), RigidTransform::from_yaw(chair_pose.heading, Vec3(chair_pose.x, chair_pose.y, 0.0)));
  const double swing = obb.half_extents.head<2>().norm();
  const double x0 = obb.center.x() + swing + layout.bench_gap;
  if (x0 < a.hi.x()) {
    const double y0 = std::max(a.lo.y(), obb.center.y() - layout.bench_half_width);
    const double y1 = std::min(a.hi.y(), obb.center.y() + layout.bench_half_width);
    a.polygons.push_back({{Vec2(x0, y0), Vec2(a.hi.x(), y0), Vec2(a.hi.x(), y1), Vec2(x0, y1)}});
  }
  a.validate();
  return a;
}

// ---- trial ----

TrialResult run_trial(const TrialConfig& cfg, Stage last) {
  const auto t_total = Clock::now();
  auto t = Clock::now();
  cfg.config.validate();
  const PipelineConfig& pc = cfg.config;
  TrialResult r;
  r.protocol = cfg.protocol;
  r.policy = cfg.policy.value_or(default_policy(cfg.protocol));
  r.seed = cfg.seed;
  r.robot_start = pc.layout.robot_start;

  const LoadedChair chair = load_chair(cfg.chair);
  r.chair = chair.description;
  r.chair_pose = cfg.chair_pose.value_or(sample_chair_pose(chair, cfg.protocol, pc.layout, cfg.seed));
  r.arena = make_arena(chair.mesh, r.chair_pose, pc.layout);
  const RigidTransform placement =
      RigidTransform::from_yaw(r.chair_pose.heading, Vec3(r.chair_pose.x, r.chair_pose.y, 0.0));
  const Mesh world_chair = chair.mesh.transformed(placement);
  const AgentModel agent = pc.agent();
  const sam::SamConfig sam_cfg = pc.sam_config();
  r.times.setup = seconds_since(t);

  auto finish = [&]() {
    r.success = r.failure_stage.empty() && r.plan_found && r.verdict && r.verdict->correct;
    if (r.failure_stage.empty() && r.verdict && !r.verdict->correct) {
      r.failure_stage = to_string(Stage::Verdict);
      r.failure = "bear settled in an incorrect sitting";
    }
    r.times.total = seconds_since(t_total);
    return r;
  };
  auto fail = [&](Stage s, const std::string& msg) {
    r.failure_stage = to_string(s);
    r.failure = msg;
    return finish();
  };

  // imagination
  t = Clock::now();
  {
    ImaginationReport report;
    try {
      r.pose = imagine(world_chair, agent, sam_cfg, pc.sim, pc.imagination, &report);
      r.imagination = report;
    } catch (const NoSittingFound& e) {
      r.imagination = report;
      r.times.imagination = seconds_since(t);
      return fail(Stage::Imagination, std::string("NoSittingFound: ") + e.what());
    }
  }
  r.times.imagination = seconds_since(t);
  if (last == Stage::Imagination) return finish();

  // navigation, with assistance when the chair is inaccessible
  t = Clock::now();
  ChairState state{compute_obb(world_chair), *r.pose, placement};
  {
    std::optional<GoalResult> goal;
    std::optional<Se2Trajectory> traj;
    r.initially_accessible = try_plan(state, r.arena, r.robot_start, pc.footprint, pc.se2,
                                      stage_seed(cfg.seed, kPlan), goal, traj, r.initial_failure);
    // a goal exists whenever only the plan failed
    if (goal) r.initial_goal = goal;
    if (r.initially_accessible) {
      r.goal = goal;
      r.se2_trajectory = traj;
      r.plan_found = true;
    } else {
      AssistanceOutcome out = assistance_loop(state, r.arena, r.robot_start, pc.footprint, pc.se2, r.policy,
                                              pc.assistance, stage_seed(cfg.seed, kAssist));
      state = out.final_state;
      r.plan_found = out.status == AccessStatus::Accessible;
      r.goal = out.goal;
      r.se2_trajectory = out.trajectory;
      r.assistance = std::move(out);
    }
  }
  r.times.navigation = seconds_since(t);
  if (!r.plan_found) {
    return fail(Stage::Navigation, "no SE(2) plan after " + std::to_string(r.assistance->rounds.size()) + " rotations");
  }
  if (last == Stage::Navigation) return finish();

  t = Clock::now();
  r.executed = follow_waypoints(*r.se2_trajectory, pc.noise, stage_seed(cfg.seed, kFollow));
  const PlanarPose robot = r.executed.back();
  r.times.follow = seconds_since(t);
  if (last == Stage::Follow) return finish();

  // whole-body problem in the sagittal frame of the final stance
  t = Clock::now();
  const WholebodyParams& wb = pc.wholebody;
  wholebody::SeatingProblem prob;
  prob.chain = wb.chain;
  prob.q_start = wb.q_start;
  const Vec3 target = r.goal->adjusted_p;
  const Vec2 fwd = robot.direction();
  prob.bear_target = Vec2((target.head<2>() - robot.position()).dot(fwd), target.z() + wb.release_lift);
  {
    double x0 = kInf, x1 = -kInf;
    for (const Vec2& c : state.obb.footprint()) {
      const double x = (c - robot.position()).dot(fwd);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
    prob.obstacle = wholebody::Rect{x0, x1, state.obb.bottom(), state.obb.top()};
  }
  prob.w1 = wb.w1;
  prob.w2 = wb.w2;
  prob.Q = VectorXd::Ones(wb.chain.n());
  prob.N = wb.N;
  prob.dt = wb.dt;
  prob.clearance = wb.clearance;
  prob.com_margin = wb.com_margin;
  r.bear_target = prob.bear_target;
  try {
    r.q_goal = wholebody::goal_config(prob);
  } catch (const Infeasible& e) {
    r.times.goal_config = seconds_since(t);
    return fail(Stage::GoalConfig, std::string("Infeasible: ") + e.what());
  }
  r.times.goal_config = seconds_since(t);
  if (last == Stage::GoalConfig) return finish();

  t = Clock::now();
  try {
    r.wb_trajectory = wholebody::plan_seating_trajectory(prob, *r.q_goal);
  } catch (const NoTrajectory& e) {
    r.times.trajectory = seconds_since(t);
    return fail(Stage::Trajectory, std::string("NoTrajectory: ") + e.what());
  }
  r.times.trajectory = seconds_since(t);
  if (last == Stage::Trajectory) return finish();

  // carry, release and settle the bear in the physics harness
  t = Clock::now();
  const double gamma = wrap_angle(robot.heading + kPi);
  wholebody::ReleaseResult rel;
  try {
    Scene scene(pc.sim, agent);
    scene.add_chair(chair.mesh, state.chair_to_world);
    scene.add_agent(wholebody::bear_base_at(wb.chain, wb.q_start, robot, gamma, agent), agent.pre_sitting,
                    JointMode::Locked, pc.sim.bear_damping);
    rel = wholebody::execute_and_release(*r.wb_trajectory, wb.chain, robot, gamma, scene, pc.sim, wb.dt);
  } catch (const Diverged& e) {
    r.times.execution = seconds_since(t);
    return fail(Stage::Execution, std::string("Diverged: ") + e.what());
  }
  r.released_base = rel.released_base;
  r.bear_base = rel.bear.base;
  r.times.execution = seconds_since(t);
  if (last == Stage::Execution) return finish();

  t = Clock::now();
  // the key configuration faces the commanded sitting direction
  r.verdict = sam::classify(rel.bear, sam::key_configuration(agent, state.pose.gamma), sam_cfg,
                            sam::body_parts(agent));
  r.times.verdict = seconds_since(t);
  return finish();
}

// ---- bench ----

BenchSummary summarize(const std::vector<TrialResult>& results) {
  BenchSummary s;
  s.rows = {{"Accessible"}, {"Obey"}, {"Disobey"}, {"Total"}};
  for (const auto& r : results) {
    BenchRow& row = s.rows[static_cast<std::size_t>(r.protocol)];
    ++row.trials;
    ++s.rows[3].trials;
    if (r.success) {
      ++row.successes;
      ++s.rows[3].successes;
    }
  }
  return s;
}

json to_json(const BenchSummary& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"protocol", r.name}, {"trials", r.trials}, {"successes", r.successes}, {"rate", r.rate()}});
  }
  return {{"rows", rows}, {"wall_time", s.wall_time}};
}

std::string format_table(const BenchSummary& s) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %8s %10s %8s\n", "protocol", "trials", "successes", "rate");
  out << line;
  for (const auto& r : s.rows) {
    std::snprintf(line, sizeof line, "%-12s %8d %10d %8.3f\n", r.name.c_str(), r.trials, r.successes, r.rate());
    out << line;
  }
  return out.str();
}

std::vector<TrialConfig> bench_suite(const std::vector<std::uint64_t>& chair_seeds, const PipelineConfig& config,
                                     std::uint64_t seed) {
  static constexpr Protocol kPlan[] = {Protocol::Accessible,       Protocol::Accessible,
                                       Protocol::Accessible,       Protocol::InaccessibleObey,
                                       Protocol::InaccessibleObey, Protocol::InaccessibleDisobey};
  std::vector<TrialConfig> suite;
  for (std::size_t c = 0; c < chair_seeds.size(); ++c) {
    for (std::size_t k = 0; k < std::size(kPlan); ++k) {
      TrialConfig t;
      t.chair.gen.seed = chair_seeds[c];
      t.protocol = kPlan[k];
      t.config = config;
      t.seed = stage_seed(seed, 1000 + 16 * c + k);
      suite.push_back(std::move(t));
    }
  }
  return suite;
}

std::vector<TrialResult> run_suite(const std::vector<TrialConfig>& suite, int parallel) {
  std::vector<TrialResult> results(suite.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < suite.size(); i = next++) {
      try {
        results[i] = run_trial(suite[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = suite.size();
      }
    }
  };
  const int k = std::max(1, std::min<int>(parallel, static_cast<int>(suite.size())));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < k; ++i) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<std::uint64_t> calibration_seeds() { return {0, 1, 2}; }

std::vector<std::uint64_t> heldout_seeds() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 100; i < 112; ++i) s.push_back(i);
  return s;
}

std::vector<std::uint64_t> desk_seeds() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 10; i < 20; ++i) s.push_back(i);
  return s;
}

}  // namespace seatbear
