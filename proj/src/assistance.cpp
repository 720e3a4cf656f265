#include "seatbear/assistance.hpp"

#include <cmath>
#include <random>
#include <regex>

#include "seatbear/error.hpp"
#include "seatbear/json_util.hpp"

namespace seatbear {

namespace ju = json_util;

namespace {

double seg_point_dist(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  const double t = l2 > 0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool capsule_hits_polygon(const Vec2& a, const Vec2& b, double r, const ConvexPolygon& poly) {
  if (poly.contains(a) || poly.contains(b)) return true;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& c = poly.vertices[i];
    const Vec2& d = poly.vertices[(i + 1) % n];
    if (segments_cross(a, b, c, d)) return true;
    if (seg_point_dist(a, b, c) <= r || seg_point_dist(c, d, a) <= r || seg_point_dist(c, d, b) <= r) {
      return true;
    }
  }
  return false;
}

// Chair excluded: the corridor starts at its center.
bool corridor_clear(const Vec2& a, const Vec2& b, double r, const Arena& arena) {
  for (const auto& p : arena.polygons) {
    if (capsule_hits_polygon(a, b, r, p)) return false;
  }
  for (const auto& d : arena.discs) {
    if (seg_point_dist(a, b, d.center) <= r + d.radius) return false;
  }
  return true;
}

const char* kTemplatePrefix = "Please rotate the chair about the vertical axis ";

}  // namespace

std::string to_string(RotationDirection d) {
  return d == RotationDirection::Clockwise ? "clockwise" : "counterclockwise";
}

std::string Instruction::text() const {
  return std::string(kTemplatePrefix) + to_string(direction) + " for " + std::to_string(angle_deg) +
         " degrees!";
}

double Instruction::yaw() const {
  const double a = deg2rad(angle_deg);
  return direction == RotationDirection::Clockwise ? -a : a;
}

Instruction parse_instruction(const std::string& text) {
  static const std::regex re(
      "Please rotate the chair about the vertical axis (clockwise|counterclockwise) for "
      "(0|30|60|90|120|150|180) degrees!");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("instruction: does not match the template");
  Instruction in;
  in.direction = m[1] == "clockwise" ? RotationDirection::Clockwise : RotationDirection::Counterclockwise;
  in.angle_deg = std::stoi(m[2]);
  in.precise_deg = in.direction == RotationDirection::Clockwise ? -in.angle_deg : in.angle_deg;
  return in;
}

Instruction quantize_rotation(double precise_deg) {
  double a = std::remainder(precise_deg, 360.0);  // [-180, 180]
  Instruction in;
  in.precise_deg = a;
  const double mag = std::abs(a);
  int q = mag <= 15.0 ? 0 : 30 * static_cast<int>(std::ceil((mag - 15.0) / 30.0));
  q = std::min(q, 180);
  in.angle_deg = q;
  in.direction = (a < 0 && q != 180) ? RotationDirection::Clockwise : RotationDirection::Counterclockwise;
  return in;
}

std::string to_string(HumanPolicy p) {
  switch (p) {
    case HumanPolicy::Obey: return "obey";
    case HumanPolicy::DisobeyFirst: return "disobey-first";
    case HumanPolicy::AlwaysDisobey: return "always-disobey";
  }
  return "obey";
}

HumanPolicy human_policy_from_string(const std::string& s) {
  if (s == "obey") return HumanPolicy::Obey;
  if (s == "disobey-first") return HumanPolicy::DisobeyFirst;
  if (s == "always-disobey") return HumanPolicy::AlwaysDisobey;
  throw ConfigError("unknown human policy: " + s);
}

void AssistanceParams::validate() const {
  if (max_rounds < 1) throw ConfigError("assistance: max_rounds must be >= 1");
  if (!(search_step > 0)) throw ConfigError("assistance: search_step must be > 0");
  if (!(disobey_error >= deg2rad(60.0) - 1e-12)) throw ConfigError("assistance: disobey_error must be >= 60 deg");
}

nlohmann::json to_json(const AssistanceParams& p) {
  return {{"max_rounds", p.max_rounds}, {"search_step", p.search_step}, {"disobey_error", p.disobey_error}};
}

AssistanceParams assistance_params_from_json(const nlohmann::json& j) {
  AssistanceParams p;
  try {
    p.max_rounds = j.value("max_rounds", p.max_rounds);
    p.search_step = j.value("search_step", p.search_step);
    p.disobey_error = j.value("disobey_error", p.disobey_error);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("assistance: ") + e.what());
  }
  p.validate();
  return p;
}

Instruction required_rotation(const SittingPose& g, const Obb& chair, const Vec2& robot_pos,
                              const Arena& arena, const Footprint& fp,
                              const AssistanceParams& params) {
  const Vec2 c = chair.center.head<2>();
  const Vec2 to_robot = robot_pos - c;
  const double len = to_robot.norm();
  const double bearing = std::atan2(to_robot.y(), to_robot.x());
  double target = bearing;
  // nearest free heading around the bearing, left before right
  const int steps = static_cast<int>(std::ceil(kPi / params.search_step));
  for (int k = 0; k <= steps; ++k) {
    bool hit = false;
    for (int s : {1, -1}) {
      const double psi = bearing + s * k * params.search_step;
      const Vec2 end = c + len * Vec2(std::cos(psi), std::sin(psi));
      if (corridor_clear(c, end, fp.minor(), arena)) {
        target = psi;
        hit = true;
        break;
      }
      if (k == 0) break;
    }
    if (hit) break;
  }
  return quantize_rotation(rad2deg(wrap_angle(target - g.gamma)));
}

double human_rotation(const Instruction& instr, HumanPolicy policy, int round,
                      const AssistanceParams& params, std::uint64_t seed) {
  const double commanded = instr.yaw();
  if (policy == HumanPolicy::Obey || (policy == HumanPolicy::DisobeyFirst && round > 1)) {
    return commanded;
  }
  if (policy == HumanPolicy::AlwaysDisobey) return 0.0;  // the human never turns the chair
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(round)};
  std::mt19937_64 rng(sq);
  std::bernoulli_distribution coin(0.5);
  const bool flip = coin(rng);
  const double sign = coin(rng) ? 1.0 : -1.0;
  // flipping 0 or 180 changes nothing, so those always get the angle error
  if (flip && instr.angle_deg != 0 && instr.angle_deg != 180) return -commanded;
  return commanded + sign * params.disobey_error;
}

ChairState apply_rotation(const ChairState& s, double yaw) {
  const RigidTransform g_rot = RigidTransform::yaw_about(yaw, s.obb.center);
  return {transform_obb(s.obb, g_rot), s.pose.mapped(g_rot), g_rot * s.chair_to_world};
}

bool try_plan(const ChairState& s, const Arena& arena, const PlanarPose& start,
              const Footprint& fp, const Se2Params& se2, std::uint64_t seed,
              std::optional<GoalResult>& goal, std::optional<Se2Trajectory>& traj,
              std::string& failure) {
  Arena a = arena;
  a.chair = s.obb;
  goal.reset();
  traj.reset();
  try {
    goal = compute_goal(s.pose, a, fp, se2);
    traj = plan_se2(start, goal->s_goal, a, fp, se2, seed);
    failure.clear();
    return true;
  } catch (const GoalOutsideArena& e) {
    failure = std::string("GoalOutsideArena: ") + e.what();
  } catch (const NoPlan& e) {
    failure = std::string("NoPlan: ") + e.what();
  }
  return false;
}

AssistanceOutcome assistance_loop(const ChairState& initial, const Arena& arena,
                                  const PlanarPose& start, const Footprint& fp,
                                  const Se2Params& se2, HumanPolicy policy,
                                  const AssistanceParams& params, std::uint64_t seed) {
  params.validate();
  AssistanceOutcome out;
  ChairState state = initial;
  for (int round = 1; round <= params.max_rounds; ++round) {
    Arena a = arena;
    a.chair = state.obb;
    AssistanceRound r;
    r.instruction = required_rotation(state.pose, state.obb, start.position(), a, fp, params);
    r.applied_yaw = human_rotation(r.instruction, policy, round, params, seed);
    r.g_rot = RigidTransform::yaw_about(r.applied_yaw, state.obb.center);
    state = apply_rotation(state, r.applied_yaw);
    r.plan_found = try_plan(state, arena, start, fp, se2, seed + static_cast<std::uint64_t>(round),
                            out.goal, out.trajectory, r.failure);
    out.rounds.push_back(r);
    if (r.plan_found) break;
  }
  out.final_state = state;
  out.status = !out.rounds.empty() && out.rounds.back().plan_found ? AccessStatus::Accessible
                                                                   : AccessStatus::Failed;
  return out;
}

nlohmann::json to_json(const AssistanceOutcome& o) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : o.rounds) {
    rounds.push_back({{"instruction", r.instruction.text()},
                      {"precise_deg", r.instruction.precise_deg},
                      {"applied_yaw", r.applied_yaw},
                      {"g_rot", ju::transform(r.g_rot)},
                      {"plan_found", r.plan_found},
                      {"failure", r.failure}});
  }
  nlohmann::json j = {
      {"rounds", rounds},
      {"status", o.status == AccessStatus::Accessible ? "Accessible" : "Failed"},
      {"final_obb", ju::obb(o.final_state.obb)},
      {"final_pose", to_json(o.final_state.pose)},
      {"chair_to_world", ju::transform(o.final_state.chair_to_world)}};
  j["goal"] = nullptr;
  if (o.goal) {
    j["goal"] = {{"s_goal", ju::planar(o.goal->s_goal)},
                 {"adjusted_p", ju::vec(o.goal->adjusted_p)},
                 {"distance", o.goal->distance}};
  }
  j["trajectory"] = o.trajectory ? to_json(*o.trajectory) : nlohmann::json(nullptr);
  return j;
}

AssistanceOutcome assistance_outcome_from_json(const nlohmann::json& j) {
  AssistanceOutcome o;
  for (const auto& r : j.at("rounds")) {
    AssistanceRound ar;
    ar.instruction = parse_instruction(r.at("instruction").get<std::string>());
    ar.instruction.precise_deg = r.at("precise_deg").get<double>();
    ar.applied_yaw = r.at("applied_yaw").get<double>();
    ar.g_rot = ju::transform(r.at("g_rot"));
    ar.plan_found = r.at("plan_found").get<bool>();
    ar.failure = r.at("failure").get<std::string>();
    o.rounds.push_back(ar);
  }
  o.status = j.at("status").get<std::string>() == "Accessible" ? AccessStatus::Accessible
                                                                : AccessStatus::Failed;
  o.final_state.obb = ju::obb(j.at("final_obb"));
  o.final_state.pose = sitting_pose_from_json(j.at("final_pose"));
  o.final_state.chair_to_world = ju::transform(j.at("chair_to_world"));
  if (!j.at("goal").is_null()) {
    const auto& g = j.at("goal");
    o.goal = GoalResult{ju::planar(g.at("s_goal")), ju::vec3(g.at("adjusted_p")),
                        g.at("distance").get<double>()};
  }
  if (!j.at("trajectory").is_null()) o.trajectory = se2_trajectory_from_json(j.at("trajectory"));
  return o;
}

}  // namespace seatbear
