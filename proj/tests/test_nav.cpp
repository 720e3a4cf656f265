#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "seatbear/assistance.hpp"
#include "seatbear/error.hpp"
#include "seatbear/se2_nav.hpp"

using namespace seatbear;

namespace {

// boundary sampling of the ellipse, plus containment of the obstacle's
// reference points, decides overlap
bool sampled_hit_disc(const PlanarPose& p, const Footprint& fp, const Disc& d) {
  const Eigen::Rotation2Dd r(p.heading);
  for (int k = 0; k < 20000; ++k) {
    const double a = 2 * kPi * k / 20000;
    const Vec2 q = p.position() + r * Vec2(fp.forward * std::cos(a), fp.lateral * std::sin(a));
    if ((q - d.center).norm() <= d.radius) return true;
  }
  const Vec2 l = r.inverse() * (d.center - p.position());
  return std::pow(l.x() / fp.forward, 2) + std::pow(l.y() / fp.lateral, 2) <= 1.0;
}

bool sampled_hit_polygon(const PlanarPose& p, const Footprint& fp, const ConvexPolygon& poly) {
  const Eigen::Rotation2Dd r(p.heading);
  for (int k = 0; k < 20000; ++k) {
    const double a = 2 * kPi * k / 20000;
    if (poly.contains(p.position() + r * Vec2(fp.forward * std::cos(a), fp.lateral * std::sin(a)))) return true;
  }
  for (const auto& v : poly.vertices) {
    const Vec2 l = r.inverse() * (v - p.position());
    if (std::pow(l.x() / fp.forward, 2) + std::pow(l.y() / fp.lateral, 2) <= 1.0) return true;
  }
  return false;
}

}  // namespace

TEST(Se2, EllipseCollisionMatchesSampling) {
  const Footprint fp;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  int mismatches = 0, hits = 0;
  for (int t = 0; t < 400; ++t) {
    const PlanarPose p{0.3 * u(rng), 0.3 * u(rng), 3 * u(rng)};
    const Disc d{{0.4 * u(rng), 0.4 * u(rng)}, 0.05 + 0.1 * std::abs(u(rng))};
    const ConvexPolygon poly = oracle::square(Vec2(0.4 * u(rng), 0.4 * u(rng)), 0.05 + 0.1 * std::abs(u(rng)), u(rng));
    const bool hd = ellipse_hits_disc(p, fp, d), hp = ellipse_hits_polygon(p, fp, poly);
    hits += hd + hp;
    mismatches += hd != sampled_hit_disc(p, fp, d);
    mismatches += hp != sampled_hit_polygon(p, fp, poly);
  }
  EXPECT_EQ(mismatches, 0);
  EXPECT_GT(hits, 50);
}

TEST(Se2, BoundsCheckUsesExtent) {
  Arena a;
  const Footprint fp{0.12, 0.16};
  EXPECT_FALSE(ellipse_leaves_bounds({1.5 - 0.121, 0, 0}, fp, a));
  EXPECT_TRUE(ellipse_leaves_bounds({1.5 - 0.119, 0, 0}, fp, a));
  EXPECT_TRUE(ellipse_leaves_bounds({1.5 - 0.15, 0, kPi / 2}, fp, a));
}

TEST(Se2, PlanIsCollisionFreeAndDeterministic) {
  Arena a;
  a.lo = {-1, -1};
  a.hi = {1.5, 1};
  a.polygons.push_back({{{0.4, -1}, {0.5, -1}, {0.5, 0.5}, {0.4, 0.5}}});
  const Footprint fp;
  const Se2Params sp;
  const PlanarPose s{0, 0, 0}, g{1, 0, kPi};
  const Se2Trajectory t = plan_se2(s, g, a, fp, sp, 7);
  ASSERT_GE(t.waypoints.size(), 2u);
  EXPECT_LT((t.waypoints.front().position() - s.position()).norm(), 1e-12);
  EXPECT_LT((t.waypoints.back().position() - g.position()).norm(), 1e-12);
  for (std::size_t i = 1; i < t.waypoints.size(); ++i)
    EXPECT_TRUE(segment_free(t.waypoints[i - 1], t.waypoints[i], a, fp, 0.5 * sp.resolution_xy,
                             0.5 * sp.resolution_heading));
  EXPECT_EQ(to_json(plan_se2(s, g, a, fp, sp, 7)).dump(), to_json(t).dump());
}

TEST(Se2, WallGivesNoPlan) {
  Arena a;
  a.lo = {-1, -1};
  a.hi = {1.5, 1};
  a.polygons.push_back({{{0.4, -1}, {0.5, -1}, {0.5, 1}, {0.4, 1}}});
  Se2Params sp;
  sp.max_samples = 3000;
  EXPECT_THROW(plan_se2({0, 0, 0}, {1, 0, 0}, a, Footprint{}, sp, 1), NoPlan);
  EXPECT_FALSE(oracle::disc_path_exists({0, 0}, {1, 0}, a, 0.1));
}

TEST(Se2, GridOracleAgreesOnSimpleCases) {
  Arena a;
  a.lo = {-1, -1};
  a.hi = {1, 1};
  a.discs.push_back({{0, 0}, 0.3});
  oracle::GridSe2 grid;
  EXPECT_TRUE(grid.solvable({-0.7, 0, 0}, {0.7, 0, 0}, a, Footprint{}));
  a.polygons.push_back({{{-0.05, -1}, {0.05, -1}, {0.05, 1}, {-0.05, 1}}});
  EXPECT_FALSE(grid.solvable({-0.7, 0, 0}, {0.7, 0, 0}, a, Footprint{}));
}

TEST(Se2, GoalFacesTheSeat) {
  Arena a;
  const SittingPose g{Vec3(0, 0, 0.3), 0.0};
  const GoalResult r = compute_goal(g, a, Footprint{}, Se2Params{});
  EXPECT_NEAR(r.s_goal.heading, kPi, 1e-12);
  EXPECT_NEAR(r.s_goal.y, 0.0, 1e-12);
  EXPECT_GE(r.distance, Se2Params{}.l_init - 1e-12);
  Arena small;
  small.hi = {0.2, 1.5};
  EXPECT_THROW(compute_goal(g, small, Footprint{}, Se2Params{}), GoalOutsideArena);
}

TEST(Se2, FollowerStaysWithinNoise) {
  Se2Trajectory t;
  for (int i = 0; i < 10; ++i) t.waypoints.push_back({0.1 * i, 0.0, 0.1 * i});
  const FollowNoise n{0.01, deg2rad(2)};
  const auto out = follow_waypoints(t, n, 3);
  ASSERT_EQ(out.size(), t.waypoints.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_LE((out[i].position() - t.waypoints[i].position()).norm(), n.xy + 1e-12);
    EXPECT_LE(std::abs(heading_diff(out[i].heading, t.waypoints[i].heading)), n.heading + 1e-12);
  }
  EXPECT_EQ(follow_waypoints(t, n, 3)[4].x, out[4].x);
}

TEST(Assistance, QuantizationAndTemplate) {
  EXPECT_EQ(quantize_rotation(44.0).angle_deg, 30);
  EXPECT_EQ(quantize_rotation(46.0).angle_deg, 60);
  EXPECT_EQ(quantize_rotation(45.0).angle_deg, 30);   // tie toward the smaller magnitude
  EXPECT_EQ(quantize_rotation(-15.0).angle_deg, 0);
  EXPECT_EQ(quantize_rotation(-100.0).direction, RotationDirection::Clockwise);
  EXPECT_EQ(quantize_rotation(-179.0).direction, RotationDirection::Counterclockwise);
  EXPECT_EQ(quantize_rotation(-179.0).angle_deg, 180);
  for (double d = -180; d <= 180; d += 7.5) {
    const Instruction i = quantize_rotation(d);
    EXPECT_EQ(i.angle_deg % 30, 0);
    EXPECT_LE(std::abs(wrap_angle(deg2rad(d) - i.yaw())), deg2rad(15.0) + 1e-12);
    const Instruction back = parse_instruction(i.text());
    EXPECT_EQ(back.angle_deg, i.angle_deg);
    EXPECT_EQ(back.direction, i.direction);
  }
  EXPECT_EQ(quantize_rotation(60).text(), "Please rotate the chair about the vertical axis counterclockwise for 60 degrees!");
  EXPECT_THROW(parse_instruction("rotate it"), ConfigError);
}

TEST(Assistance, HumanPolicies) {
  const AssistanceParams p;
  const Instruction i = quantize_rotation(90);
  EXPECT_DOUBLE_EQ(human_rotation(i, HumanPolicy::Obey, 1, p, 5), i.yaw());
  EXPECT_DOUBLE_EQ(human_rotation(i, HumanPolicy::DisobeyFirst, 2, p, 5), i.yaw());
  EXPECT_NE(human_rotation(i, HumanPolicy::DisobeyFirst, 1, p, 5), i.yaw());
  EXPECT_DOUBLE_EQ(human_rotation(i, HumanPolicy::AlwaysDisobey, 3, p, 5), 0.0);
}

TEST(Assistance, RotationMovesEverythingRigidly) {
  ChairState s;
  s.obb.center = Vec3(1, 1, 0.3);
  s.obb.half_extents = Vec3(0.2, 0.15, 0.3);
  s.pose = {Vec3(1.1, 1, 0.35), 0.0};
  const ChairState r = apply_rotation(s, kPi / 2);
  EXPECT_LT((r.obb.center - s.obb.center).norm(), 1e-12);
  EXPECT_LT((r.pose.p - Vec3(1, 1.1, 0.35)).norm(), 1e-12);
  EXPECT_NEAR(r.pose.gamma, kPi / 2, 1e-12);
  EXPECT_NEAR(r.chair_to_world.yaw(), kPi / 2, 1e-12);
}

TEST(Assistance, AlwaysDisobeyRunsOutOfRounds) {
  Arena a;
  a.lo = {-1.5, -1.5};
  a.hi = {1.5, 1.5};
  a.polygons.push_back({{{0.25, -1.5}, {1.5, -1.5}, {1.5, 1.5}, {0.25, 1.5}}});
  ChairState s;
  s.obb.center = Vec3(0, 0, 0.3);
  s.obb.half_extents = Vec3(0.15, 0.15, 0.3);
  s.pose = {Vec3(0.0, 0, 0.3), 0.0};  // facing the bench
  const auto out = assistance_loop(s, a, {-1, 0, 0}, Footprint{}, Se2Params{}, HumanPolicy::AlwaysDisobey,
                                   AssistanceParams{}, 1);
  EXPECT_EQ(out.rounds.size(), 3u);
  EXPECT_EQ(out.status, AccessStatus::Failed);
  const auto obey = assistance_loop(s, a, {-1, 0, 0}, Footprint{}, Se2Params{}, HumanPolicy::Obey,
                                    AssistanceParams{}, 1);
  EXPECT_EQ(obey.rounds.size(), 1u);
  EXPECT_EQ(obey.status, AccessStatus::Accessible);
  EXPECT_EQ(obey.rounds[0].instruction.angle_deg, 180);
}
