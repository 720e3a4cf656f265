#include <random>
#include <set>

#include <gtest/gtest.h>

#include "seatbear/chair_gen.hpp"
#include "seatbear/error.hpp"
#include "seatbear/imagination.hpp"
#include "seatbear/sim_harness.hpp"

using namespace seatbear;

namespace {

Obb unit_obb(double hx = 0.2) {
  Obb o;
  o.half_extents = Vec3(hx, 0.15, 0.3);
  return o;
}

DropRecord record(int rotation, int k, bool correct, double jl, const SittingPose& pose = {}) {
  DropRecord d;
  d.spec = {rotation, k, rotation * kPi / 4, 0.0};
  d.verdict.correct = correct;
  d.verdict.JL = jl;
  d.pose_chair = pose;
  return d;
}

}  // namespace

TEST(Imagination, ScheduleCounts) {
  const DropSchedule base = make_schedule(unit_obb(), false);
  const DropSchedule ext = make_schedule(unit_obb(), true);
  EXPECT_EQ(base.drops.size(), 24u);
  EXPECT_EQ(ext.drops.size(), 56u);
  EXPECT_EQ(extension_drops(ext).size(), 32u);
  std::set<int> rotations;
  for (const auto& d : ext.drops) {
    rotations.insert(d.rotation);
    EXPECT_DOUBLE_EQ(d.alpha, d.rotation * kPi / 4);
    EXPECT_DOUBLE_EQ(d.offset, d.offset_index * ext.l_sit);
  }
  EXPECT_EQ(rotations, (std::set<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Imagination, StrideScalesWithBox) {
  const double a = make_schedule(unit_obb(0.2), false, 0.15).l_sit;
  const double b = make_schedule(unit_obb(0.4), false, 0.15).l_sit;
  EXPECT_NEAR(a, 0.06, 1e-12);
  EXPECT_NEAR(b, 2 * a, 1e-12);
}

TEST(Imagination, AggregateWeightedMean) {
  // weights 1/JL: 1/0.5 = 2 and 1/1 = 1
  std::vector<WeightedSitting> s = {{{Vec3(0.0, 0.0, 0.3), 0.2}, 0.5}, {{Vec3(0.3, 0.6, 0.6), -0.1}, 1.0}};
  const SittingPose p = aggregate_pose(s, RigidTransform::identity());
  EXPECT_LT((p.p - Vec3(0.1, 0.2, 0.4)).norm(), 1e-12);
  const double gamma = std::atan2(2 * std::sin(0.2) + std::sin(-0.1), 2 * std::cos(0.2) + std::cos(-0.1));
  EXPECT_NEAR(p.gamma, gamma, 1e-12);

  // mapped back through the alignment
  const RigidTransform g = RigidTransform::from_yaw(0.8, Vec3(1, 2, 0));
  const SittingPose q = aggregate_pose(s, g);
  EXPECT_LT((q.p - g.inverse().apply(p.p)).norm(), 1e-12);
  EXPECT_NEAR(wrap_angle(q.gamma - p.gamma + 0.8), 0.0, 1e-12);

  EXPECT_THROW(aggregate_pose({}, g), EmptyList);
}

TEST(Imagination, AggregateWrapsYaw) {
  std::vector<WeightedSitting> s = {{{Vec3::Zero(), kPi - 0.1}, 1.0}, {{Vec3::Zero(), -kPi + 0.1}, 1.0}};
  EXPECT_NEAR(std::abs(aggregate_pose(s, RigidTransform::identity()).gamma), kPi, 1e-12);
}

TEST(Imagination, ReducePicksMostCorrectThenLowestMeanJl) {
  ImaginationReport r;
  r.drops = {record(2, 0, true, 0.5), record(2, 1, true, 0.5), record(5, 0, true, 0.1), record(5, -1, true, 0.2),
             record(6, 0, true, 0.01), record(1, 0, false, 0.0)};
  reduce_report(r, RigidTransform::identity());
  EXPECT_TRUE(r.found);
  EXPECT_EQ(r.n_correct[2], 2);
  EXPECT_EQ(r.n_correct[5], 2);
  EXPECT_EQ(r.n_correct[1], 0);
  EXPECT_EQ(r.alpha_star, 5);  // tie on count, lower mean JL
  // sorted by (rotation, offset)
  for (std::size_t i = 1; i < r.drops.size(); ++i) {
    const auto& a = r.drops[i - 1].spec;
    const auto& b = r.drops[i].spec;
    EXPECT_TRUE(a.rotation < b.rotation || (a.rotation == b.rotation && a.offset_index < b.offset_index));
  }
}

TEST(Imagination, ReduceWithoutCorrectDrops) {
  ImaginationReport r;
  r.drops = {record(0, 0, false, 0.0), record(3, 1, false, 0.0)};
  reduce_report(r, RigidTransform::identity());
  EXPECT_FALSE(r.found);
  EXPECT_EQ(r.alpha_star, -1);
}

TEST(Imagination, FloorDropIsNotASitting) {
  const SimParams sim;
  const AgentModel agent = default_agent(sim);
  const DropRecord d = run_drop(Mesh{}, {0, 0, 0.0, 0.0}, agent, sam::SamConfig::defaults_for(agent), sim);
  EXPECT_FALSE(d.diverged);
  EXPECT_FALSE(d.verdict.correct);
  EXPECT_LT(d.verdict.H, 0.22);
}

TEST(Imagination, FindsSeatOnCalibrationChair) {
  ChairGenParams p;
  p.seed = 1;
  const GeneratedChair chair = generate_chair(p);
  const SimParams sim;
  const AgentModel agent = default_agent(sim);
  ImaginationReport report;
  const SittingPose pose =
      imagine(chair.mesh, agent, sam::SamConfig::defaults_for(agent), sim, ImaginationParams{}, &report);
  EXPECT_TRUE(report.found);
  EXPECT_EQ(report.drops.size(), report.extended ? 56u : 24u);
  EXPECT_TRUE(chair.seat.footprint_contains(pose.p.head<2>()));
  EXPECT_LT(std::abs(wrap_angle(pose.gamma - chair.seat.sitting_yaw)), deg2rad(15.0));
  const auto j = to_json(report);
  EXPECT_EQ(to_json(imagination_report_from_json(j)).dump(), j.dump());
}
