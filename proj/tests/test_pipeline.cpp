#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "seatbear/error.hpp"
#include "seatbear/pipeline.hpp"

using namespace seatbear;
using nlohmann::json;

namespace {

TrialResult fake(Protocol p, bool ok) {
  TrialResult r;
  r.protocol = p;
  r.success = ok;
  return r;
}

TrialConfig standard_trial(Protocol p, std::uint64_t seed) {
  TrialConfig t;
  t.chair.gen.seed = 100;
  t.protocol = p;
  t.seed = seed;
  return t;
}

const TrialResult& accessible_run() {
  static const TrialResult r = run_trial(standard_trial(Protocol::Accessible, 3));
  return r;
}

}  // namespace

TEST(Bench, RatesAndRows) {
  BenchSummary one = summarize({fake(Protocol::Accessible, true)});
  EXPECT_DOUBLE_EQ(one.rows[3].rate(), 1.0);
  BenchSummary mix = summarize({fake(Protocol::Accessible, true), fake(Protocol::InaccessibleObey, true),
                                fake(Protocol::InaccessibleDisobey, true), fake(Protocol::Accessible, false)});
  EXPECT_DOUBLE_EQ(mix.rows[3].rate(), 0.75);
  EXPECT_EQ(mix.rows[0].trials, 2);
  EXPECT_EQ(mix.rows[0].successes, 1);
  EXPECT_EQ(mix.rows[0].name, "Accessible");
  EXPECT_EQ(mix.rows[1].name, "Obey");
  EXPECT_EQ(mix.rows[2].name, "Disobey");
  EXPECT_EQ(mix.rows[3].name, "Total");
}

TEST(Bench, SuiteCounts) {
  const auto suite = bench_suite(heldout_seeds(), PipelineConfig{}, 0);
  std::vector<TrialResult> rs;
  for (const auto& t : suite) rs.push_back(fake(t.protocol, false));
  const BenchSummary s = summarize(rs);
  EXPECT_EQ(s.rows[0].trials, 36);
  EXPECT_EQ(s.rows[1].trials, 24);
  EXPECT_EQ(s.rows[2].trials, 12);
  EXPECT_EQ(s.rows[3].trials, 72);
  // every trial gets its own seed
  std::set<std::uint64_t> seeds;
  for (const auto& t : suite) seeds.insert(t.seed);
  EXPECT_EQ(seeds.size(), suite.size());
}

TEST(Bench, TableIsAligned) {
  const std::string table = format_table(summarize({fake(Protocol::Accessible, true)}));
  std::istringstream in(table);
  std::string line;
  std::size_t width = 0;
  int lines = 0;
  while (std::getline(in, line)) {
    if (width == 0) width = line.size();
    EXPECT_EQ(line.size(), width);
    ++lines;
  }
  EXPECT_EQ(lines, 5);
}

TEST(Config, ProtocolNames) {
  EXPECT_EQ(protocol_from_string("obey"), Protocol::InaccessibleObey);
  EXPECT_EQ(protocol_from_string(to_string(Protocol::InaccessibleDisobey)), Protocol::InaccessibleDisobey);
  EXPECT_THROW(protocol_from_string("sideways"), ConfigError);
}

TEST(Config, TrialConfigRoundTrip) {
  TrialConfig t = standard_trial(Protocol::InaccessibleObey, 77);
  t.chair_pose = PlanarPose{0.1, -0.2, 0.3};
  t.policy = HumanPolicy::AlwaysDisobey;
  const json j = to_json(t);
  EXPECT_EQ(to_json(trial_config_from_json(j)).dump(), j.dump());
  // missing keys keep the defaults
  EXPECT_EQ(to_json(trial_config_from_json(json::object())).dump(), to_json(TrialConfig{}).dump());
}

TEST(Config, InvalidValuesAreConfigErrors) {
  json j = to_json(TrialConfig{});
  j["config"]["sim"]["timestep"] = -1.0;
  EXPECT_THROW(trial_config_from_json(j), ConfigError);
  json k = to_json(TrialConfig{});
  k["config"]["layout"]["square"] = "wide";
  EXPECT_THROW(trial_config_from_json(k), ConfigError);
}

TEST(Layout, PlacementHonoursProtocol) {
  const LoadedChair chair = load_chair(ChairSpec{});
  const LayoutParams layout;
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (Protocol p : {Protocol::Accessible, Protocol::InaccessibleObey}) {
      const PlanarPose pose = sample_chair_pose(chair, p, layout, s);
      const Obb obb = transform_obb(compute_obb(chair.mesh),
                                    RigidTransform::from_yaw(pose.heading, Vec3(pose.x, pose.y, 0)));
      EXPECT_LE(std::abs(obb.center.x() - layout.square_center.x()), 0.5 * layout.square + 1e-9);
      EXPECT_LE(std::abs(obb.center.y() - layout.square_center.y()), 0.5 * layout.square + 1e-9);
      const double dir = pose.heading + chair.seat->sitting_yaw;
      const Vec2 to_robot = layout.robot_start.position() - obb.center.head<2>();
      const double off = std::abs(wrap_angle(dir - std::atan2(to_robot.y(), to_robot.x())));
      if (p == Protocol::Accessible) {
        EXPECT_LE(off, layout.direction_spread + 1e-9);
      } else {
        EXPECT_GE(off, kPi - layout.direction_spread - 1e-9);
      }
    }
  }
  EXPECT_EQ(sample_chair_pose(chair, Protocol::Accessible, layout, 4).x,
            sample_chair_pose(chair, Protocol::Accessible, layout, 4).x);
}

TEST(Layout, BenchStaysClearOfTheChair) {
  const LoadedChair chair = load_chair(ChairSpec{});
  const PlanarPose pose{0.1, 0.05, 1.0};
  const Arena a = make_arena(chair.mesh, pose, LayoutParams{});
  ASSERT_EQ(a.polygons.size(), 1u);
  const Obb obb = transform_obb(compute_obb(chair.mesh), RigidTransform::from_yaw(pose.heading, Vec3(pose.x, pose.y, 0)));
  // any rotation of the chair about its center stays off the bench
  for (int k = 0; k < 360; ++k) {
    Obb turned = obb;
    turned.yaw += deg2rad(k);
    for (const auto& c : turned.footprint()) EXPECT_FALSE(a.polygons[0].contains(c));
  }
}

TEST(Trial, AccessibleStandardChairSucceeds) {
  const TrialResult& r = accessible_run();
  EXPECT_TRUE(r.success) << r.failure_stage << ": " << r.failure;
  EXPECT_TRUE(r.initially_accessible);
  EXPECT_FALSE(r.assistance.has_value());
  ASSERT_TRUE(r.verdict.has_value());
  EXPECT_EQ(r.success, r.imagination->found && r.plan_found && r.verdict->correct);
}

TEST(Trial, JsonRoundTripIsByteIdentical) {
  const json j = to_json(accessible_run());
  const std::string text = j.dump();
  EXPECT_EQ(to_json(trial_result_from_json(json::parse(text))).dump(), text);
}

TEST(Trial, TimingIsPositiveAndSumsToTotal) {
  const StageTimes& t = accessible_run().times;
  for (double v : {t.imagination, t.navigation, t.follow, t.goal_config, t.trajectory, t.execution, t.verdict})
    EXPECT_GT(v, 0.0);
  EXPECT_NEAR(t.stage_sum(), t.total, 0.05 * t.total);
}

TEST(Trial, SameSeedSameResult) {
  const json a = without_timing(to_json(accessible_run()));
  const json b = without_timing(to_json(run_trial(standard_trial(Protocol::Accessible, 3))));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Trial, AlwaysDisobeyFailsAfterThreeRounds) {
  TrialConfig t = standard_trial(Protocol::InaccessibleDisobey, 5);
  t.policy = HumanPolicy::AlwaysDisobey;
  const TrialResult r = run_trial(t, Stage::Navigation);
  EXPECT_FALSE(r.success);
  EXPECT_FALSE(r.plan_found);
  ASSERT_TRUE(r.assistance.has_value());
  EXPECT_EQ(r.assistance->rounds.size(), 3u);
  EXPECT_EQ(r.assistance->status, AccessStatus::Failed);
  EXPECT_FALSE(r.failure_stage.empty());
}

TEST(Trial, ObeyNeedsOneRound) {
  const TrialResult r = run_trial(standard_trial(Protocol::InaccessibleObey, 8), Stage::Navigation);
  EXPECT_FALSE(r.initially_accessible);
  ASSERT_TRUE(r.assistance.has_value());
  EXPECT_EQ(r.assistance->rounds.size(), 1u);
  EXPECT_TRUE(r.plan_found);
}

TEST(Trial, MissingMeshIsAnError) {
  TrialConfig t;
  t.chair.mesh_path = "/nonexistent/chair.obj";
  EXPECT_THROW(run_trial(t), Error);
}
