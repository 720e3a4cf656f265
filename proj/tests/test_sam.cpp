#include <random>

#include <gtest/gtest.h>

#include "seatbear/agent.hpp"
#include "seatbear/error.hpp"
#include "seatbear/sam.hpp"
#include "seatbear/sim_harness.hpp"

using namespace seatbear;

namespace {

Configuration random_config(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> g(0.0, 1.0);
  Configuration c;
  c.theta = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) c.theta[i] = 2.0 * g(rng);
  for (int i = 0; i < m; ++i) c.link_z.push_back(Vec3(g(rng), g(rng), g(rng)).normalized());
  c.contacts.assign(static_cast<std::size_t>(m), 0);
  return c;
}

}  // namespace

TEST(Sam, ScoresMatchHandComputation) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    const int n = 8, m = 9;
    const Configuration res = random_config(rng, n, m), key = random_config(rng, n, m);
    Eigen::VectorXd wj(n), wl(m);
    for (int i = 0; i < n; ++i) wj[i] = u(rng);
    for (int i = 0; i < m; ++i) wl[i] = u(rng);
    double J = 0, L = 0;
    for (int i = 0; i < n; ++i) J += wj[i] * std::abs(res.theta[i] - key.theta[i]);
    for (int i = 0; i < m; ++i) {
      const Vec3& a = res.link_z[static_cast<std::size_t>(i)];
      const Vec3& b = key.link_z[static_cast<std::size_t>(i)];
      L += wl[i] * (1.0 - (a.x() * b.x() + a.y() * b.y() + a.z() * b.z()));
    }
    EXPECT_NEAR(sam::joint_angle_score(res, key, wj), J, 1e-9);
    EXPECT_NEAR(sam::link_rotation_score(res, key, wl), L, 1e-9);
  }
}

TEST(Sam, ScoreLengthMismatchThrows) {
  std::mt19937_64 rng(1);
  const Configuration a = random_config(rng, 3, 4), b = random_config(rng, 3, 4);
  EXPECT_THROW(sam::joint_angle_score(a, b, Eigen::VectorXd::Ones(2)), LengthMismatch);
  EXPECT_THROW(sam::link_rotation_score(a, b, Eigen::VectorXd::Ones(5)), LengthMismatch);
}

TEST(Sam, ContactTruthTable) {
  const BodyPart kinds[3] = {BodyPart::Lower, BodyPart::Upper, BodyPart::Other};
  int cases = 0;
  for (int p = 0; p < 27; ++p) {
    const std::vector<BodyPart> parts = {kinds[p % 3], kinds[(p / 3) % 3], kinds[p / 9]};
    for (int c = 0; c < 27; ++c) {
      const std::vector<int> T = {c % 3, (c / 3) % 3, c / 9};
      int lower = 0, upper = 0;
      for (int i = 0; i < 3; ++i) {
        if (parts[static_cast<std::size_t>(i)] == BodyPart::Lower) lower += T[static_cast<std::size_t>(i)];
        if (parts[static_cast<std::size_t>(i)] == BodyPart::Upper) upper += T[static_cast<std::size_t>(i)];
      }
      for (int min_total = 0; min_total <= 6; ++min_total)
        for (int min_upper = 0; min_upper <= 2; ++min_upper) {
          const bool expect = lower + upper > min_total && lower > 0 && upper >= min_upper;
          EXPECT_EQ(sam::contact_ok(T, parts, min_total, min_upper), expect);
          ++cases;
        }
    }
  }
  EXPECT_EQ(cases, 27 * 27 * 21);
}

TEST(Sam, ClassifyIsConjunction) {
  const AgentModel agent = AgentModel::default_child();
  sam::SamConfig cfg = sam::SamConfig::defaults_for(agent);
  Configuration key = sam::key_configuration(agent);
  Configuration res = key;
  res.base.translation.z() = 0.3;
  const auto parts = sam::body_parts(agent);
  for (std::size_t i = 0; i < parts.size(); ++i) res.contacts[i] = parts[i] == BodyPart::Other ? 0 : 2;
  sam::SamVerdict v = sam::classify(res, key, cfg, parts);
  EXPECT_DOUBLE_EQ(v.J, 0.0);
  EXPECT_NEAR(v.L, 0.0, 1e-12);
  EXPECT_TRUE(v.phi);
  EXPECT_TRUE(v.correct);

  // each criterion alone breaks the verdict
  Configuration low = res;
  low.base.translation.z() = cfg.h_min - 0.01;
  EXPECT_FALSE(sam::classify(low, key, cfg, parts).correct);
  Configuration bent = res;
  bent.theta[0] += cfg.j_max + 0.1;
  EXPECT_FALSE(sam::classify(bent, key, cfg, parts).correct);
  Configuration bare = res;
  std::fill(bare.contacts.begin(), bare.contacts.end(), 0);
  EXPECT_FALSE(sam::classify(bare, key, cfg, parts).correct);
  Configuration tipped = res;
  for (auto& z : tipped.link_z) z = Vec3::UnitX();
  EXPECT_FALSE(sam::classify(tipped, key, cfg, parts).correct);
}

TEST(Sam, KeyConfigurationYawDoesNotChangeScores) {
  const AgentModel agent = AgentModel::default_child();
  const sam::SamConfig cfg = sam::SamConfig::defaults_for(agent);
  const Configuration a = sam::key_configuration(agent, 0.0);
  const Configuration b = sam::key_configuration(agent, 1.2);
  // a yawed upright agent compared to the yawed key scores zero
  EXPECT_NEAR(sam::link_rotation_score(b, b, cfg.link_weights), 0.0, 1e-12);
  EXPECT_NEAR(sam::joint_angle_score(a, b, cfg.joint_weights), 0.0, 1e-12);
  EXPECT_GT(sam::link_rotation_score(b, a, cfg.link_weights), 0.1);
}

TEST(Sam, ConfigJsonRoundTrip) {
  const sam::SamConfig cfg = sam::SamConfig::defaults_for(AgentModel::default_child());
  const auto j = sam::to_json(cfg);
  EXPECT_EQ(sam::to_json(sam::sam_config_from_json(j)).dump(), j.dump());
}
