#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "seatbear/error.hpp"
#include "seatbear/sam.hpp"
#include "seatbear/sim_harness.hpp"
#include "seatbear/wholebody.hpp"

using namespace seatbear;
using namespace seatbear::wholebody;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_q(const PlanarChain& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd q(c.n());
  for (int i = 0; i < c.n(); ++i) q[i] = c.lower[i] + (c.upper[i] - c.lower[i]) * (0.05 + 0.9 * u(rng));
  return q;
}

// chair seat in front of the robot, bear above it
SeatingProblem seat_problem() {
  SeatingProblem p;
  p.chain = PlanarChain::default_chain();
  p.q_start = VectorXd(5);
  p.q_start << 0.0, 0.0, 0.0, 0.2, 1.0;
  p.bear_target = Vec2(0.30, 0.36);
  p.obstacle = Rect{0.18, 0.52, 0.0, 0.30};
  p.Q = VectorXd::Ones(5);
  return p;
}

// point-to-box distance, zero inside
double point_rect(const Vec2& p, const Rect& r) {
  const double dx = std::max({r.x0 - p.x(), 0.0, p.x() - r.x1});
  const double dz = std::max({r.z0 - p.y(), 0.0, p.y() - r.z1});
  return std::hypot(dx, dz);
}

// minimum translation over sampled directions (separating axis projections)
double sampled_penetration(const Vec2& a, const Vec2& b, const Rect& r) {
  const std::array<Vec2, 4> k{Vec2(r.x0, r.z0), Vec2(r.x1, r.z0), Vec2(r.x1, r.z1), Vec2(r.x0, r.z1)};
  double best = 1e300;
  for (int i = 0; i < 36000; ++i) {
    const Vec2 u(std::cos(i * kPi / 18000), std::sin(i * kPi / 18000));
    const double s0 = std::min(a.dot(u), b.dot(u)), s1 = std::max(a.dot(u), b.dot(u));
    double r0 = 1e300, r1 = -1e300;
    for (const auto& c : k) {
      r0 = std::min(r0, c.dot(u));
      r1 = std::max(r1, c.dot(u));
    }
    best = std::min(best, std::min(s1 - r0, r1 - s0));
  }
  return best;
}

}  // namespace

TEST(Wholebody, FkMatchesComposedRotations) {
  const PlanarChain c = PlanarChain::default_chain();
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const VectorXd q = random_q(c, rng);
    const ChainFk fk = forward_kinematics(c, q);
    Vec2 p(0.0, c.ankle_height);
    Eigen::Rotation2Dd r(0.0);
    double com = 0, mass = 0;
    for (int i = 0; i < c.n(); ++i) {
      r = r * Eigen::Rotation2Dd(-q[i]);  // positive pitch leans forward (+x)
      const Vec2 next = p + r * Vec2(0.0, c.lengths[i]);
      EXPECT_LT((fk.points[static_cast<std::size_t>(i) + 1] - next).norm(), 1e-12);
      com += c.masses[i] * 0.5 * (p.x() + next.x());
      mass += c.masses[i];
      p = next;
    }
    com += c.payload_mass * p.x();
    mass += c.payload_mass;
    EXPECT_LT((fk.hand - p).norm(), 1e-12);
    EXPECT_NEAR(fk.com_x, com / mass, 1e-12);
  }
  VectorXd q = VectorXd::Zero(c.n());
  q[1] = 0.5;
  EXPECT_THROW(forward_kinematics(c, q), JointLimit);
}

TEST(Wholebody, GradientsMatchCentralDifferences) {
  const SeatingProblem p = seat_problem();
  const PlanarChain& c = p.chain;
  std::mt19937_64 rng(9);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const VectorXd q = random_q(c, rng);
    for (int j = 1; j <= c.n(); ++j) {
      const MatrixXd J = point_jacobian(c, q, j);
      for (int row = 0; row < 2; ++row) {
        const VectorXd num = oracle::numeric_gradient(
            [&](const VectorXd& x) { return fk_unchecked(c, x).points[static_cast<std::size_t>(j)][row]; }, q);
        worst = std::max(worst, oracle::relative_error(J.row(row).transpose(), num));
      }
    }
    VectorXd g;
    com_x(c, q, &g);
    worst = std::max(worst, oracle::relative_error(g, oracle::numeric_gradient([&](const VectorXd& x) { return com_x(c, x); }, q)));
    goal_objective(p, q, &g);
    worst = std::max(worst, oracle::relative_error(g, oracle::numeric_gradient([&](const VectorXd& x) { return goal_objective(p, x); }, q)));
    MatrixXd R;
    pose_residual(p, q, &R);
    for (int row = 0; row < R.rows(); ++row) {
      const VectorXd num = oracle::numeric_gradient([&](const VectorXd& x) { return pose_residual(p, x)[row]; }, q);
      worst = std::max(worst, oracle::relative_error(R.row(row).transpose(), num));
    }
  }
  // trajectory cost over a whole waypoint matrix
  for (int t = 0; t < 5; ++t) {
    MatrixXd traj(p.N, c.n());
    for (int k = 0; k < p.N; ++k) traj.row(k) = random_q(c, rng).transpose();
    const VectorXd goal = random_q(c, rng);
    MatrixXd G;
    trajectory_objective(p, traj, goal, &G);
    const Eigen::Map<const VectorXd> flat(traj.data(), traj.size());
    const VectorXd num = oracle::numeric_gradient(
        [&](const VectorXd& x) {
          return trajectory_objective(p, Eigen::Map<const MatrixXd>(x.data(), traj.rows(), traj.cols()), goal);
        },
        flat);
    worst = std::max(worst, oracle::relative_error(Eigen::Map<const VectorXd>(G.data(), G.size()), num));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Wholebody, SegmentRectDistanceOracle) {
  const Rect r{0.0, 0.4, 0.1, 0.3};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.7);
  for (int t = 0; t < 200; ++t) {
    const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
    const double d = segment_rect_distance(a, b, r);
    double sampled = 1e300;
    for (int i = 0; i <= 4000; ++i) sampled = std::min(sampled, point_rect(a + (b - a) * (i / 4000.0), r));
    if (sampled > 1e-3) {
      EXPECT_NEAR(d, sampled, 1e-6);
    } else if (sampled == 0.0) {
      EXPECT_LE(d, 0.0);
      EXPECT_NEAR(-d, sampled_penetration(a, b, r), 1e-4);
    }
  }
}

TEST(Wholebody, AugmentedLagrangianSolvesSmallQp) {
  // min (x-3)^2 + (y-1)^2  s.t.  x + y = 2,  x <= 1.2   ->  (1.2, 0.8)
  NlpProblem prob;
  prob.n = 2;
  prob.lo = VectorXd::Constant(2, -10);
  prob.hi = VectorXd::Constant(2, 10);
  prob.objective = [](const VectorXd& x, VectorXd* g) {
    if (g) *g = VectorXd(2), (*g) << 2 * (x[0] - 3), 2 * (x[1] - 1);
    return std::pow(x[0] - 3, 2) + std::pow(x[1] - 1, 2);
  };
  prob.n_eq = 1;
  prob.eq = [](const VectorXd& x) { return VectorXd::Constant(1, x[0] + x[1] - 2); };
  prob.eq_grad = [](const VectorXd&, const VectorXd& w, VectorXd& g) { g.array() += w[0]; };
  prob.n_in = 1;
  prob.ineq = [](const VectorXd& x) { return VectorXd::Constant(1, x[0] - 1.2); };
  prob.ineq_grad = [](const VectorXd&, const VectorXd& w, VectorXd& g) { g[0] += w[0]; };
  const NlpResult r = solve_augmented_lagrangian(prob, VectorXd::Zero(2));
  EXPECT_NEAR(r.x[0], 1.2, 1e-5);
  EXPECT_NEAR(r.x[1], 0.8, 1e-5);
}

TEST(Wholebody, GoalAndTrajectorySatisfyConstraints) {
  const SeatingProblem p = seat_problem();
  ASSERT_TRUE(reachable(p));
  const VectorXd q_goal = goal_config(p);
  const ConstraintAudit g = audit_config(p, q_goal);
  EXPECT_LT(g.pose_residual, 1e-4);
  EXPECT_GE(g.com_margin, p.com_margin - 1e-9);
  EXPECT_GE(g.min_clearance, p.clearance - 1e-9);
  EXPECT_TRUE(g.within_limits);

  const MatrixXd traj = plan_seating_trajectory(p, q_goal);
  ASSERT_EQ(traj.rows(), p.N);
  EXPECT_EQ((traj.row(0).transpose() - p.q_start).norm(), 0.0);
  EXPECT_EQ((traj.row(p.N - 1).transpose() - q_goal).norm(), 0.0);
  const ConstraintAudit a = audit_trajectory(p, traj);
  EXPECT_GE(a.com_margin, p.com_margin - 1e-9);
  EXPECT_GE(a.min_clearance, p.clearance - 1e-9);
  EXPECT_TRUE(a.within_limits);
  EXPECT_LE(a.max_step_ratio, 1.0 + 1e-6);
  EXPECT_LE(a.corridor_violation, 1e-4);
}

TEST(Wholebody, UnreachableTargetIsInfeasible) {
  SeatingProblem p = seat_problem();
  p.bear_target = Vec2(1.5, 0.3);
  EXPECT_FALSE(reachable(p));
  EXPECT_THROW(goal_config(p), Infeasible);
}

TEST(Wholebody, StartEqualsGoalGivesConstantZeroCostTrajectory) {
  const SeatingProblem p = seat_problem();
  const MatrixXd traj = plan_seating_trajectory(p, p.q_start);
  for (int k = 0; k < traj.rows(); ++k) EXPECT_EQ((traj.row(k).transpose() - p.q_start).norm(), 0.0);
  EXPECT_EQ(trajectory_objective(p, traj, p.q_start), 0.0);
}

TEST(Wholebody, EmptyTrajectoryLeavesSceneUntouched) {
  const SimParams sim;
  const AgentModel bear = default_agent(sim);
  Scene scene(sim, bear);
  const RigidTransform base = RigidTransform::from_yaw(0.0, Vec3(0, 0, 0.5));
  scene.add_agent(base, bear.pre_sitting, JointMode::Locked, 0.0);
  const auto before = scene.snapshot();
  const ReleaseResult r = execute_and_release(MatrixXd(0, 5), PlanarChain::default_chain(), {}, 0.0, scene, sim, 0.25);
  EXPECT_FALSE(r.released);
  EXPECT_EQ(scene.snapshot().dump(), before.dump());
  EXPECT_EQ(scene.time(), 0.0);
}

TEST(Wholebody, ReleaseInFreeSpaceIsNotASitting) {
  const SimParams sim;
  const AgentModel bear = default_agent(sim);
  const PlanarChain c = PlanarChain::default_chain();
  const SeatingProblem p = seat_problem();
  MatrixXd traj(2, c.n());
  traj.row(0) = p.q_start.transpose();
  traj.row(1) = p.q_start.transpose();
  const PlanarPose robot{0, 0, 0};
  Scene scene(sim, bear);
  scene.add_agent(bear_base_at(c, p.q_start, robot, kPi, bear), bear.pre_sitting, JointMode::Locked, 0.0);
  const ReleaseResult r = execute_and_release(traj, c, robot, kPi, scene, sim, 0.25);
  EXPECT_TRUE(r.released);
  EXPECT_TRUE(r.bear.settled);
  const auto v = sam::classify(r.bear, sam::key_configuration(bear, kPi), sam::SamConfig::defaults_for(bear),
                               sam::body_parts(bear));
  EXPECT_FALSE(v.correct);
  EXPECT_LT(r.bear.height(), 0.22);
}
