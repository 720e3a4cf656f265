#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seatbear/geometry.hpp"
#include "seatbear/imagination.hpp"
#include "seatbear/sim_harness.hpp"

/// Bilaterally symmetric seating motion on a planar pitch chain.
/// Sagittal frame: x forward from the ankle, z up from the ground.
namespace seatbear::wholebody {

/// Pitch chain from the ankle to the hand. All-zero angles stand the chain
/// vertically; link i points along (sin phi_i, cos phi_i), phi_i = q_0 + ... + q_i.
struct PlanarChain {
  std::vector<std::string> joints;
  Eigen::VectorXd lengths;
  Eigen::VectorXd masses;   ///< both sides summed; point masses at link midpoints
  Eigen::VectorXd radii;    ///< capsule radii
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd vel_limit;  ///< rad/s
  double ankle_height = 0.07;
  double heel = -0.09;  ///< support interval S = [heel, toe]
  double toe = 0.16;
  int torso_link = 2;
  double payload_mass = 2.0;  ///< bear, as a point mass at the hand
  Vec2 grip_offset{0.0, 0.2};   ///< hand minus bear pelvis, sagittal frame

  int n() const { return static_cast<int>(lengths.size()); }
  double reach() const { return lengths.sum(); }
  double support_center() const { return 0.5 * (heel + toe); }
  void validate() const;
  /// Five-joint chain (ankle, knee, hip, shoulder, elbow), NAO proportions x1.6.
  static PlanarChain default_chain();
};

nlohmann::json to_json(const PlanarChain& c);
PlanarChain planar_chain_from_json(const nlohmann::json& j);

struct ChainFk {
  std::vector<Vec2> points;  ///< n + 1 joint points, ankle first, hand last
  std::vector<double> phi;   ///< absolute link pitch
  Vec2 hand = Vec2::Zero();
  double hand_pitch = 0.0;
  double com_x = 0.0;
};

/// Throws JointLimit when q leaves the limits (1e-9 slack).
ChainFk forward_kinematics(const PlanarChain& c, const Eigen::VectorXd& q);
/// Same without the limit check.
ChainFk fk_unchecked(const PlanarChain& c, const Eigen::VectorXd& q);
/// d point_j / d q, 2 x n.
Eigen::MatrixXd point_jacobian(const PlanarChain& c, const Eigen::VectorXd& q, int j);
double com_x(const PlanarChain& c, const Eigen::VectorXd& q, Eigen::VectorXd* grad = nullptr);

/// Chair section in the sagittal plane, axis-aligned.
struct Rect {
  double x0 = 0, x1 = 0, z0 = 0, z1 = 0;
};

/// Signed distance segment-to-rectangle (negative when overlapping).
double segment_rect_distance(const Vec2& a, const Vec2& b, const Rect& r);

struct SeatingProblem {
  PlanarChain chain;
  Eigen::VectorXd q_start;
  Vec2 bear_target = Vec2::Zero();  ///< bear pelvis, sagittal frame
  /// Forearm pitch to hold; unset leaves it free (the grip keeps the bear upright).
  std::optional<double> hand_pitch;
  std::optional<Rect> obstacle;
  double w1 = 1.0;
  double w2 = 0.5;
  Eigen::VectorXd Q;  ///< diagonal
  int N = 20;
  double dt = 0.25;          ///< s between waypoints
  double clearance = 0.01;   ///< m
  double com_margin = 0.005; ///< m
  double slack = 0.001;      ///< extra margin the solver aims for
  /// Between the waypoints the held bear stays no deeper than its release
  /// point and no lower than its release height.
  bool payload_corridor = true;

  Vec2 hand_target() const { return bear_target + chain.grip_offset; }
  void validate() const;
};

nlohmann::json to_json(const SeatingProblem& p);

/// Smoothed |x| used in the goal objective.
double smooth_abs(double x, double* d = nullptr);

/// w1 |COM_x - center(S)| + w2 |torso pitch|, smoothed.
double goal_objective(const SeatingProblem& p, const Eigen::VectorXd& q, Eigen::VectorXd* grad = nullptr);
/// Hand position (and pitch, when constrained) minus target.
Eigen::VectorXd pose_residual(const SeatingProblem& p, const Eigen::VectorXd& q,
                              Eigen::MatrixXd* jac = nullptr);
/// Links that must keep clearance (the forearm carrying the bear is exempt).
int collision_links(const PlanarChain& c);
/// Per checked link: signed distance minus capsule radius.
std::vector<double> link_clearances(const SeatingProblem& p, const Eigen::VectorXd& q);

/// Sum over k of 1/2 |q_k - q_goal|^2_Q; `traj` is N x n.
double trajectory_objective(const SeatingProblem& p, const Eigen::MatrixXd& traj,
                            const Eigen::VectorXd& q_goal, Eigen::MatrixXd* grad = nullptr);

struct ConstraintAudit {
  double pose_residual = 0.0;
  double com_margin = 0.0;      ///< min distance of COM_x to the support ends
  double min_clearance = 0.0;   ///< min link clearance (inf without obstacle)
  bool within_limits = true;
  double max_step_ratio = 0.0;  ///< max |dq| / (v dt)
  double corridor_violation = 0.0;  ///< m, after the first waypoint
};

ConstraintAudit audit_config(const SeatingProblem& p, const Eigen::VectorXd& q);
ConstraintAudit audit_trajectory(const SeatingProblem& p, const Eigen::MatrixXd& traj);

/// Analytic reach test of the hand target from the ankle.
bool reachable(const SeatingProblem& p);

/// Throws Infeasible.
Eigen::VectorXd goal_config(const SeatingProblem& p);

/// N x n waypoint matrix, row 0 = q_start, row N-1 = q_goal. Throws NoTrajectory.
Eigen::MatrixXd plan_seating_trajectory(const SeatingProblem& p, const Eigen::VectorXd& q_goal);

// ---- generic solver, exposed for tests ----

struct NlpProblem {
  int n = 0;
  Eigen::VectorXd lo, hi;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> objective;
  int n_eq = 0;
  int n_in = 0;  ///< g(x) <= 0
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eq;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> ineq;
  /// grad += J^T w
  std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::VectorXd&)> eq_grad;
  std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::VectorXd&)> ineq_grad;
};

struct NlpResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double max_eq = 0.0;
  double max_in = 0.0;
  int outer = 0;
};

NlpResult solve_augmented_lagrangian(const NlpProblem& prob, Eigen::VectorXd x0,
                                     int max_outer = 40, int max_inner = 3000);

// ---- execution in the physics harness ----

/// Robot stance in the world, the sagittal frame's origin and heading.
RigidTransform sagittal_to_world(const PlanarPose& robot);
/// Bear base pose carried by the hand, sitting yaw `gamma`.
RigidTransform bear_base_at(const PlanarChain& c, const Eigen::VectorXd& q, const PlanarPose& robot,
                            double gamma, const AgentModel& bear);

struct ReleaseResult {
  Configuration bear;
  RigidTransform released_base;
  bool released = false;
  double sim_time = 0.0;
};

/// Carries the bear along `traj` (kinematic hold, `dt` seconds per segment),
/// detaches it at the last waypoint and settles. An empty trajectory leaves
/// the scene untouched.
ReleaseResult execute_and_release(const Eigen::MatrixXd& traj, const PlanarChain& c,
                                  const PlanarPose& robot, double gamma, Scene& scene,
                                  const SimParams& sim, double dt);

}  // namespace seatbear::wholebody
