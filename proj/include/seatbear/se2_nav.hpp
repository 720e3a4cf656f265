#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "seatbear/geometry.hpp"
#include "seatbear/imagination.hpp"

namespace seatbear {

struct Disc {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

/// Convex polygon, counterclockwise.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  bool contains(const Vec2& p) const;
};

ConvexPolygon obb_footprint_polygon(const Obb& obb);

struct Arena {
  Vec2 lo{-1.5, -1.5};
  Vec2 hi{1.5, 1.5};
  std::vector<ConvexPolygon> polygons;
  std::vector<Disc> discs;
  std::optional<Obb> chair;

  void validate() const;
  bool inside(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
};

nlohmann::json to_json(const Arena& a);
Arena arena_from_json(const nlohmann::json& j);

/// Ellipse footprint: `forward` along the heading, `lateral` across it.
struct Footprint {
  double forward = 0.12;
  double lateral = 0.16;

  double minor() const { return std::min(forward, lateral); }
  double major() const { return std::max(forward, lateral); }
  Footprint inflated(double m) const { return {forward + m, lateral + m}; }
  void validate() const;
};

struct Se2Params {
  double l_init = 0.25;
  double d_max_reach = 0.35;
  double goal_step = 0.005;        ///< ray advance per collision check (m)
  double heading_weight = 0.3;     ///< m per rad in the planner metric
  int max_samples = 20000;
  double resolution_xy = 0.01;
  double resolution_heading = deg2rad(2.0);
  int shortcut_attempts = 200;
  double extend_step = 0.15;       ///< metric units
  double waypoint_spacing = 0.05;  ///< output densification (m)
  double waypoint_heading = deg2rad(10.0);
  double margin = 0.01;            ///< footprint inflation while planning (m)

  void validate() const;
};

nlohmann::json to_json(const Se2Params& p);
Se2Params se2_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Footprint& f);
Footprint footprint_from_json(const nlohmann::json& j);

struct Se2Trajectory {
  std::vector<PlanarPose> waypoints;
  double resolution_xy = 0.01;
  double resolution_heading = deg2rad(2.0);

  /// Sum of xy segment lengths.
  double length() const;
};

nlohmann::json to_json(const Se2Trajectory& t);
Se2Trajectory se2_trajectory_from_json(const nlohmann::json& j);

/// Shortest signed arc from a to b.
double heading_diff(double a, double b);
PlanarPose interpolate(const PlanarPose& a, const PlanarPose& b, double s);

/// True iff the ellipse at `pose` overlaps an obstacle or leaves the bounds.
bool footprint_collides(const PlanarPose& pose, const Arena& arena, const Footprint& fp);
/// Solid ellipse vs single obstacles, exposed for tests.
bool ellipse_hits_polygon(const PlanarPose& pose, const Footprint& fp, const ConvexPolygon& poly);
bool ellipse_hits_disc(const PlanarPose& pose, const Footprint& fp, const Disc& disc);
bool ellipse_leaves_bounds(const PlanarPose& pose, const Footprint& fp, const Arena& arena);

/// Segment check at the given resolution, endpoints included.
bool segment_free(const PlanarPose& a, const PlanarPose& b, const Arena& arena,
                  const Footprint& fp, double res_xy, double res_heading);

struct GoalResult {
  PlanarPose s_goal;
  Vec3 adjusted_p = Vec3::Zero();
  double distance = 0.0;  ///< |s_goal - p| before adjustment
};

/// Throws GoalOutsideArena when the advanced goal leaves the arena.
GoalResult compute_goal(const SittingPose& g, const Arena& arena, const Footprint& fp,
                        const Se2Params& params);

/// RRT-Connect with shortcutting. Throws NoPlan.
Se2Trajectory plan_se2(const PlanarPose& start, const PlanarPose& goal, const Arena& arena,
                       const Footprint& fp, const Se2Params& params, std::uint64_t seed);

struct FollowNoise {
  double xy = 0.0;       ///< m, radial bound
  double heading = 0.0;  ///< rad
};

/// Kinematic follower. Each waypoint is reached up to the noise bound.
std::vector<PlanarPose> follow_waypoints(const Se2Trajectory& traj, const FollowNoise& noise,
                                         std::uint64_t seed);

}  // namespace seatbear
