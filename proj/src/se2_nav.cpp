#include "seatbear/se2_nav.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "seatbear/error.hpp"
#include "seatbear/json_util.hpp"

namespace seatbear {

namespace ju = json_util;

namespace {

// Distance from (y0, y1), first quadrant, to the ellipse with semi-axes
// e0 >= e1 (bisection on the Lagrange multiplier, after Eberly).
double dist_to_ellipse_q1(double e0, double e1, double y0, double y1) {
  if (y1 > 0) {
    if (y0 > 0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double n0 = r0 * z0;
      double s0 = z1 - 1.0;
      double s1 = g < 0 ? 0.0 : std::hypot(n0, z1) - 1.0;
      double s = 0.0;
      for (int i = 0; i < 200; ++i) {
        s = 0.5 * (s0 + s1);
        if (s == s0 || s == s1) break;
        const double a = n0 / (s + r0), b = z1 / (s + 1.0);
        const double gs = a * a + b * b - 1.0;
        if (gs > 0) s0 = s;
        else if (gs < 0) s1 = s;
        else break;
      }
      const double x0 = r0 * y0 / (s + r0);
      const double x1 = y1 / (s + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer = e0 * y0, denom = e0 * e0 - e1 * e1;
  if (numer < denom) {
    const double xde = numer / denom;
    const double x0 = e0 * xde;
    const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde * xde));
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

// Point in the ellipse frame, scaled so the ellipse becomes the unit circle.
Vec2 to_unit(const PlanarPose& pose, const Footprint& fp, const Vec2& p) {
  const double c = std::cos(pose.heading), s = std::sin(pose.heading);
  const Vec2 d = p - pose.position();
  return {(c * d.x() + s * d.y()) / fp.forward, (-s * d.x() + c * d.y()) / fp.lateral};
}

double seg_origin_dist2(const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  double t = l2 > 0 ? -a.dot(ab) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab).squaredNorm();
}

double metric(const PlanarPose& a, const PlanarPose& b, double w) {
  return (b.position() - a.position()).norm() + w * std::abs(heading_diff(a.heading, b.heading));
}

struct Tree {
  std::vector<PlanarPose> nodes;
  std::vector<int> parent;

  int nearest(const PlanarPose& q, double w) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = metric(nodes[i], q, w);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }
  int add(const PlanarPose& q, int par) {
    nodes.push_back(q);
    parent.push_back(par);
    return static_cast<int>(nodes.size()) - 1;
  }
  std::vector<PlanarPose> branch(int i) const {
    std::vector<PlanarPose> out;
    for (; i >= 0; i = parent[static_cast<std::size_t>(i)]) out.push_back(nodes[static_cast<std::size_t>(i)]);
    return out;
  }
};

enum class Ext { Trapped, Advanced, Reached };

}  // namespace

bool ConvexPolygon::contains(const Vec2& p) const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = vertices[(i + 1) % n] - vertices[i];
    const Vec2 d = p - vertices[i];
    if (e.x() * d.y() - e.y() * d.x() < 0) return false;
  }
  return true;
}

ConvexPolygon obb_footprint_polygon(const Obb& obb) {
  const auto fp = obb.footprint();
  return {{fp.begin(), fp.end()}};
}

void Arena::validate() const {
  if (!(hi.x() > lo.x()) || !(hi.y() > lo.y())) throw ConfigError("arena: degenerate bounds");
  for (const auto& p : polygons) {
    if (p.vertices.size() < 3) throw ConfigError("arena: polygon needs 3 vertices");
    for (const auto& v : p.vertices) {
      if (!inside(v)) throw ConfigError("arena: polygon outside bounds");
    }
  }
  for (const auto& d : discs) {
    if (!(d.radius > 0) || !inside(d.center)) throw ConfigError("arena: bad disc");
  }
}

nlohmann::json to_json(const Arena& a) {
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& p : a.polygons) {
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : p.vertices) vs.push_back(ju::vec(v));
    polys.push_back(vs);
  }
  nlohmann::json discs = nlohmann::json::array();
  for (const auto& d : a.discs) discs.push_back({{"center", ju::vec(d.center)}, {"radius", d.radius}});
  nlohmann::json j = {{"lo", ju::vec(a.lo)}, {"hi", ju::vec(a.hi)}, {"polygons", polys}, {"discs", discs}};
  j["chair"] = a.chair ? ju::obb(*a.chair) : nlohmann::json(nullptr);
  return j;
}

Arena arena_from_json(const nlohmann::json& j) {
  Arena a;
  try {
    a.lo = ju::vec2(j.at("lo"));
    a.hi = ju::vec2(j.at("hi"));
    for (const auto& p : j.value("polygons", nlohmann::json::array())) {
      ConvexPolygon poly;
      for (const auto& v : p) poly.vertices.push_back(ju::vec2(v));
      a.polygons.push_back(poly);
    }
    for (const auto& d : j.value("discs", nlohmann::json::array())) {
      a.discs.push_back({ju::vec2(d.at("center")), d.at("radius").get<double>()});
    }
    if (j.contains("chair") && !j.at("chair").is_null()) a.chair = ju::obb(j.at("chair"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("arena: ") + e.what());
  }
  a.validate();
  return a;
}

void Footprint::validate() const {
  if (!(forward > 0) || !(lateral > 0)) throw ConfigError("footprint: semi-axes must be > 0");
}

nlohmann::json to_json(const Footprint& f) { return {{"forward", f.forward}, {"lateral", f.lateral}}; }

Footprint footprint_from_json(const nlohmann::json& j) {
  Footprint f;
  try {
    f.forward = j.value("forward", f.forward);
    f.lateral = j.value("lateral", f.lateral);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("footprint: ") + e.what());
  }
  f.validate();
  return f;
}

void Se2Params::validate() const {
  if (!(l_init > 0) || !(d_max_reach > 0) || !(goal_step > 0)) {
    throw ConfigError("se2: l_init, d_max_reach, goal_step must be > 0");
  }
  if (!(heading_weight >= 0) || max_samples < 1 || shortcut_attempts < 0) {
    throw ConfigError("se2: bad planner budget");
  }
  if (!(resolution_xy > 0) || !(resolution_heading > 0) || !(extend_step > 0) ||
      !(waypoint_spacing > 0) || !(waypoint_heading > 0) || !(margin >= 0)) {
    throw ConfigError("se2: resolutions must be > 0");
  }
}

nlohmann::json to_json(const Se2Params& p) {
  return {{"l_init", p.l_init},
          {"d_max_reach", p.d_max_reach},
          {"goal_step", p.goal_step},
          {"heading_weight", p.heading_weight},
          {"max_samples", p.max_samples},
          {"resolution_xy", p.resolution_xy},
          {"resolution_heading", p.resolution_heading},
          {"shortcut_attempts", p.shortcut_attempts},
          {"extend_step", p.extend_step},
          {"waypoint_spacing", p.waypoint_spacing},
          {"waypoint_heading", p.waypoint_heading},
          {"margin", p.margin}};
}

Se2Params se2_params_from_json(const nlohmann::json& j) {
  Se2Params p;
  try {
    p.l_init = j.value("l_init", p.l_init);
    p.d_max_reach = j.value("d_max_reach", p.d_max_reach);
    p.goal_step = j.value("goal_step", p.goal_step);
    p.heading_weight = j.value("heading_weight", p.heading_weight);
    p.max_samples = j.value("max_samples", p.max_samples);
    p.resolution_xy = j.value("resolution_xy", p.resolution_xy);
    p.resolution_heading = j.value("resolution_heading", p.resolution_heading);
    p.shortcut_attempts = j.value("shortcut_attempts", p.shortcut_attempts);
    p.extend_step = j.value("extend_step", p.extend_step);
    p.waypoint_spacing = j.value("waypoint_spacing", p.waypoint_spacing);
    p.waypoint_heading = j.value("waypoint_heading", p.waypoint_heading);
    p.margin = j.value("margin", p.margin);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("se2: ") + e.what());
  }
  p.validate();
  return p;
}

double Se2Trajectory::length() const {
  double l = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    l += (waypoints[i].position() - waypoints[i - 1].position()).norm();
  }
  return l;
}

nlohmann::json to_json(const Se2Trajectory& t) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& p : t.waypoints) w.push_back(ju::planar(p));
  return {{"waypoints", w}, {"resolution_xy", t.resolution_xy}, {"resolution_heading", t.resolution_heading}};
}

Se2Trajectory se2_trajectory_from_json(const nlohmann::json& j) {
  Se2Trajectory t;
  for (const auto& w : j.at("waypoints")) t.waypoints.push_back(ju::planar(w));
  t.resolution_xy = j.at("resolution_xy").get<double>();
  t.resolution_heading = j.at("resolution_heading").get<double>();
  return t;
}

double heading_diff(double a, double b) { return wrap_angle(b - a); }

PlanarPose interpolate(const PlanarPose& a, const PlanarPose& b, double s) {
  return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
          wrap_angle(a.heading + s * heading_diff(a.heading, b.heading))};
}

bool ellipse_hits_polygon(const PlanarPose& pose, const Footprint& fp, const ConvexPolygon& poly) {
  // the affine map to the unit circle keeps overlap and convexity
  if (poly.contains(pose.position())) return true;
  const std::size_t n = poly.vertices.size();
  std::vector<Vec2> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = to_unit(pose, fp, poly.vertices[i]);
  for (std::size_t i = 0; i < n; ++i) {
    if (seg_origin_dist2(u[i], u[(i + 1) % n]) <= 1.0) return true;
  }
  return false;
}

bool ellipse_hits_disc(const PlanarPose& pose, const Footprint& fp, const Disc& disc) {
  const Vec2 q = to_unit(pose, fp, disc.center);
  if (q.squaredNorm() <= 1.0) return true;
  double y0 = std::abs(q.x() * fp.forward), y1 = std::abs(q.y() * fp.lateral);
  double e0 = fp.forward, e1 = fp.lateral;
  if (e1 > e0) {
    std::swap(e0, e1);
    std::swap(y0, y1);
  }
  return dist_to_ellipse_q1(e0, e1, y0, y1) <= disc.radius;
}

bool ellipse_leaves_bounds(const PlanarPose& pose, const Footprint& fp, const Arena& arena) {
  const double c = std::cos(pose.heading), s = std::sin(pose.heading);
  const double ex = std::sqrt(fp.forward * fp.forward * c * c + fp.lateral * fp.lateral * s * s);
  const double ey = std::sqrt(fp.forward * fp.forward * s * s + fp.lateral * fp.lateral * c * c);
  return pose.x - ex < arena.lo.x() || pose.x + ex > arena.hi.x() || pose.y - ey < arena.lo.y() ||
         pose.y + ey > arena.hi.y();
}

bool footprint_collides(const PlanarPose& pose, const Arena& arena, const Footprint& fp) {
  if (ellipse_leaves_bounds(pose, fp, arena)) return true;
  for (const auto& p : arena.polygons) {
    if (ellipse_hits_polygon(pose, fp, p)) return true;
  }
  for (const auto& d : arena.discs) {
    if (ellipse_hits_disc(pose, fp, d)) return true;
  }
  if (arena.chair && ellipse_hits_polygon(pose, fp, obb_footprint_polygon(*arena.chair))) return true;
  return false;
}

bool segment_free(const PlanarPose& a, const PlanarPose& b, const Arena& arena,
                  const Footprint& fp, double res_xy, double res_heading) {
  const double dxy = (b.position() - a.position()).norm();
  const double dth = std::abs(heading_diff(a.heading, b.heading));
  const int n = std::max({1, static_cast<int>(std::ceil(dxy / res_xy)),
                          static_cast<int>(std::ceil(dth / res_heading))});
  for (int i = 0; i <= n; ++i) {
    if (footprint_collides(interpolate(a, b, static_cast<double>(i) / n), arena, fp)) return false;
  }
  return true;
}

GoalResult compute_goal(const SittingPose& g, const Arena& arena, const Footprint& fp,
                        const Se2Params& params) {
  const Footprint safe = fp.inflated(params.margin);
  const Vec2 p = g.p.head<2>();
  const Vec2 dir = g.direction();
  const double heading = wrap_angle(g.gamma + kPi);
  for (double d = params.l_init;; d += params.goal_step) {
    const Vec2 c = p + d * dir;
    const PlanarPose pose{c.x(), c.y(), heading};
    if (ellipse_leaves_bounds(pose, safe, arena)) {
      throw GoalOutsideArena("compute_goal: goal ray leaves the arena");
    }
    if (footprint_collides(pose, arena, safe)) continue;
    GoalResult r;
    r.s_goal = pose;
    r.distance = d;
    r.adjusted_p = g.p;
    if (d > params.d_max_reach) r.adjusted_p.head<2>() += (d - params.d_max_reach) * dir;
    return r;
  }
}

Se2Trajectory plan_se2(const PlanarPose& start, const PlanarPose& goal, const Arena& arena,
                       const Footprint& fp, const Se2Params& params, std::uint64_t seed) {
  params.validate();
  const Footprint safe = fp.inflated(params.margin);
  const double rxy = params.resolution_xy, rth = params.resolution_heading;
  const double w = params.heading_weight;
  if (footprint_collides(start, arena, safe)) throw NoPlan("plan_se2: start in collision");
  if (footprint_collides(goal, arena, safe)) throw NoPlan("plan_se2: goal in collision");

  std::vector<PlanarPose> path;
  if (segment_free(start, goal, arena, safe, rxy, rth)) {
    path = {start, goal};
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(arena.lo.x(), arena.hi.x());
    std::uniform_real_distribution<double> uy(arena.lo.y(), arena.hi.y());
    std::uniform_real_distribution<double> uh(-kPi, kPi);
    Tree ta, tb;
    ta.add(start, -1);
    tb.add(goal, -1);
    Tree* a = &ta;
    Tree* b = &tb;

    auto extend = [&](Tree& t, const PlanarPose& q, int& idx) {
      const int near = t.nearest(q, w);
      const PlanarPose& from = t.nodes[static_cast<std::size_t>(near)];
      const double d = metric(from, q, w);
      const bool reach = d <= params.extend_step;
      const PlanarPose to = reach ? q : interpolate(from, q, params.extend_step / d);
      if (!segment_free(from, to, arena, safe, rxy, rth)) return Ext::Trapped;
      idx = t.add(to, near);
      return reach ? Ext::Reached : Ext::Advanced;
    };

    bool found = false;
    for (int it = 0; it < params.max_samples && !found; ++it) {
      const PlanarPose q{ux(rng), uy(rng), uh(rng)};
      int ia = -1;
      if (extend(*a, q, ia) == Ext::Trapped) {
        std::swap(a, b);
        continue;
      }
      const PlanarPose target = a->nodes[static_cast<std::size_t>(ia)];
      int ib = -1;
      Ext e = Ext::Advanced;
      while (e == Ext::Advanced) e = extend(*b, target, ib);
      if (e == Ext::Reached) {
        auto pa = ta.branch(a == &ta ? ia : ib);
        auto pb = tb.branch(a == &ta ? ib : ia);
        path.assign(pa.rbegin(), pa.rend());
        path.insert(path.end(), pb.begin() + 1, pb.end());
        found = true;
      }
      std::swap(a, b);
    }
    if (!found) throw NoPlan("plan_se2: no connection within the sample budget");

    std::uniform_int_distribution<std::size_t> pick(0, 1 << 30);
    for (int s = 0; s < params.shortcut_attempts && path.size() > 2; ++s) {
      std::size_t i = pick(rng) % path.size(), j = pick(rng) % path.size();
      if (i > j) std::swap(i, j);
      if (j - i < 2) continue;
      if (segment_free(path[i], path[j], arena, safe, rxy, rth)) {
        path.erase(path.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                   path.begin() + static_cast<std::ptrdiff_t>(j));
      }
    }
  }

  Se2Trajectory out;
  out.resolution_xy = rxy;
  out.resolution_heading = rth;
  out.waypoints.push_back(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double dxy = (path[i].position() - path[i - 1].position()).norm();
    const double dth = std::abs(heading_diff(path[i - 1].heading, path[i].heading));
    const int n = std::max({1, static_cast<int>(std::ceil(dxy / params.waypoint_spacing)),
                            static_cast<int>(std::ceil(dth / params.waypoint_heading))});
    for (int k = 1; k <= n; ++k) {
      out.waypoints.push_back(k == n ? path[i] : interpolate(path[i - 1], path[i], static_cast<double>(k) / n));
    }
  }
  return out;
}

std::vector<PlanarPose> follow_waypoints(const Se2Trajectory& traj, const FollowNoise& noise,
                                         std::uint64_t seed) {
  std::vector<PlanarPose> out;
  if (traj.waypoints.empty()) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  out.push_back(traj.waypoints.front());
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i) {
    PlanarPose p = traj.waypoints[i];
    if (noise.xy > 0 || noise.heading > 0) {
      const double r = noise.xy * std::sqrt(u01(rng)), a = kPi * u(rng);
      p.x += r * std::cos(a);
      p.y += r * std::sin(a);
      p.heading = wrap_angle(p.heading + noise.heading * u(rng));
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace seatbear
