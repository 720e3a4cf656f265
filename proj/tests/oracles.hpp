#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "seatbear/chair_gen.hpp"
#include "seatbear/geometry.hpp"
#include "seatbear/se2_nav.hpp"

namespace oracle {

using seatbear::Vec2;
using seatbear::Vec3;

/// Axis-aligned footprint area of the points turned by -yaw.
inline double footprint_area_at(const std::vector<Vec2>& pts, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    const double x = c * p.x() + s * p.y();
    const double y = -s * p.x() + c * p.y();
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  return (x1 - x0) * (y1 - y0);
}

/// Yaw sweep over [0, 90) deg at `step_deg`, then repeated zooming around the
/// best sample (the sweep alone is only accurate to first order in the step).
inline double brute_force_min_area(const std::vector<Vec3>& vertices, double step_deg = 0.1) {
  std::vector<Vec2> pts;
  for (const auto& v : vertices) pts.emplace_back(v.x(), v.y());
  const double step = seatbear::deg2rad(step_deg);
  const int n = static_cast<int>(std::lround(90.0 / step_deg));
  double best = 1e300, best_yaw = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = footprint_area_at(pts, i * step);
    if (a < best) {
      best = a;
      best_yaw = i * step;
    }
  }
  double half = step;
  for (int round = 0; round < 12; ++round) {
    const double lo = best_yaw - half;
    for (int i = 0; i <= 200; ++i) {
      const double y = lo + 2.0 * half * i / 200.0;
      const double a = footprint_area_at(pts, y);
      if (a < best) {
        best = a;
        best_yaw = y;
      }
    }
    half /= 20.0;
  }
  return best;
}

/// Union of a few random boxes, turned and shifted. Not closed as a solid
/// (the boxes overlap), which is fine for hull and OBB checks.
inline seatbear::Mesh random_box_cluster(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  seatbear::Mesh m;
  const int boxes = 1 + static_cast<int>(u(rng) * 4);
  for (int b = 0; b < boxes; ++b) {
    const Vec3 c(u(rng) - 0.5, u(rng) - 0.5, u(rng));
    const Vec3 h(0.05 + 0.4 * u(rng), 0.05 + 0.4 * u(rng), 0.05 + 0.3 * u(rng));
    seatbear::Mesh box = seatbear::make_box(c - h, c + h);
    m.append(box.transformed(seatbear::RigidTransform::from_yaw(2.0 * seatbear::kPi * u(rng))));
  }
  return m.transformed(seatbear::RigidTransform::from_yaw(2.0 * seatbear::kPi * u(rng), Vec3(u(rng), u(rng), 0.0)));
}

/// Central differences of a scalar function.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-3});
  return (a - b).norm() / scale;
}

// ---- SE(2) reachability on a grid ----

/// Lattice over x, y and heading. A node is usable when the footprint is free
/// there; edges join 8-neighbours in xy (same heading) and adjacent headings
/// (same xy), each checked with segment_free. Start and goal hook onto every
/// node within one cell they can reach in a straight line.
struct GridSe2 {
  double cell = 0.05;
  int headings = 16;
  double res_xy = 0.005;
  double res_heading = seatbear::deg2rad(1.0);

  bool solvable(const seatbear::PlanarPose& start, const seatbear::PlanarPose& goal, const seatbear::Arena& arena,
                const seatbear::Footprint& fp) const {
    using seatbear::PlanarPose;
    const int nx = static_cast<int>(std::floor((arena.hi.x() - arena.lo.x()) / cell)) + 1;
    const int ny = static_cast<int>(std::floor((arena.hi.y() - arena.lo.y()) / cell)) + 1;
    const int nh = headings;
    auto pose = [&](int ix, int iy, int ih) {
      return PlanarPose{arena.lo.x() + ix * cell, arena.lo.y() + iy * cell,
                        seatbear::wrap_angle(2.0 * seatbear::kPi * ih / nh)};
    };
    auto id = [&](int ix, int iy, int ih) { return (ix * ny + iy) * nh + ih; };
    std::vector<signed char> free(static_cast<std::size_t>(nx * ny * nh), -1);
    auto is_free = [&](int ix, int iy, int ih) {
      auto& f = free[static_cast<std::size_t>(id(ix, iy, ih))];
      if (f < 0) f = seatbear::footprint_collides(pose(ix, iy, ih), arena, fp) ? 0 : 1;
      return f == 1;
    };
    auto seg = [&](const PlanarPose& a, const PlanarPose& b) {
      return seatbear::segment_free(a, b, arena, fp, res_xy, res_heading);
    };
    if (seatbear::footprint_collides(start, arena, fp) || seatbear::footprint_collides(goal, arena, fp)) return false;
    if (seg(start, goal)) return true;

    auto hooks = [&](const PlanarPose& p) {
      std::vector<int> out;
      const int cx = static_cast<int>(std::lround((p.x - arena.lo.x()) / cell));
      const int cy = static_cast<int>(std::lround((p.y - arena.lo.y()) / cell));
      for (int ix = cx - 1; ix <= cx + 1; ++ix)
        for (int iy = cy - 1; iy <= cy + 1; ++iy) {
          if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) continue;
          for (int ih = 0; ih < nh; ++ih)
            if (is_free(ix, iy, ih) && seg(p, pose(ix, iy, ih))) out.push_back(id(ix, iy, ih));
        }
      return out;
    };
    const std::vector<int> from = hooks(start);
    const std::vector<int> to = hooks(goal);
    if (from.empty() || to.empty()) return false;
    std::vector<char> target(free.size(), 0), seen(free.size(), 0);
    for (int t : to) target[static_cast<std::size_t>(t)] = 1;
    std::queue<int> q;
    for (int s : from) {
      seen[static_cast<std::size_t>(s)] = 1;
      q.push(s);
    }
    while (!q.empty()) {
      const int cur = q.front();
      q.pop();
      if (target[static_cast<std::size_t>(cur)]) return true;
      const int ih = cur % nh, iy = (cur / nh) % ny, ix = cur / (nh * ny);
      const PlanarPose here = pose(ix, iy, ih);
      auto visit = [&](int jx, int jy, int jh) {
        if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) return;
        jh = (jh + nh) % nh;
        const int n = id(jx, jy, jh);
        if (seen[static_cast<std::size_t>(n)] || !is_free(jx, jy, jh)) return;
        if (!seg(here, pose(jx, jy, jh))) return;
        seen[static_cast<std::size_t>(n)] = 1;
        q.push(n);
      };
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          if (dx || dy) visit(ix + dx, iy + dy, ih);
      visit(ix, iy, ih + 1);
      visit(ix, iy, ih - 1);
    }
    return false;
  }
};

/// 4-connected flood fill for a disc of radius r on a fine grid. A disc
/// fits inside the ellipse at any heading, so no disc path means no ellipse
/// path (up to the grid; callers keep gaps well clear of the threshold).
inline bool disc_path_exists(const Vec2& start, const Vec2& goal, const seatbear::Arena& arena, double r,
                             double cell = 0.01) {
  const seatbear::Footprint disc{r, r};
  const int nx = static_cast<int>(std::floor((arena.hi.x() - arena.lo.x()) / cell)) + 1;
  const int ny = static_cast<int>(std::floor((arena.hi.y() - arena.lo.y()) / cell)) + 1;
  auto at = [&](int ix, int iy) { return seatbear::PlanarPose{arena.lo.x() + ix * cell, arena.lo.y() + iy * cell, 0.0}; };
  auto snap = [&](const Vec2& p) {
    return std::array<int, 2>{static_cast<int>(std::lround((p.x() - arena.lo.x()) / cell)),
                              static_cast<int>(std::lround((p.y() - arena.lo.y()) / cell))};
  };
  const auto s = snap(start), g = snap(goal);
  std::vector<char> seen(static_cast<std::size_t>(nx * ny), 0);
  std::queue<std::array<int, 2>> q;
  if (seatbear::footprint_collides(at(s[0], s[1]), arena, disc)) return false;
  seen[static_cast<std::size_t>(s[0] * ny + s[1])] = 1;
  q.push(s);
  const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!q.empty()) {
    const auto c = q.front();
    q.pop();
    if (c == g) return true;
    for (const auto& d : dirs) {
      const int x = c[0] + d[0], y = c[1] + d[1];
      if (x < 0 || y < 0 || x >= nx || y >= ny) continue;
      auto& f = seen[static_cast<std::size_t>(x * ny + y)];
      if (f) continue;
      f = 1;
      if (seatbear::footprint_collides(at(x, y), arena, disc)) continue;
      q.push({x, y});
    }
  }
  return false;
}

/// Square obstacle turned by `yaw`.
inline seatbear::ConvexPolygon square(const Vec2& c, double half, double yaw) {
  seatbear::ConvexPolygon p;
  const Eigen::Rotation2Dd r(yaw);
  for (const Vec2 v : {Vec2(-half, -half), Vec2(half, -half), Vec2(half, half), Vec2(-half, half)})
    p.vertices.push_back(c + r * v);
  return p;
}

}  // namespace oracle
