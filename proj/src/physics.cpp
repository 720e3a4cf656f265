#include "seatbear/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seatbear/error.hpp"

namespace seatbear::physics {

namespace {

Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_aabb_dist2(const Vec3& p, const Aabb& box) {
  const Vec3 d = (box.lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - box.hi);
  return d.squaredNorm();
}

Quat add_rotation(const Quat& q, const Vec3& dtheta, double scale) {
  const Quat w(0.0, dtheta.x(), dtheta.y(), dtheta.z());
  Quat out = q;
  out.coeffs() += (0.5 * scale) * (w * q).coeffs();
  out.normalize();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TriangleMeshShape

TriangleMeshShape::TriangleMeshShape(Mesh mesh) : mesh_(std::move(mesh)) {
  const int n = static_cast<int>(mesh_.faces.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  tri_boxes_.resize(n);
  tri_normals_.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& f = mesh_.faces[i];
    for (int k = 0; k < 3; ++k) tri_boxes_[i].extend(mesh_.vertices[f[k]]);
    Vec3 nrm = (mesh_.vertices[f[1]] - mesh_.vertices[f[0]])
                   .cross(mesh_.vertices[f[2]] - mesh_.vertices[f[0]]);
    const double len = nrm.norm();
    tri_normals_[i] = len > 0 ? Vec3(nrm / len) : Vec3(Vec3::UnitZ());
  }
  if (n > 0) {
    nodes_.reserve(2 * n);
    build(0, n);
  }
}

int TriangleMeshShape::build(int first, int count) {
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Aabb box;
  for (int i = first; i < first + count; ++i) box.extend(tri_boxes_[order_[i]]);
  nodes_[idx].box = box;
  if (count <= 4) {
    nodes_[idx].first = first;
    nodes_[idx].count = count;
    return idx;
  }
  int axis = 0;
  (box.hi - box.lo).maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) {
                     const double ca = tri_boxes_[a].lo[axis] + tri_boxes_[a].hi[axis];
                     const double cb = tri_boxes_[b].lo[axis] + tri_boxes_[b].hi[axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(first, mid - first);
  const int right = build(mid, first + count - mid);
  nodes_[idx].left = left;
  nodes_[idx].right = right;
  return idx;
}

std::optional<TriangleMeshShape::Hit> TriangleMeshShape::closest_within(const Vec3& p,
                                                                        double radius) const {
  if (nodes_.empty()) return std::nullopt;
  const double r2 = radius * radius;
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_side = -std::numeric_limits<double>::infinity();
  int best_tri = -1;
  Vec3 best_point = Vec3::Zero();

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (point_aabb_dist2(p, node.box) > std::min(r2, best_d2 + 1e-18)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = order_[i];
        const auto& f = mesh_.faces[t];
        const Vec3 q = closest_on_triangle(p, mesh_.vertices[f[0]], mesh_.vertices[f[1]],
                                           mesh_.vertices[f[2]]);
        const double d2 = (p - q).squaredNorm();
        if (d2 > r2) continue;
        const double side = (p - q).dot(tri_normals_[t]);
        // Ties (shared edges/vertices) prefer the face the point lies outside of.
        if (d2 < best_d2 - 1e-16 || (std::abs(d2 - best_d2) <= 1e-16 && side > best_side)) {
          best_d2 = d2;
          best_side = side;
          best_tri = t;
          best_point = q;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  if (best_tri < 0) return std::nullopt;
  const double dist = std::sqrt(best_d2);
  Hit hit;
  hit.point = best_point;
  if (best_side < 0) {
    // Query point is behind the surface: push out along the face normal.
    hit.normal = tri_normals_[best_tri];
    hit.distance = -dist;
  } else if (dist > 1e-12) {
    hit.normal = (p - best_point) / dist;
    hit.distance = dist;
  } else {
    hit.normal = tri_normals_[best_tri];
    hit.distance = 0.0;
  }
  return hit;
}

// ---------------------------------------------------------------------------
// World

World::World(WorldParams params) : params_(params) {}

int World::add_body(BodyDef def) {
  Body b;
  b.state.x = def.position;
  b.state.q = def.orientation.normalized();
  b.state.v = def.linear_velocity;
  b.state.w = def.angular_velocity;
  b.x_prev = b.state.x;
  b.q_prev = b.state.q;
  if (!def.fixed) {
    if (!(def.mass > 0)) throw Error("physics: dynamic body '" + def.name + "' needs mass > 0");
    b.inv_mass = 1.0 / def.mass;
    b.inv_inertia_local = def.inertia.inverse();
  }
  b.def = std::move(def);
  bodies_.push_back(std::move(b));
  return static_cast<int>(bodies_.size()) - 1;
}

int World::add_hinge(HingeDef def) {
  def.axis_parent.normalize();
  def.axis_child.normalize();
  def.ref_parent.normalize();
  def.ref_child.normalize();
  hinges_.push_back(def);
  hinge_stick_angle_.push_back(std::numeric_limits<double>::quiet_NaN());
  return static_cast<int>(hinges_.size()) - 1;
}

void World::set_hinge_drive(int j, std::optional<double> target, double damping, double friction_torque) {
  HingeDef& h = hinges_.at(static_cast<std::size_t>(j));
  h.drive_target = target;
  h.drive_compliance = 0.0;
  h.damping = damping;
  h.friction_torque = friction_torque;
  hinge_stick_angle_[static_cast<std::size_t>(j)] = std::numeric_limits<double>::quiet_NaN();
}

int World::attach(int body, const RigidTransform& target) {
  attachments_.push_back({body, target, true});
  return static_cast<int>(attachments_.size()) - 1;
}

void World::set_attachment_target(int a, const RigidTransform& target) {
  attachments_[a].target = target;
}

void World::detach(int a) { attachments_[a].active = false; }

RigidTransform World::transform(int i) const {
  const auto& s = bodies_[i].state;
  return {s.q.toRotationMatrix(), s.x};
}

void World::set_state(int i, const BodyState& s) {
  bodies_[i].state = s;
  bodies_[i].state.q.normalize();
  bodies_[i].x_prev = s.x;
  bodies_[i].q_prev = bodies_[i].state.q;
}

Mat3 World::inv_inertia_world(const Body& b) const {
  const Mat3 r = b.state.q.toRotationMatrix();
  return r * b.inv_inertia_local * r.transpose();
}

double World::generalized_inv_mass(const Body* b, const Vec3& r, const Vec3& n) const {
  if (b == nullptr || b->inv_mass == 0.0) return 0.0;
  const Vec3 rn = r.cross(n);
  return b->inv_mass + rn.dot(inv_inertia_world(*b) * rn);
}

double World::generalized_inv_mass_angular(const Body* b, const Vec3& n) const {
  if (b == nullptr || b->inv_mass == 0.0) return 0.0;
  return n.dot(inv_inertia_world(*b) * n);
}

double World::apply_positional(Body* b1, Body* b2, const Vec3& r1, const Vec3& r2,
                               const Vec3& corr, double compliance, double h) {
  const double c = corr.norm();
  if (c < 1e-15) return 0.0;
  const Vec3 n = corr / c;
  const double w = generalized_inv_mass(b1, r1, n) + generalized_inv_mass(b2, r2, n);
  const double alpha = compliance / (h * h);
  if (w + alpha <= 0.0) return 0.0;
  const double dlambda = c / (w + alpha);
  const Vec3 p = dlambda * n;
  if (b1 != nullptr && b1->inv_mass > 0) {
    b1->state.x += p * b1->inv_mass;
    b1->state.q = add_rotation(b1->state.q, inv_inertia_world(*b1) * r1.cross(p), 1.0);
  }
  if (b2 != nullptr && b2->inv_mass > 0) {
    b2->state.x -= p * b2->inv_mass;
    b2->state.q = add_rotation(b2->state.q, inv_inertia_world(*b2) * r2.cross(p), -1.0);
  }
  return dlambda;
}

void World::apply_angular(Body* b1, Body* b2, const Vec3& rotvec, double compliance, double h) {
  const double theta = rotvec.norm();
  if (theta < 1e-15) return;
  const Vec3 n = rotvec / theta;
  const double w = generalized_inv_mass_angular(b1, n) + generalized_inv_mass_angular(b2, n);
  const double alpha = compliance / (h * h);
  if (w + alpha <= 0.0) return;
  const Vec3 p = (theta / (w + alpha)) * n;
  if (b1 != nullptr && b1->inv_mass > 0) {
    b1->state.q = add_rotation(b1->state.q, inv_inertia_world(*b1) * p, 1.0);
  }
  if (b2 != nullptr && b2->inv_mass > 0) {
    b2->state.q = add_rotation(b2->state.q, inv_inertia_world(*b2) * p, -1.0);
  }
}

void World::apply_impulse(Body* b, const Vec3& p, const Vec3& r, double sign) {
  if (b == nullptr || b->inv_mass == 0.0) return;
  b->state.v += sign * p * b->inv_mass;
  b->state.w += sign * (inv_inertia_world(*b) * r.cross(p));
}

double World::hinge_angle(int j) const {
  const HingeDef& h = hinges_[j];
  const Mat3 rp = bodies_[h.parent].state.q.toRotationMatrix();
  const Mat3 rc = bodies_[h.child].state.q.toRotationMatrix();
  const Vec3 a = rp * h.axis_parent;
  const Vec3 bp = rp * h.ref_parent;
  const Vec3 bc = rc * h.ref_child;
  return std::atan2(bp.cross(bc).dot(a), bp.dot(bc));
}

void World::solve_hinge(int index, double h) {
  const HingeDef& j = hinges_[index];
  Body* p = &bodies_[j.parent];
  Body* c = &bodies_[j.child];
  // Axis alignment.
  {
    const Vec3 ap = p->state.q * j.axis_parent;
    const Vec3 ac = c->state.q * j.axis_child;
    apply_angular(p, c, ap.cross(ac), 0.0, h);
  }
  // Drive or limits about the shared axis.
  {
    const Vec3 a = p->state.q * j.axis_parent;
    const Vec3 bp = p->state.q * j.ref_parent;
    const Vec3 bc = c->state.q * j.ref_child;
    const double angle = std::atan2(bp.cross(bc).dot(a), bp.dot(bc));
    if (j.drive_target) {
      apply_angular(p, c, (angle - *j.drive_target) * a, j.drive_compliance, h);
    } else if (angle < j.lower) {
      apply_angular(p, c, (angle - j.lower) * a, 0.0, h);
    } else if (angle > j.upper) {
      apply_angular(p, c, (angle - j.upper) * a, 0.0, h);
    } else if (j.friction_torque > 0) {
      // Positional dry friction: hold the stick angle while the needed torque
      // stays below the bound; past it, slip and re-anchor.
      double& stick = hinge_stick_angle_[index];
      if (std::isnan(stick)) stick = angle;
      const double moved = wrap_angle(angle - stick);
      const double w = generalized_inv_mass_angular(p, a) + generalized_inv_mass_angular(c, a);
      if (w > 0) {
        const double cap = j.friction_torque * h * h * w;
        const double corr = std::clamp(moved, -cap, cap);
        apply_angular(p, c, corr * a, 0.0, h);
        if (std::abs(moved) > cap) stick = angle - corr;
      }
    }
    if (angle < j.lower || angle > j.upper) {
      hinge_stick_angle_[index] = std::clamp(angle, j.lower, j.upper);
    }
  }
  // Anchor coincidence.
  {
    const Vec3 r1 = p->state.q * j.anchor_parent;
    const Vec3 r2 = c->state.q * j.anchor_child;
    const Vec3 corr = (c->state.x + r2) - (p->state.x + r1);
    apply_positional(p, c, r1, r2, corr, 0.0, h);
  }
}

void World::collect_contacts(std::vector<Contact>& out, double margin) const {
  out.clear();
  const int nb = static_cast<int>(bodies_.size());
  for (int a = 0; a < nb; ++a) {
    const Body& A = bodies_[a];
    if (A.def.fixed) continue;
    const Mat3 ra = A.state.q.toRotationMatrix();
    auto key = [a](std::size_t feature, int b) {
      return (static_cast<std::uint64_t>(a) << 40) | (static_cast<std::uint64_t>(feature) << 16) |
             static_cast<std::uint64_t>(b + 1);
    };
    for (std::size_t si = 0; si < A.def.spheres.size(); ++si) {
      const auto& s = A.def.spheres[si];
      const Vec3 c = A.state.x + ra * s.center;
      if (params_.ground && c.z() - s.radius < margin) {
        const Vec3 pa = c - s.radius * Vec3::UnitZ();
        out.push_back({a, -1, ra.transpose() * (pa - A.state.x), Vec3(c.x(), c.y(), 0.0),
                       Vec3::UnitZ(), s.radius - c.z(), A.def.friction, key(si, -1)});
      }
      for (int b = 0; b < nb; ++b) {
        if (b == a || !bodies_[b].def.mesh) continue;
        const Body& B = bodies_[b];
        const Mat3 rb = B.state.q.toRotationMatrix();
        const Vec3 local = rb.transpose() * (c - B.state.x);
        const auto hit = B.def.mesh->closest_within(local, s.radius + margin);
        if (!hit) continue;
        const Vec3 n = rb * hit->normal;
        const Vec3 pa = c - s.radius * n;
        out.push_back({a, b, ra.transpose() * (pa - A.state.x), hit->point, n,
                       s.radius - hit->distance, std::sqrt(A.def.friction * B.def.friction), key(si, b)});
      }
    }
    if (params_.ground) {
      for (std::size_t pi = 0; pi < A.def.support_points.size(); ++pi) {
        const Vec3& sp = A.def.support_points[pi];
        const Vec3 w = A.state.x + ra * sp;
        if (w.z() < margin) {
          out.push_back({a, -1, sp, Vec3(w.x(), w.y(), 0.0), Vec3::UnitZ(), -w.z(), A.def.friction,
                         key(A.def.spheres.size() + pi, -1)});
        }
      }
    }
  }
}

void World::solve_contacts(double h, bool collect) {
  if (collect) {
    collect_contacts(contacts_, 0.0);
    for (auto& ct : contacts_) ct.lambda_n = 0.0;
    // Drop anchors of contacts that separated.
    std::unordered_map<std::uint64_t, Vec3> kept;
    for (const auto& ct : contacts_) {
      if (auto it = stick_.find(ct.key); it != stick_.end()) kept.emplace(ct.key, it->second);
    }
    stick_.swap(kept);
  }
  for (auto& ct : contacts_) {
    Body* A = &bodies_[ct.a];
    Body* B = ct.b >= 0 ? &bodies_[ct.b] : nullptr;
    const Vec3 ra = A->state.q * ct.ra;
    const Vec3 rb = B ? Vec3(B->state.q * ct.rb) : Vec3::Zero();
    const Vec3 pa = A->state.x + ra;
    const Vec3 pb = B ? Vec3(B->state.x + rb) : ct.rb;
    const double depth = (pb - pa).dot(ct.n);
    if (depth <= 0) continue;
    ct.lambda_n += apply_positional(A, B, ra, rb, depth * ct.n, 0.0, h);

    // Static friction: pull the contact point back to its anchor on b. The
    // anchor is set where the contact first formed and moves only on slip,
    // so sub-step residue cannot accumulate into creep.
    const Vec3 ra_now = A->state.q * ct.ra;
    const Vec3 pa_now = A->state.x + ra_now;
    auto [it, fresh] = stick_.try_emplace(ct.key, Vec3::Zero());
    if (fresh) {
      const Vec3 pa_prev = A->x_prev + A->q_prev * ct.ra;
      it->second = B ? Vec3(B->state.q.conjugate() * (pa_prev - B->state.x)) : pa_prev;
    }
    const Vec3 anchor = B ? Vec3(B->state.x + B->state.q * it->second) : it->second;
    const Vec3 dp = pa_now - anchor;
    const Vec3 dpt = dp - dp.dot(ct.n) * ct.n;
    const double slip = dpt.norm();
    if (slip < 1e-15) continue;
    const Vec3 t = dpt / slip;
    // Lever arm on b: the anchor point.
    const Vec3 rb_now = B ? Vec3(anchor - B->state.x) : Vec3::Zero();
    const double w = generalized_inv_mass(A, ra_now, t) + generalized_inv_mass(B, rb_now, t);
    if (w <= 0) continue;
    const double lambda_t = slip / w;
    const double bound = ct.friction * params_.static_friction_scale * ct.lambda_n;
    const double frac = std::min(1.0, bound / lambda_t);
    apply_positional(A, B, ra_now, rb_now, -dpt * frac, 0.0, h);
    if (frac < 1.0) {
      // Slipping: re-anchor at the corrected contact point.
      const Vec3 p_new = A->state.x + A->state.q * ct.ra;
      it->second = B ? Vec3(B->state.q.conjugate() * (p_new - B->state.x)) : p_new;
    }
  }
}

void World::solve_velocities(double h) {
  for (const auto& ct : contacts_) {
    if (ct.lambda_n <= 0) continue;
    Body* A = &bodies_[ct.a];
    Body* B = ct.b >= 0 ? &bodies_[ct.b] : nullptr;
    const Vec3 ra = A->state.q * ct.ra;
    const Vec3 rb = B ? Vec3(B->state.q * ct.rb) : Vec3::Zero();
    Vec3 v = A->state.v + A->state.w.cross(ra);
    if (B) v -= B->state.v + B->state.w.cross(rb);
    const double vn = ct.n.dot(v);
    const Vec3 vt = v - vn * ct.n;
    Vec3 dv = Vec3::Zero();
    const double vt_len = vt.norm();
    if (vt_len > 1e-12) {
      const double fn = ct.lambda_n / h;
      dv -= vt / vt_len * std::min(ct.friction * params_.dynamic_friction_scale * fn, vt_len);
    }
    // Perfectly inelastic: remove the normal relative velocity.
    dv -= vn * ct.n;
    const double dv_len = dv.norm();
    if (dv_len < 1e-15) continue;
    const Vec3 dir = dv / dv_len;
    const double w = generalized_inv_mass(A, ra, dir) + generalized_inv_mass(B, rb, dir);
    if (w <= 0) continue;
    const Vec3 p = dv / w;
    apply_impulse(A, p, ra, 1.0);
    apply_impulse(B, p, rb, -1.0);
  }

  for (const auto& j : hinges_) {
    Body* p = &bodies_[j.parent];
    Body* c = &bodies_[j.child];
    const Vec3 a = p->state.q * j.axis_parent;
    // A hinge admits no relative spin off its axis; left-over off-axis spin is
    // solver residue and is removed (one pass per perpendicular direction).
    for (int k = 0; k < 2; ++k) {
      const Vec3 off = (c->state.w - p->state.w) - (c->state.w - p->state.w).dot(a) * a;
      const double len = off.norm();
      if (len < 1e-12) break;
      const Vec3 n = off / len;
      const double wn = generalized_inv_mass_angular(p, n) + generalized_inv_mass_angular(c, n);
      if (wn <= 0) break;
      const Vec3 imp = (len / wn) * n;
      if (p->inv_mass > 0) p->state.w += inv_inertia_world(*p) * imp;
      if (c->inv_mass > 0) c->state.w -= inv_inertia_world(*c) * imp;
    }
    if (j.damping <= 0) continue;
    const double rel = (c->state.w - p->state.w).dot(a);
    const double dw = rel * std::min(j.damping * h, 1.0);
    const double w = generalized_inv_mass_angular(p, a) + generalized_inv_mass_angular(c, a);
    if (w <= 0) continue;
    const Vec3 imp = (dw / w) * a;
    if (p->inv_mass > 0) p->state.w += inv_inertia_world(*p) * imp;
    if (c->inv_mass > 0) c->state.w -= inv_inertia_world(*c) * imp;
  }
}

void World::step(double dt) {
  const int n = std::max(1, params_.substeps);
  const double h = dt / n;
  std::vector<std::pair<Vec3, Quat>> start;
  start.reserve(bodies_.size());
  for (const auto& b : bodies_) start.emplace_back(b.state.x, b.state.q);
  for (int sub = 0; sub < n; ++sub) {
    for (auto& b : bodies_) {
      b.x_prev = b.state.x;
      b.q_prev = b.state.q;
      if (b.inv_mass == 0.0) continue;
      b.state.v += h * params_.gravity;
      b.state.x += h * b.state.v;
      const Mat3 r = b.state.q.toRotationMatrix();
      const Mat3 inertia_w = r * b.def.inertia * r.transpose();
      const Mat3 inv_w = r * b.inv_inertia_local * r.transpose();
      b.state.w += h * (inv_w * (-b.state.w.cross(inertia_w * b.state.w)));
      b.state.q = add_rotation(b.state.q, b.state.w, h);
    }

    for (int it = 0; it < std::max(1, params_.iterations); ++it) {
      for (std::size_t j = 0; j < hinges_.size(); ++j) solve_hinge(static_cast<int>(j), h);
      for (const auto& at : attachments_) {
        if (!at.active) continue;
        Body* b = &bodies_[at.body];
        const Quat target(at.target.rotation);
        Quat dq = target * b->state.q.conjugate();
        if (dq.w() < 0) dq.coeffs() *= -1.0;
        apply_angular(b, nullptr, 2.0 * dq.vec(), 0.0, h);
        apply_positional(b, nullptr, Vec3::Zero(), Vec3::Zero(),
                         at.target.translation - b->state.x, 0.0, h);
      }
      solve_contacts(h, it == 0);
    }

    for (auto& b : bodies_) {
      if (b.inv_mass == 0.0) continue;
      b.state.v = (b.state.x - b.x_prev) / h;
      Quat dq = b.state.q * b.q_prev.conjugate();
      b.state.w = (2.0 / h) * dq.vec();
      if (dq.w() < 0) b.state.w = -b.state.w;
    }
    solve_velocities(h);
    for (auto& b : bodies_) {
      if (b.inv_mass == 0.0) continue;
      b.state.v *= std::max(0.0, 1.0 - params_.linear_damping * h);
      b.state.w *= std::max(0.0, 1.0 - params_.angular_damping * h);
    }
    time_ += h;
  }
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    Body& b = bodies_[i];
    b.v_frame = (b.state.x - start[i].first) / dt;
    Quat dq = b.state.q * start[i].second.conjugate();
    if (dq.w() < 0) dq.coeffs() *= -1.0;
    b.w_frame = (2.0 / dt) * dq.vec();
  }
}

double World::frame_kinetic_energy() const {
  double e = 0.0;
  for (const auto& b : bodies_) {
    if (b.inv_mass == 0.0) continue;
    const Mat3 r = b.state.q.toRotationMatrix();
    e += 0.5 * b.def.mass * b.v_frame.squaredNorm() +
         0.5 * b.w_frame.dot(r * b.def.inertia * r.transpose() * b.w_frame);
  }
  return e;
}

double World::kinetic_energy() const {
  double e = 0.0;
  for (const auto& b : bodies_) {
    if (b.inv_mass == 0.0) continue;
    const Mat3 r = b.state.q.toRotationMatrix();
    e += 0.5 * b.def.mass * b.state.v.squaredNorm() +
         0.5 * b.state.w.dot(r * b.def.inertia * r.transpose() * b.state.w);
  }
  return e;
}

double World::potential_energy() const {
  double e = 0.0;
  for (const auto& b : bodies_) {
    if (b.inv_mass == 0.0) continue;
    e -= b.def.mass * params_.gravity.dot(b.state.x);
  }
  return e;
}

std::vector<int> World::contact_counts(double margin) const {
  std::vector<Contact> cs;
  collect_contacts(cs, margin);
  std::vector<int> counts(bodies_.size(), 0);
  for (const auto& c : cs) {
    ++counts[c.a];
    if (c.b >= 0) ++counts[c.b];
  }
  return counts;
}

}  // namespace seatbear::physics
