#include "seatbear/wholebody.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "seatbear/error.hpp"
#include "seatbear/json_util.hpp"

namespace seatbear::wholebody {

namespace ju = json_util;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kAbsSmooth = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double seg_seg_dist(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto pt = [](const Vec2& p, const Vec2& s0, const Vec2& s1) {
    const Vec2 e = s1 - s0;
    const double l2 = e.squaredNorm();
    const double t = l2 > 0 ? std::clamp((p - s0).dot(e) / l2, 0.0, 1.0) : 0.0;
    return (s0 + t * e - p).norm();
  };
  auto cr = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  const double d1 = cr(b - a, c - a), d2 = cr(b - a, d - a);
  const double d3 = cr(d - c, a - c), d4 = cr(d - c, b - c);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
  return std::min({pt(a, c, d), pt(b, c, d), pt(c, a, b), pt(d, a, b)});
}

// Central differences of a small vector function of q, J^T w accumulated.
template <typename F>
void numeric_jt(const F& fn, const VectorXd& q, const VectorXd& w, Eigen::Ref<VectorXd> grad) {
  const double h = 1e-7;
  VectorXd x = q;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    x[j] = q[j] + h;
    const VectorXd fp = fn(x);
    x[j] = q[j] - h;
    const VectorXd fm = fn(x);
    x[j] = q[j];
    grad[j] += w.dot(fp - fm) / (2 * h);
  }
}

VectorXd clearance_vec(const SeatingProblem& p, const VectorXd& q) {
  const auto c = link_clearances(p, q);
  return Eigen::Map<const VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}

double max_violation(const NlpProblem& prob, const VectorXd& x, double* eq_out, double* in_out) {
  double e = 0.0, g = 0.0;
  if (prob.n_eq > 0) e = prob.eq(x).cwiseAbs().maxCoeff();
  if (prob.n_in > 0) g = std::max(0.0, prob.ineq(x).maxCoeff());
  if (eq_out) *eq_out = e;
  if (in_out) *in_out = g;
  return std::max(e, g);
}

}  // namespace

void PlanarChain::validate() const {
  const auto k = lengths.size();
  if (k < 1 || masses.size() != k || radii.size() != k || lower.size() != k || upper.size() != k ||
      vel_limit.size() != k || static_cast<Eigen::Index>(joints.size()) != k) {
    throw ConfigError("chain: field lengths differ");
  }
  if ((lengths.array() <= 0).any() || (masses.array() < 0).any() || (radii.array() < 0).any() ||
      (vel_limit.array() <= 0).any()) {
    throw ConfigError("chain: lengths, velocity limits must be > 0; masses, radii >= 0");
  }
  if ((lower.array() >= upper.array()).any()) throw ConfigError("chain: empty joint limit interval");
  if (!(toe > heel)) throw ConfigError("chain: degenerate support interval");
  if (torso_link < 0 || torso_link >= k) throw ConfigError("chain: bad torso link");
  if (payload_mass < 0) throw ConfigError("chain: payload mass must be >= 0");
}

PlanarChain PlanarChain::default_chain() {
  PlanarChain c;
  c.joints = {"ankle", "knee", "hip", "shoulder", "elbow"};
  c.lengths = vec({0.165, 0.160, 0.340, 0.168, 0.182});
  c.masses = vec({0.60, 0.80, 2.60, 0.32, 0.40});
  c.radii = vec({0.035, 0.040, 0.060, 0.025, 0.025});
  c.lower = vec({-0.70, -2.20, -0.50, -0.50, -0.10});
  c.upper = vec({0.90, 0.00, 2.00, 3.10, 2.20});
  c.vel_limit = vec({1.0, 1.0, 1.0, 1.5, 1.5});
  return c;
}

nlohmann::json to_json(const PlanarChain& c) {
  return {{"joints", c.joints},
          {"lengths", ju::vec(c.lengths)},
          {"masses", ju::vec(c.masses)},
          {"radii", ju::vec(c.radii)},
          {"lower", ju::vec(c.lower)},
          {"upper", ju::vec(c.upper)},
          {"vel_limit", ju::vec(c.vel_limit)},
          {"ankle_height", c.ankle_height},
          {"heel", c.heel},
          {"toe", c.toe},
          {"torso_link", c.torso_link},
          {"payload_mass", c.payload_mass},
          {"grip_offset", ju::vec(c.grip_offset)}};
}

PlanarChain planar_chain_from_json(const nlohmann::json& j) {
  PlanarChain c = PlanarChain::default_chain();
  try {
    if (j.contains("joints")) c.joints = j.at("joints").get<std::vector<std::string>>();
    if (j.contains("lengths")) c.lengths = ju::vecx(j.at("lengths"));
    if (j.contains("masses")) c.masses = ju::vecx(j.at("masses"));
    if (j.contains("radii")) c.radii = ju::vecx(j.at("radii"));
    if (j.contains("lower")) c.lower = ju::vecx(j.at("lower"));
    if (j.contains("upper")) c.upper = ju::vecx(j.at("upper"));
    if (j.contains("vel_limit")) c.vel_limit = ju::vecx(j.at("vel_limit"));
    c.ankle_height = j.value("ankle_height", c.ankle_height);
    c.heel = j.value("heel", c.heel);
    c.toe = j.value("toe", c.toe);
    c.torso_link = j.value("torso_link", c.torso_link);
    c.payload_mass = j.value("payload_mass", c.payload_mass);
    if (j.contains("grip_offset")) c.grip_offset = ju::vec2(j.at("grip_offset"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("chain: ") + e.what());
  }
  c.validate();
  return c;
}

ChainFk fk_unchecked(const PlanarChain& c, const VectorXd& q) {
  if (q.size() != c.n()) throw LengthMismatch("fk: q has the wrong length");
  ChainFk fk;
  Vec2 p(0.0, c.ankle_height);
  fk.points.push_back(p);
  double phi = 0.0, mx = 0.0;
  for (int i = 0; i < c.n(); ++i) {
    phi += q[i];
    fk.phi.push_back(phi);
    const Vec2 next = p + c.lengths[i] * Vec2(std::sin(phi), std::cos(phi));
    mx += c.masses[i] * 0.5 * (p.x() + next.x());
    p = next;
    fk.points.push_back(p);
  }
  fk.hand = p;
  fk.hand_pitch = phi;
  mx += c.payload_mass * p.x();
  fk.com_x = mx / (c.masses.sum() + c.payload_mass);
  return fk;
}

ChainFk forward_kinematics(const PlanarChain& c, const VectorXd& q) {
  if (q.size() != c.n()) throw LengthMismatch("fk: q has the wrong length");
  for (int i = 0; i < c.n(); ++i) {
    if (q[i] < c.lower[i] - 1e-9 || q[i] > c.upper[i] + 1e-9) {
      throw JointLimit("fk: joint '" + c.joints[static_cast<std::size_t>(i)] + "' outside its limits");
    }
  }
  return fk_unchecked(c, q);
}

MatrixXd point_jacobian(const PlanarChain& c, const VectorXd& q, int j) {
  MatrixXd J = MatrixXd::Zero(2, c.n());
  double phi = 0.0;
  for (int i = 0; i < j; ++i) {
    phi += q[i];
    const Vec2 d = c.lengths[i] * Vec2(std::cos(phi), -std::sin(phi));
    for (int k = 0; k <= i; ++k) J.col(k) += d;
  }
  return J;
}

double com_x(const PlanarChain& c, const VectorXd& q, VectorXd* grad) {
  const ChainFk fk = fk_unchecked(c, q);
  if (grad) {
    const double m = c.masses.sum() + c.payload_mass;
    VectorXd g = VectorXd::Zero(c.n());
    for (int i = 0; i < c.n(); ++i) {
      g += c.masses[i] * 0.5 *
           (point_jacobian(c, q, i).row(0) + point_jacobian(c, q, i + 1).row(0)).transpose();
    }
    g += c.payload_mass * point_jacobian(c, q, c.n()).row(0).transpose();
    *grad = g / m;
  }
  return fk.com_x;
}

double segment_rect_distance(const Vec2& a, const Vec2& b, const Rect& r) {
  const std::array<Vec2, 4> k{Vec2(r.x0, r.z0), Vec2(r.x1, r.z0), Vec2(r.x1, r.z1), Vec2(r.x0, r.z1)};
  auto inside = [&](const Vec2& p) { return p.x() > r.x0 && p.x() < r.x1 && p.y() > r.z0 && p.y() < r.z1; };
  bool overlap = inside(a) || inside(b);
  double d = kInf;
  for (int i = 0; i < 4; ++i) {
    const double e = seg_seg_dist(a, b, k[static_cast<std::size_t>(i)], k[static_cast<std::size_t>((i + 1) % 4)]);
    if (e == 0.0) overlap = true;
    d = std::min(d, e);
  }
  if (!overlap) return d;
  // best separating axis among the box faces and the segment normal
  double sep = std::max({r.x0 - std::max(a.x(), b.x()), std::min(a.x(), b.x()) - r.x1,
                         r.z0 - std::max(a.y(), b.y()), std::min(a.y(), b.y()) - r.z1});
  const Vec2 e = b - a;
  if (e.norm() > 0) {
    const Vec2 n = Vec2(-e.y(), e.x()).normalized();
    for (double s : {1.0, -1.0}) {
      double lo = kInf;
      for (const auto& c : k) lo = std::min(lo, s * n.dot(c - a));
      sep = std::max(sep, lo);
    }
  }
  return std::min(sep, 0.0);
}

void SeatingProblem::validate() const {
  chain.validate();
  if (q_start.size() != chain.n()) throw LengthMismatch("seating: q_start length");
  if (Q.size() != chain.n() || (Q.array() <= 0).any()) throw ConfigError("seating: Q must be positive, length n");
  if (!(w1 >= 0) || !(w2 >= 0)) throw ConfigError("seating: weights must be >= 0");
  if (N < 2) throw ConfigError("seating: N must be >= 2");
  if (!(dt > 0) || !(clearance >= 0) || !(com_margin >= 0) || !(slack >= 0)) {
    throw ConfigError("seating: dt > 0, margins >= 0");
  }
}

nlohmann::json to_json(const SeatingProblem& p) {
  nlohmann::json j = {{"chain", to_json(p.chain)},
                      {"q_start", ju::vec(p.q_start)},
                      {"bear_target", ju::vec(p.bear_target)},
                      {"hand_pitch", p.hand_pitch ? nlohmann::json(*p.hand_pitch) : nlohmann::json(nullptr)},
                      {"w1", p.w1},
                      {"w2", p.w2},
                      {"Q", ju::vec(p.Q)},
                      {"N", p.N},
                      {"dt", p.dt},
                      {"clearance", p.clearance},
                      {"com_margin", p.com_margin}};
  j["obstacle"] = p.obstacle ? nlohmann::json{p.obstacle->x0, p.obstacle->x1, p.obstacle->z0, p.obstacle->z1}
                             : nlohmann::json(nullptr);
  return j;
}

double smooth_abs(double x, double* d) {
  const double r = std::sqrt(x * x + kAbsSmooth * kAbsSmooth);
  if (d) *d = x / r;
  return r - kAbsSmooth;
}

double goal_objective(const SeatingProblem& p, const VectorXd& q, VectorXd* grad) {
  VectorXd gc;
  const double cx = com_x(p.chain, q, grad ? &gc : nullptr);
  const double torso = q.head(p.chain.torso_link + 1).sum();
  double d1 = 0.0, d2 = 0.0;
  const double f = p.w1 * smooth_abs(cx - p.chain.support_center(), &d1) + p.w2 * smooth_abs(torso, &d2);
  if (grad) {
    *grad = p.w1 * d1 * gc;
    grad->head(p.chain.torso_link + 1).array() += p.w2 * d2;
  }
  return f;
}

VectorXd pose_residual(const SeatingProblem& p, const VectorXd& q, MatrixXd* jac) {
  const ChainFk fk = fk_unchecked(p.chain, q);
  const Vec2 t = p.hand_target();
  const int rows = p.hand_pitch ? 3 : 2;
  if (jac) {
    *jac = MatrixXd::Zero(rows, p.chain.n());
    jac->topRows(2) = point_jacobian(p.chain, q, p.chain.n());
    if (p.hand_pitch) jac->row(2).setOnes();
  }
  VectorXd r(rows);
  r[0] = fk.hand.x() - t.x();
  r[1] = fk.hand.y() - t.y();
  if (p.hand_pitch) r[2] = fk.hand_pitch - *p.hand_pitch;
  return r;
}

int collision_links(const PlanarChain& c) { return c.n() - 1; }

std::vector<double> link_clearances(const SeatingProblem& p, const VectorXd& q) {
  const int m = collision_links(p.chain);
  std::vector<double> out(static_cast<std::size_t>(m), kInf);
  if (!p.obstacle) return out;
  const ChainFk fk = fk_unchecked(p.chain, q);
  for (int i = 0; i < m; ++i) {
    out[static_cast<std::size_t>(i)] =
        segment_rect_distance(fk.points[static_cast<std::size_t>(i)], fk.points[static_cast<std::size_t>(i + 1)],
                              *p.obstacle) - p.chain.radii[i];
  }
  return out;
}

double trajectory_objective(const SeatingProblem& p, const MatrixXd& traj, const VectorXd& q_goal,
                            MatrixXd* grad) {
  double f = 0.0;
  if (grad) *grad = MatrixXd::Zero(traj.rows(), traj.cols());
  for (Eigen::Index k = 0; k < traj.rows(); ++k) {
    const VectorXd d = traj.row(k).transpose() - q_goal;
    f += 0.5 * d.dot(p.Q.cwiseProduct(d));
    if (grad) grad->row(k) = p.Q.cwiseProduct(d).transpose();
  }
  return f;
}

ConstraintAudit audit_config(const SeatingProblem& p, const VectorXd& q) {
  ConstraintAudit a;
  a.pose_residual = pose_residual(p, q).cwiseAbs().maxCoeff();
  const double cx = com_x(p.chain, q);
  a.com_margin = std::min(cx - p.chain.heel, p.chain.toe - cx);
  const auto cl = link_clearances(p, q);
  a.min_clearance = *std::min_element(cl.begin(), cl.end());
  for (int i = 0; i < p.chain.n(); ++i) {
    if (q[i] < p.chain.lower[i] - 1e-9 || q[i] > p.chain.upper[i] + 1e-9) a.within_limits = false;
  }
  return a;
}

ConstraintAudit audit_trajectory(const SeatingProblem& p, const MatrixXd& traj) {
  ConstraintAudit a;
  a.pose_residual = 0.0;
  a.com_margin = kInf;
  a.min_clearance = kInf;
  for (Eigen::Index k = 0; k < traj.rows(); ++k) {
    const VectorXd q = traj.row(k).transpose();
    const auto c = audit_config(p, q);
    a.com_margin = std::min(a.com_margin, c.com_margin);
    a.min_clearance = std::min(a.min_clearance, c.min_clearance);
    a.within_limits = a.within_limits && c.within_limits;
    if (k > 0) {
      const VectorXd dq = (traj.row(k) - traj.row(k - 1)).transpose().cwiseAbs();
      a.max_step_ratio = std::max(a.max_step_ratio, (dq.array() / (p.chain.vel_limit.array() * p.dt)).maxCoeff());
      if (p.payload_corridor) {
        const Vec2 h = fk_unchecked(p.chain, q).hand, t = p.hand_target();
        a.corridor_violation = std::max({a.corridor_violation, h.x() - t.x(), t.y() - h.y()});
      }
    }
  }
  return a;
}

bool reachable(const SeatingProblem& p) {
  const Vec2 base(0.0, p.chain.ankle_height);
  const Vec2 hand = p.hand_target();
  const int n = p.chain.n();
  const double last = p.chain.lengths[n - 1];
  if (!p.hand_pitch) return (hand - base).norm() <= p.chain.reach();
  const Vec2 wrist = hand - last * Vec2(std::sin(*p.hand_pitch), std::cos(*p.hand_pitch));
  return (hand - base).norm() <= p.chain.reach() && (wrist - base).norm() <= p.chain.reach() - last;
}

NlpResult solve_augmented_lagrangian(const NlpProblem& prob, VectorXd x0, int max_outer, int max_inner) {
  auto project = [&](const VectorXd& x) { return x.cwiseMax(prob.lo).cwiseMin(prob.hi); };
  VectorXd lam_e = VectorXd::Zero(prob.n_eq), lam_i = VectorXd::Zero(prob.n_in);
  double rho = 10.0;

  auto lagr = [&](const VectorXd& x, VectorXd* g) {
    VectorXd gf;
    double v = prob.objective(x, g ? &gf : nullptr);
    if (g) *g = gf;
    if (prob.n_eq > 0) {
      const VectorXd h = prob.eq(x);
      v += lam_e.dot(h) + 0.5 * rho * h.squaredNorm();
      if (g) prob.eq_grad(x, lam_e + rho * h, *g);
    }
    if (prob.n_in > 0) {
      const VectorXd c = prob.ineq(x);
      const VectorXd mu = (lam_i + rho * c).cwiseMax(0.0);
      v += (mu.squaredNorm() - lam_i.squaredNorm()) / (2 * rho);
      if (g && (mu.array() > 0).any()) prob.ineq_grad(x, mu, *g);
    }
    return v;
  };

  // spectral projected gradient, non-monotone (last 10 values)
  auto inner = [&](VectorXd& x, double tol) {
    VectorXd g;
    double L = lagr(x, &g);
    std::vector<double> hist{L};
    double alpha = 1.0 / std::max(1e-12, (project(x - g) - x).cwiseAbs().maxCoeff());
    alpha = std::min(alpha, 1.0);
    for (int it = 0; it < max_inner; ++it) {
      if ((project(x - g) - x).cwiseAbs().maxCoeff() < tol) break;
      const VectorXd d = project(x - alpha * g) - x;
      const double slope = g.dot(d);
      const double ref = *std::max_element(hist.begin(), hist.end());
      double t = 1.0;
      VectorXd xn;
      for (;;) {
        xn = x + t * d;
        if (lagr(xn, nullptr) <= ref + 1e-4 * t * slope || t < 1e-14) break;
        t *= 0.5;
      }
      if (t < 1e-14) break;
      VectorXd gn;
      const double Ln = lagr(xn, &gn);
      const VectorXd s = xn - x, y = gn - g;
      const double sy = s.dot(y);
      alpha = sy > 1e-20 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 1e3;
      x = xn;
      g = gn;
      L = Ln;
      hist.push_back(L);
      if (hist.size() > 10) hist.erase(hist.begin());
    }
  };

  VectorXd x = project(x0);
  double prev = kInf, tol = 1e-3;
  NlpResult res;
  for (int outer = 0; outer < max_outer; ++outer) {
    res.outer = outer + 1;
    inner(x, tol);
    const double viol = max_violation(prob, x, nullptr, nullptr);
    if (prob.n_eq > 0) lam_e += rho * prob.eq(x);
    if (prob.n_in > 0) lam_i = (lam_i + rho * prob.ineq(x)).cwiseMax(0.0);
    if (viol < 1e-9 && tol <= 1e-8) break;
    if (viol > 0.25 * prev) rho = std::min(rho * 10.0, 1e10);
    prev = viol;
    tol = std::max(1e-9, tol * 0.1);
  }
  res.x = x;
  res.f = prob.objective(x, nullptr);
  max_violation(prob, x, &res.max_eq, &res.max_in);
  return res;
}

namespace {

NlpProblem goal_nlp(const SeatingProblem& p) {
  const PlanarChain& c = p.chain;
  NlpProblem prob;
  prob.n = c.n();
  prob.lo = c.lower;
  prob.hi = c.upper;
  prob.objective = [&p](const VectorXd& q, VectorXd* g) { return goal_objective(p, q, g); };
  prob.n_eq = p.hand_pitch ? 3 : 2;
  prob.eq = [&p](const VectorXd& q) { return pose_residual(p, q); };
  prob.eq_grad = [&p](const VectorXd& q, const VectorXd& w, VectorXd& g) {
    MatrixXd J;
    pose_residual(p, q, &J);
    g += J.transpose() * w;
  };
  const int m = p.obstacle ? collision_links(c) : 0;
  const double lo = c.heel + p.com_margin + p.slack, hi = c.toe - p.com_margin - p.slack;
  const double clr = p.clearance + p.slack;
  prob.n_in = 2 + m;
  prob.ineq = [&p, m, lo, hi, clr](const VectorXd& q) {
    VectorXd out(2 + m);
    const double cx = com_x(p.chain, q);
    out[0] = lo - cx;
    out[1] = cx - hi;
    if (m > 0) out.tail(m) = clr - clearance_vec(p, q).array();
    return out;
  };
  prob.ineq_grad = [&p, m](const VectorXd& q, const VectorXd& w, VectorXd& g) {
    VectorXd gc;
    com_x(p.chain, q, &gc);
    g += (w[1] - w[0]) * gc;
    if (m > 0 && (w.tail(m).array() > 0).any()) {
      numeric_jt([&p](const VectorXd& x) { return VectorXd(-clearance_vec(p, x)); }, q, w.tail(m), g);
    }
  };
  return prob;
}

// Points of the hand-position manifold: the first n - 2 joints given, the
// last two from planar two-link IK (both elbow branches).
std::vector<VectorXd> complete(const SeatingProblem& p, const VectorXd& head) {
  const PlanarChain& c = p.chain;
  const int n = c.n();
  std::vector<VectorXd> out;
  Vec2 pt(0.0, c.ankle_height);
  double phi = 0.0;
  for (int i = 0; i < n - 2; ++i) {
    phi += head[i];
    pt += c.lengths[i] * Vec2(std::sin(phi), std::cos(phi));
  }
  const double a = c.lengths[n - 2], b = c.lengths[n - 1];
  const Vec2 d = p.hand_target() - pt;
  const double r = d.norm();
  if (r > a + b || r < std::abs(a - b) || r == 0.0) return out;
  const double bearing = std::atan2(d.x(), d.y());
  const double inner = std::acos(std::clamp((a * a + r * r - b * b) / (2 * a * r), -1.0, 1.0));
  const double bend = kPi - std::acos(std::clamp((a * a + b * b - r * r) / (2 * a * b), -1.0, 1.0));
  for (double s : {1.0, -1.0}) {
    VectorXd q(n);
    q.head(n - 2) = head;
    q[n - 2] = wrap_angle(bearing - s * inner - phi);
    q[n - 1] = s * bend;
    out.push_back(q);
  }
  return out;
}

bool config_ok(const SeatingProblem& p, const ConstraintAudit& a) {
  return a.within_limits && a.pose_residual < 1e-3 && a.com_margin >= p.com_margin &&
         a.min_clearance >= p.clearance;
}

}  // namespace

VectorXd goal_config(const SeatingProblem& p) {
  p.validate();
  if (!reachable(p)) throw Infeasible("goal_config: bear target outside the chain's reach");
  const PlanarChain& c = p.chain;
  const NlpProblem prob = goal_nlp(p);

  // coarse sweep of the constraint manifold for starting points
  struct Cand {
    double score;
    VectorXd q;
  };
  std::vector<Cand> cands;
  const int g = 10, heads = c.n() - 2;
  VectorXd head(heads);
  std::vector<int> idx(static_cast<std::size_t>(heads), 0);
  for (;;) {
    for (int i = 0; i < heads; ++i) {
      head[i] = c.lower[i] + (c.upper[i] - c.lower[i]) * idx[static_cast<std::size_t>(i)] / g;
    }
    for (const auto& q : complete(p, head)) {
      const VectorXd qc = q.cwiseMax(c.lower).cwiseMin(c.upper);
      double viol = 0.0;
      max_violation(prob, qc, nullptr, &viol);
      const double eq = pose_residual(p, qc).cwiseAbs().maxCoeff();
      cands.push_back({goal_objective(p, qc) + 100.0 * (viol + eq), qc});
    }
    int i = 0;
    while (i < heads && ++idx[static_cast<std::size_t>(i)] > g) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == heads) break;
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.score < b.score; });
  if (cands.size() > 6) cands.resize(6);
  cands.push_back({0.0, p.q_start.cwiseMax(c.lower).cwiseMin(c.upper)});

  std::optional<VectorXd> best;
  double best_f = kInf;
  // an unpolished sweep point that already passes stands as a fallback
  for (const auto& cand : cands) {
    if (!config_ok(p, audit_config(p, cand.q))) continue;
    const double f = goal_objective(p, cand.q);
    if (f < best_f) {
      best_f = f;
      best = cand.q;
    }
  }
  for (const auto& cand : cands) {
    const NlpResult r = solve_augmented_lagrangian(prob, cand.q);
    if (!config_ok(p, audit_config(p, r.x))) continue;
    if (r.f < best_f) {
      best_f = r.f;
      best = r.x;
    }
  }
  if (!best) throw Infeasible("goal_config: no stable collision-free configuration found");
  return *best;
}

MatrixXd plan_seating_trajectory(const SeatingProblem& p, const VectorXd& q_goal) {
  p.validate();
  const PlanarChain& c = p.chain;
  const int n = c.n(), N = p.N;
  MatrixXd traj(N, n);
  const VectorXd step = c.vel_limit * p.dt;
  if (((q_goal - p.q_start).cwiseAbs().array() > (N - 1) * step.array() + 1e-12).any()) {
    throw NoTrajectory("plan_seating_trajectory: goal not reachable within the velocity limits");
  }
  const VectorXd delta = q_goal - p.q_start;
  for (int k = 0; k < N; ++k) {
    const double s = static_cast<double>(k) / (N - 1);
    traj.row(k) = (p.q_start + s * delta).transpose();
  }
  traj.row(N - 1) = q_goal.transpose();
  if ((q_goal - p.q_start).cwiseAbs().maxCoeff() == 0.0) return traj;
  if (N == 2) {
    const auto a = audit_trajectory(p, traj);
    if (a.com_margin < p.com_margin || a.min_clearance < p.clearance || !a.within_limits) {
      throw NoTrajectory("plan_seating_trajectory: two-point trajectory violates constraints");
    }
    return traj;
  }

  const int K = N - 2;  // free waypoints 1..N-2
  const int m = p.obstacle ? collision_links(c) : 0;
  const double lo = c.heel + p.com_margin + p.slack, hi = c.toe - p.com_margin - p.slack;
  const double clr = p.clearance + p.slack;
  auto unpack = [&](const VectorXd& x) {
    MatrixXd t = traj;
    for (int k = 0; k < K; ++k) t.row(k + 1) = x.segment(k * n, n).transpose();
    return t;
  };

  NlpProblem prob;
  prob.n = K * n;
  prob.lo = c.lower.replicate(K, 1);
  prob.hi = c.upper.replicate(K, 1);
  prob.objective = [&](const VectorXd& x, VectorXd* g) {
    MatrixXd G;
    const double f = trajectory_objective(p, unpack(x), q_goal, g ? &G : nullptr);
    if (g) {
      g->resize(K * n);
      for (int k = 0; k < K; ++k) g->segment(k * n, n) = G.row(k + 1).transpose();
    }
    return f;
  };
  const int nc = p.payload_corridor ? 2 : 0;
  const Vec2 ht = p.hand_target();
  const int nv = 2 * n * (N - 1), per = 2 + m + nc;
  prob.n_in = nv + K * per;
  prob.ineq = [&](const VectorXd& x) {
    const MatrixXd t = unpack(x);
    VectorXd out(prob.n_in);
    for (int k = 0; k + 1 < N; ++k) {
      const VectorXd d = (t.row(k + 1) - t.row(k)).transpose();
      out.segment(2 * n * k, n) = d - step;
      out.segment(2 * n * k + n, n) = -d - step;
    }
    for (int k = 0; k < K; ++k) {
      const VectorXd q = x.segment(k * n, n);
      const double cx = com_x(c, q);
      const int o = nv + k * per;
      out[o] = lo - cx;
      out[o + 1] = cx - hi;
      if (m > 0) out.segment(o + 2, m) = clr - clearance_vec(p, q).array();
      if (nc > 0) {
        const Vec2 h = fk_unchecked(c, q).hand;
        out[o + 2 + m] = h.x() - ht.x();
        out[o + 3 + m] = ht.y() - h.y();
      }
    }
    return out;
  };
  prob.ineq_grad = [&](const VectorXd& x, const VectorXd& w, VectorXd& g) {
    for (int k = 0; k + 1 < N; ++k) {
      const VectorXd wd = w.segment(2 * n * k, n) - w.segment(2 * n * k + n, n);
      if (k + 1 <= K) g.segment(k * n, n) += wd;   // + q_{k+1}
      if (k >= 1) g.segment((k - 1) * n, n) -= wd;  // - q_k
    }
    for (int k = 0; k < K; ++k) {
      const int o = nv + k * per;
      const VectorXd q = x.segment(k * n, n);
      if (w[o] > 0 || w[o + 1] > 0) {
        VectorXd gc;
        com_x(c, q, &gc);
        g.segment(k * n, n) += (w[o + 1] - w[o]) * gc;
      }
      if (m > 0 && (w.segment(o + 2, m).array() > 0).any()) {
        numeric_jt([&p](const VectorXd& y) { return VectorXd(-clearance_vec(p, y)); }, q,
                   w.segment(o + 2, m), g.segment(k * n, n));
      }
      if (nc > 0 && (w[o + 2 + m] > 0 || w[o + 3 + m] > 0)) {
        const MatrixXd J = point_jacobian(c, q, n);
        g.segment(k * n, n) += w[o + 2 + m] * J.row(0).transpose() - w[o + 3 + m] * J.row(1).transpose();
      }
    }
  };

  VectorXd x0(K * n);
  for (int k = 0; k < K; ++k) x0.segment(k * n, n) = traj.row(k + 1).transpose();
  const NlpResult r = solve_augmented_lagrangian(prob, x0, 40, 4000);
  const MatrixXd out = unpack(r.x);
  const auto a = audit_trajectory(p, out);
  if (!a.within_limits || a.com_margin < p.com_margin || a.min_clearance < p.clearance ||
      a.max_step_ratio > 1.0 + 1e-6 || a.corridor_violation > 1e-4) {
    throw NoTrajectory("plan_seating_trajectory: no feasible trajectory within the iteration budget");
  }
  return out;
}

RigidTransform sagittal_to_world(const PlanarPose& robot) {
  return RigidTransform::from_yaw(robot.heading, Vec3(robot.x, robot.y, 0.0));
}

RigidTransform bear_base_at(const PlanarChain& c, const VectorXd& q, const PlanarPose& robot,
                            double gamma, const AgentModel& bear) {
  const ChainFk fk = fk_unchecked(c, q);
  const Vec2 pelvis = fk.hand - c.grip_offset;
  const Vec3 world = sagittal_to_world(robot).apply(Vec3(pelvis.x(), 0.0, pelvis.y()));
  return {rot_z(gamma) * bear.r0, world};
}

ReleaseResult execute_and_release(const MatrixXd& traj, const PlanarChain& c, const PlanarPose& robot,
                                  double gamma, Scene& scene, const SimParams& sim, double dt) {
  ReleaseResult out;
  if (traj.rows() == 0) {
    out.bear = scene.configuration();
    return out;
  }
  // hold target interpolated in joint space, one update per frame
  const int frames = std::max(1, static_cast<int>(std::lround(dt / sim.timestep)));
  scene.hold_base(bear_base_at(c, traj.row(0).transpose(), robot, gamma, scene.agent()));
  for (Eigen::Index k = 0; k + 1 < traj.rows(); ++k) {
    for (int f = 1; f <= frames; ++f) {
      const double s = static_cast<double>(f) / frames;
      const VectorXd q = ((1 - s) * traj.row(k) + s * traj.row(k + 1)).transpose();
      scene.hold_base(bear_base_at(c, q, robot, gamma, scene.agent()));
      scene.step();
      scene.check_sanity();
    }
  }
  out.released_base = bear_base_at(c, traj.row(traj.rows() - 1).transpose(), robot, gamma, scene.agent());
  scene.release_base();
  if (!sim.lock_bear_joints) scene.set_joint_mode(JointMode::Damped, sim.bear_damping);
  out.released = true;
  const double t0 = scene.time();
  out.bear = settle(scene, sim);
  out.sim_time = scene.time() - t0;
  return out;
}

}  // namespace seatbear::wholebody
