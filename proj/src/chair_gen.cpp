#include "seatbear/chair_gen.hpp"

#include <random>

#include "seatbear/error.hpp"

namespace seatbear {

std::string to_string(ChairVariant v) {
  switch (v) {
    case ChairVariant::Standard: return "standard";
    case ChairVariant::StoolNoBack: return "stool-no-back";
    case ChairVariant::StepStoolNarrowSeat: return "step-stool-narrow-seat";
    case ChairVariant::ImprovisedStack: return "improvised-stack";
  }
  return "standard";
}

ChairVariant chair_variant_from_string(const std::string& s) {
  if (s == "standard") return ChairVariant::Standard;
  if (s == "stool-no-back") return ChairVariant::StoolNoBack;
  if (s == "step-stool-narrow-seat") return ChairVariant::StepStoolNarrowSeat;
  if (s == "improvised-stack") return ChairVariant::ImprovisedStack;
  throw ConfigError("unknown chair variant '" + s + "'");
}

void ChairGenParams::validate() const {
  for (const Range* r : {&seat_width, &seat_depth, &seat_height, &seat_thickness, &backrest_height,
                         &backrest_thickness, &mass}) {
    if (!(r->first > 0) || !(r->second >= r->first)) {
      throw DegenerateParams("chair generator: ranges must be positive and ordered");
    }
  }
  if (backrest_angle.first < 0 || backrest_angle.second < backrest_angle.first ||
      backrest_angle.second >= deg2rad(45)) {
    throw DegenerateParams("chair generator: backrest angle must be in [0, 45deg)");
  }
  if (seat_thickness.second >= seat_height.first) {
    throw DegenerateParams("chair generator: seat thicker than it is tall");
  }
}

nlohmann::json to_json(const ChairGenParams& p) {
  auto r = [](const Range& x) { return nlohmann::json::array({x.first, x.second}); };
  return {{"variant", to_string(p.variant)},
          {"seat_width", r(p.seat_width)},
          {"seat_depth", r(p.seat_depth)},
          {"seat_height", r(p.seat_height)},
          {"seat_thickness", r(p.seat_thickness)},
          {"backrest_height", r(p.backrest_height)},
          {"backrest_angle", r(p.backrest_angle)},
          {"backrest_thickness", r(p.backrest_thickness)},
          {"mass", r(p.mass)},
          {"friction", p.friction},
          {"seed", p.seed}};
}

ChairGenParams chair_gen_params_from_json(const nlohmann::json& j) {
  ChairGenParams p;
  auto r = [&](const char* key, Range& out) {
    if (j.contains(key)) out = {j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()};
  };
  try {
    if (j.contains("variant")) p.variant = chair_variant_from_string(j.at("variant").get<std::string>());
    r("seat_width", p.seat_width);
    r("seat_depth", p.seat_depth);
    r("seat_height", p.seat_height);
    r("seat_thickness", p.seat_thickness);
    r("backrest_height", p.backrest_height);
    r("backrest_angle", p.backrest_angle);
    r("backrest_thickness", p.backrest_thickness);
    r("mass", p.mass);
    p.friction = j.value("friction", p.friction);
    p.seed = j.value("seed", p.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("chair generator params: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const SeatFrame& s) {
  return {{"seat_height", s.seat_height},
          {"seat_min", {s.seat_min.x(), s.seat_min.y()}},
          {"seat_max", {s.seat_max.x(), s.seat_max.y()}},
          {"sitting_yaw", s.sitting_yaw},
          {"has_backrest", s.has_backrest}};
}

Mesh make_box(const Vec3& lo, const Vec3& hi) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  }
  // Outward winding per face.
  m.faces = {{0, 2, 1}, {1, 2, 3},   // z-
             {4, 5, 6}, {5, 7, 6},   // z+
             {0, 1, 4}, {1, 5, 4},   // y-
             {2, 6, 3}, {3, 6, 7},   // y+
             {0, 4, 2}, {2, 4, 6},   // x-
             {1, 3, 5}, {3, 7, 5}};  // x+
  return m;
}

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double operator()(const Range& r) {
    if (r.first == r.second) return r.first;
    return std::uniform_real_distribution<double>(r.first, r.second)(rng_);
  }
  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

 private:
  std::mt19937_64 rng_;
};

// Box hinged about its bottom edge at x = pivot_x, z = pivot_z, leaning back
// (toward -x) by `angle`.
Mesh tilted_box(const Vec3& lo, const Vec3& hi, double pivot_x, double pivot_z, double angle) {
  Mesh m = make_box(lo, hi);
  const Eigen::AngleAxisd rot(-angle, Vec3::UnitY());
  const Vec3 pivot(pivot_x, 0.0, pivot_z);
  for (auto& v : m.vertices) v = pivot + rot * (v - pivot);
  return m;
}

void finish_physics(Mesh& mesh, Sampler& sample, const ChairGenParams& p) {
  const double target_mass = sample(p.mass);
  MassProperties props = compute_mass_properties(mesh, 1.0);
  const double scale = target_mass / props.mass;
  props.mass = target_mass;
  props.inertia *= scale;
  props.friction = p.friction;
  mesh.physical = props;
}

}  // namespace

GeneratedChair generate_chair(const ChairGenParams& p) {
  p.validate();
  Sampler sample(p.seed);
  GeneratedChair out;
  out.params = p;
  Mesh& mesh = out.mesh;
  SeatFrame& seat = out.seat;

  const double w = sample(p.seat_width);
  double d = sample(p.seat_depth);
  const double h = sample(p.seat_height);
  const double t = sample(p.seat_thickness);
  const double bh = sample(p.backrest_height);
  const double ba = sample(p.backrest_angle);
  const double bt = sample(p.backrest_thickness);
  constexpr double kLeg = 0.03;

  switch (p.variant) {
    case ChairVariant::Standard:
    case ChairVariant::StoolNoBack: {
      const bool solid_base = sample.coin();
      mesh.append(make_box({-d / 2, -w / 2, h - t}, {d / 2, w / 2, h}));
      if (solid_base) {
        mesh.append(make_box({-d / 2 + 0.01, -w / 2 + 0.01, 0.0}, {d / 2 - 0.01, w / 2 - 0.01, h - t}));
      } else {
        for (int sx : {-1, 1}) {
          for (int sy : {-1, 1}) {
            const double x0 = sx < 0 ? -d / 2 : d / 2 - kLeg;
            const double y0 = sy < 0 ? -w / 2 : w / 2 - kLeg;
            mesh.append(make_box({x0, y0, 0.0}, {x0 + kLeg, y0 + kLeg, h - t}));
          }
        }
      }
      if (p.variant == ChairVariant::Standard) {
        mesh.append(tilted_box({-d / 2 - bt, -w / 2, h}, {-d / 2, w / 2, h + bh}, -d / 2, h, ba));
        seat.has_backrest = true;
      }
      break;
    }
    case ChairVariant::StepStoolNarrowSeat: {
      // Narrow top step over a wider lower step; no back support.
      d = std::min(d, 0.12);
      const double step_h = 0.5 * h;
      const double step_d = 0.14;
      mesh.append(make_box({-d / 2, -w / 2, 0.0}, {d / 2, w / 2, h}));
      mesh.append(make_box({d / 2, -w / 2, 0.0}, {d / 2 + step_d, w / 2, step_h}));
      break;
    }
    case ChairVariant::ImprovisedStack: {
      // Two or three stacked slabs ("books and boxes") plus a tall box behind.
      const int slabs = sample.coin() ? 3 : 2;
      double z = 0.0;
      for (int i = 0; i < slabs; ++i) {
        const double top = h * (i + 1) / slabs;
        const double jitter = 0.004 * (i % 2 == 0 ? 1 : -1);
        mesh.append(make_box({-d / 2 + jitter, -w / 2, z}, {d / 2 + jitter, w / 2, top}));
        z = top;
      }
      mesh.append(make_box({-d / 2 - 0.06, -w / 2, 0.0}, {-d / 2 - 0.002, w / 2, h + bh}));
      seat.has_backrest = true;
      break;
    }
  }
  mesh.validate();
  finish_physics(mesh, sample, p);

  seat.seat_height = h;
  seat.seat_min = Vec2(-d / 2, -w / 2);
  seat.seat_max = Vec2(d / 2, w / 2);
  seat.sitting_yaw = 0.0;
  return out;
}

}  // namespace seatbear
