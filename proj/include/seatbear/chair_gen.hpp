#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <json.hpp>

#include "seatbear/geometry.hpp"

namespace seatbear {

enum class ChairVariant { Standard, StoolNoBack, StepStoolNarrowSeat, ImprovisedStack };

std::string to_string(ChairVariant v);
ChairVariant chair_variant_from_string(const std::string& s);

using Range = std::pair<double, double>;

/// Parameter ranges for the procedural chair generator (meters, kg, radians).
/// The generated chair frame has the floor at z = 0, the seat centered on the
/// z axis and the sitting direction (outward seat normal) along +x.
struct ChairGenParams {
  ChairVariant variant = ChairVariant::Standard;
  Range seat_width{0.26, 0.32};
  Range seat_depth{0.20, 0.24};
  Range seat_height{0.26, 0.32};
  Range seat_thickness{0.025, 0.035};
  Range backrest_height{0.20, 0.28};
  Range backrest_angle{0.0, deg2rad(12.0)};
  Range backrest_thickness{0.02, 0.03};
  Range mass{5.0, 8.0};
  double friction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const ChairGenParams& p);
ChairGenParams chair_gen_params_from_json(const nlohmann::json& j);

/// Ground truth recorded by the generator for test oracles.
struct SeatFrame {
  double seat_height = 0.0;   ///< top of the seat surface
  Vec2 seat_min = Vec2::Zero();  ///< seat footprint, chair frame
  Vec2 seat_max = Vec2::Zero();
  double sitting_yaw = 0.0;   ///< outward seat normal, chair frame
  bool has_backrest = false;

  bool footprint_contains(const Vec2& p, double tol = 0.0) const {
    return p.x() >= seat_min.x() - tol && p.x() <= seat_max.x() + tol &&
           p.y() >= seat_min.y() - tol && p.y() <= seat_max.y() + tol;
  }
};

nlohmann::json to_json(const SeatFrame& s);

struct GeneratedChair {
  Mesh mesh;
  SeatFrame seat;
  ChairGenParams params;
};

/// Deterministic in `params.seed`. Throws DegenerateParams on invalid ranges.
GeneratedChair generate_chair(const ChairGenParams& params);

/// Closed axis-aligned box mesh with outward-facing triangles.
Mesh make_box(const Vec3& lo, const Vec3& hi);

}  // namespace seatbear
