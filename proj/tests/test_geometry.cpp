#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "seatbear/chair_gen.hpp"
#include "seatbear/error.hpp"
#include "seatbear/geometry.hpp"
#include "seatbear/mesh_io.hpp"

using namespace seatbear;

TEST(Geometry, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(3 * kPi + 0.1), -kPi + 0.1, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(a - w, 2 * kPi), 0.0, 1e-9);
  }
}

TEST(Geometry, TransformAlgebra) {
  const RigidTransform a = RigidTransform::from_yaw(0.7, Vec3(1, 2, 3));
  const RigidTransform b = RigidTransform::from_yaw(-1.9, Vec3(-0.5, 0.1, 0));
  const Vec3 p(0.3, -0.2, 0.9);
  EXPECT_LT(((a * b).apply(p) - a.apply(b.apply(p))).norm(), 1e-12);
  EXPECT_LT((a.inverse().apply(a.apply(p)) - p).norm(), 1e-12);
  EXPECT_NEAR((a * b).yaw(), wrap_angle(0.7 - 1.9), 1e-12);
  const RigidTransform c = RigidTransform::yaw_about(0.4, Vec3(1, 1, 5));
  EXPECT_LT((c.apply(Vec3(1, 1, 0)) - Vec3(1, 1, 0)).norm(), 1e-12);
}

TEST(Geometry, HullMatchesBruteForce) {
  // a point is a hull vertex iff some direction makes it the unique extreme
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 40; ++i) pts.emplace_back(u(rng), u(rng));
    const auto hull = convex_hull_2d(pts);
    double area = 0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2& a = hull[i];
      const Vec2& b = hull[(i + 1) % hull.size()];
      area += a.x() * b.y() - a.y() * b.x();
    }
    EXPECT_GT(area, 0.0);  // counterclockwise
    for (const auto& p : pts) {
      for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2 e = hull[(i + 1) % hull.size()] - hull[i];
        const Vec2 d = p - hull[i];
        EXPECT_GE(e.x() * d.y() - e.y() * d.x(), -1e-12);
      }
    }
    int extreme = 0;
    for (const auto& p : pts) {
      bool on_hull = false;
      for (int k = 0; k < 3600 && !on_hull; ++k) {
        const Vec2 dir(std::cos(k * kPi / 1800), std::sin(k * kPi / 1800));
        bool best = true;
        for (const auto& q : pts)
          if (&q != &p && q.dot(dir) >= p.dot(dir)) best = false;
        on_hull = best;
      }
      extreme += on_hull;
    }
    EXPECT_EQ(static_cast<int>(hull.size()), extreme);
  }
}

TEST(Geometry, ObbMatchesYawSweep) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Mesh m = oracle::random_box_cluster(rng);
    const Obb obb = compute_obb(m);
    EXPECT_NEAR(obb.footprint_area(), oracle::brute_force_min_area(m.vertices), 1e-6);
    for (const auto& v : m.vertices) EXPECT_TRUE(obb.contains(v, 1e-9));
  }
}

TEST(Geometry, ObbOfEmptyMeshThrows) { EXPECT_THROW(compute_obb(Mesh{}), EmptyMesh); }

TEST(Geometry, AlignmentMapsBoxToAxes) {
  const Mesh box = make_box(Vec3(-0.3, -0.1, 0), Vec3(0.3, 0.1, 0.5))
                       .transformed(RigidTransform::from_yaw(0.5, Vec3(2, -1, 0)));
  const Obb obb = compute_obb(box);
  const RigidTransform g = obb_alignment_transform(obb);
  const Obb aligned = transform_obb(obb, g);
  EXPECT_NEAR(std::remainder(aligned.yaw, kPi / 2), 0.0, 1e-9);
  EXPECT_LT(aligned.center.head<2>().norm(), 1e-9);
  EXPECT_NEAR(g.translation.z(), 0.0, 1e-12);
}

TEST(Geometry, BoxMassProperties) {
  // solid box: I_xx = m (b^2 + c^2) / 12
  const double a = 0.4, b = 0.2, c = 0.1, rho = 500;
  const Mesh box = make_box(Vec3(1, 1, 1), Vec3(1 + a, 1 + b, 1 + c));
  const MassProperties mp = compute_mass_properties(box, rho);
  const double m = rho * a * b * c;
  EXPECT_NEAR(mp.mass, m, 1e-9);
  EXPECT_LT((mp.com - Vec3(1 + a / 2, 1 + b / 2, 1 + c / 2)).norm(), 1e-12);
  EXPECT_NEAR(mp.inertia(0, 0), m * (b * b + c * c) / 12, 1e-10);
  EXPECT_NEAR(mp.inertia(1, 1), m * (a * a + c * c) / 12, 1e-10);
  EXPECT_NEAR(mp.inertia(2, 2), m * (a * a + b * b) / 12, 1e-10);
  EXPECT_NEAR(mp.inertia(0, 1), 0.0, 1e-10);
}

TEST(MeshIo, ObjAndStlRoundTrip) {
  const Mesh box = make_box(Vec3(0, 0, 0), Vec3(0.5, 0.25, 0.125));
  std::stringstream obj;
  write_obj(obj, box);
  const Mesh a = read_obj(obj);
  EXPECT_EQ(a.vertices.size(), box.vertices.size());
  EXPECT_EQ(a.faces.size(), box.faces.size());
  std::stringstream stl(std::ios::in | std::ios::out | std::ios::binary);
  write_stl(stl, box);
  const Mesh b = read_stl(stl);
  EXPECT_EQ(b.faces.size(), box.faces.size());
  EXPECT_EQ(b.vertices.size(), 8u);  // welded
  EXPECT_NEAR(compute_mass_properties(b, 1.0).mass, 0.5 * 0.25 * 0.125, 1e-12);
}

TEST(MeshIo, PolygonsAreFanTriangulated) {
  std::stringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n");
  const Mesh m = read_obj(in);
  EXPECT_EQ(m.faces.size(), 2u);
}

TEST(MeshIo, BadIndexThrows) {
  std::stringstream in("v 0 0 0\nv 1 0 0\nf 1 2 7\n");
  EXPECT_THROW(read_obj(in), MeshFormatError);
}

TEST(ChairGen, DeterministicAndVariantContracts) {
  ChairGenParams p;
  p.seed = 42;
  const GeneratedChair a = generate_chair(p), b = generate_chair(p);
  ASSERT_EQ(a.mesh.vertices.size(), b.mesh.vertices.size());
  for (std::size_t i = 0; i < a.mesh.vertices.size(); ++i) EXPECT_EQ(a.mesh.vertices[i], b.mesh.vertices[i]);
  EXPECT_TRUE(a.seat.has_backrest);

  p.variant = ChairVariant::StoolNoBack;
  const GeneratedChair s = generate_chair(p);
  EXPECT_FALSE(s.seat.has_backrest);
  EXPECT_LE(s.mesh.bounds().hi.z(), s.seat.seat_height + 0.05);

  p.variant = ChairVariant::Standard;
  p.seat_width = {0.3, 0.2};
  EXPECT_THROW(generate_chair(p), DegenerateParams);
}

TEST(ChairGen, ClosedSurfaceHasPositiveVolume) {
  for (auto v : {ChairVariant::Standard, ChairVariant::StoolNoBack, ChairVariant::StepStoolNarrowSeat,
                 ChairVariant::ImprovisedStack}) {
    ChairGenParams p;
    p.variant = v;
    const GeneratedChair c = generate_chair(p);
    EXPECT_GT(c.mesh.physical.mass, 0.0) << to_string(v);
    // every directed edge appears once and its reverse once per closed part
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : c.mesh.faces)
      for (int k = 0; k < 3; ++k) ++edges[{f[k], f[(k + 1) % 3]}];
    for (const auto& [e, n] : edges) EXPECT_EQ(n, edges.count({e.second, e.first}) ? edges.at({e.second, e.first}) : 0);
  }
}
