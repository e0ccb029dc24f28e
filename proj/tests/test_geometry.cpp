#include <doctest.h>

#include "lvt/geometry.hpp"

#include <random>

using namespace lvt;

TEST_CASE("spherical conversion of axis-aligned points") {
  const Spherical a = to_spherical({1, 0, 0});
  CHECK(a.range == doctest::Approx(1.0));
  CHECK(a.azimuth == doctest::Approx(0.0));
  CHECK(a.elevation == doctest::Approx(0.0));

  const Spherical b = to_spherical({0, 1, 0});
  CHECK(b.range == doctest::Approx(1.0));
  CHECK(b.azimuth == doctest::Approx(kPi / 2));
  CHECK(b.elevation == doctest::Approx(0.0));
}

TEST_CASE("spherical conversion of a diagonal point") {
  // (1, 1, sqrt(2)): range 2, azimuth pi/4, elevation pi/4.
  const Spherical s = to_spherical({1, 1, std::sqrt(2.0)});
  CHECK(s.range == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.azimuth == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(s.elevation == doctest::Approx(kPi / 4).epsilon(1e-12));
}

TEST_CASE("zero-range point is rejected") {
  CHECK_THROWS_AS(to_spherical({0, 0, 0}), std::domain_error);
}

TEST_CASE("spherical round trip recovers random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    ScanPoint p{u(rng), u(rng), u(rng)};
    if (p.pos().norm() < 1e-3) continue;
    const Spherical s = to_spherical(p);
    const Vec3 back = from_spherical(s.range, s.azimuth, s.elevation);
    CHECK((back - p.pos()).norm() < 1e-9);
  }
}

TEST_CASE("transform_frame basics") {
  PointFrame f;
  f.sensor_id = "front";
  f.stamp_ns = 42;
  f.points.push_back({0, 0, 0, 3.0, 5, 99});
  f.points.push_back({1, 0, 0, 1.0, 2, 98});

  SUBCASE("identity keeps everything") {
    const PointFrame out = transform_frame(f, RigidTransform3D());
    CHECK(out.points[1].x == doctest::Approx(1.0));
    CHECK(out.points[0].intensity == 3.0);
    CHECK(out.points[0].layer == 5);
    CHECK(out.points[0].t_ns == 99);
  }

  SUBCASE("pure translation") {
    const auto T = RigidTransform3D::from_xyz_rpy(1, 0, 0, 0, 0, 0);
    const PointFrame out = transform_frame(f, T);
    CHECK(out.points[0].x == doctest::Approx(1.0));
    CHECK(out.points[0].y == doctest::Approx(0.0));
  }

  SUBCASE("90 degree yaw maps +x to +y") {
    const auto T = RigidTransform3D::from_xyz_rpy(0, 0, 0, 0, 0, kPi / 2);
    const PointFrame out = transform_frame(f, T);
    CHECK(std::abs(out.points[1].x - 0.0) < 1e-12);
    CHECK(std::abs(out.points[1].y - 1.0) < 1e-12);
  }
}

TEST_CASE("transform inverse and composition") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const auto t1 = RigidTransform3D::from_xyz_rpy(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
    const auto t2 = RigidTransform3D::from_xyz_rpy(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
    const Vec3 p(u(rng) * 10, u(rng) * 10, u(rng) * 10);
    CHECK((t1.inverse().apply(t1.apply(p)) - p).norm() < 1e-9);
    CHECK(((t2 * t1).apply(p) - t2.apply(t1.apply(p))).norm() < 1e-9);
  }
}

TEST_CASE("invalid rotation is refused") {
  Mat3 r = Mat3::Identity();
  r(0, 0) = 2.0;
  CHECK_THROWS_AS(RigidTransform3D(r, Vec3::Zero()), std::invalid_argument);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;  // det = -1
  CHECK_THROWS_AS(RigidTransform3D(reflect, Vec3::Zero()), std::invalid_argument);
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(0.5) == doctest::Approx(0.5));
  CHECK(wrap_angle(-0.5) == doctest::Approx(-0.5));
  CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
}

TEST_CASE("ego pose map/vehicle round trip") {
  EgoPose ego{10.0, -4.0, 1.1, 0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p(u(rng), u(rng));
    CHECK((ego.to_vehicle(ego.to_map(p)) - p).norm() < 1e-9);
  }
}
