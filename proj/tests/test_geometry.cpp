#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "panfuse/geometry.hpp"
#include "panfuse/rng.hpp"
#include "panfuse/synthetic.hpp"

using namespace panfuse;

namespace {

CameraView simple_view(int id, int w, int h, double fx, double fy, double cx, double cy,
                       const Mat4& pose = Mat4::Identity()) {
  Mat3 k = Mat3::Identity();
  k(0, 0) = fx;
  k(1, 1) = fy;
  k(0, 2) = cx;
  k(1, 2) = cy;
  return CameraView::create(id, w, h, k, pose);
}

Mat4 translation(double x, double y, double z) {
  Mat4 pose = Mat4::Identity();
  pose(0, 3) = x;
  pose(1, 3) = y;
  pose(2, 3) = z;
  return pose;
}

}  // namespace

TEST_CASE("pixel_to_world follows the optical axis at the principal point") {
  const CameraView view = simple_view(0, 8, 8, 100, 100, 2, 2);
  const Vec3 p = pixel_to_world(view, {2, 2}, 3.0);
  CHECK(p.isApprox(Vec3(0, 0, 3), 1e-12));
}

TEST_CASE("pixel_to_world scales the normalized ray by depth") {
  const CameraView view = simple_view(0, 8, 8, 1, 1, 0, 0);
  const Vec3 p = pixel_to_world(view, {1, 1}, 2.0);
  CHECK(p.isApprox(Vec3(2, 2, 2), 1e-12));
}

TEST_CASE("pixel_to_world applies the camera pose") {
  const CameraView view = simple_view(0, 8, 8, 1, 1, 0, 0, translation(1, 0, 0));
  const Vec3 p = pixel_to_world(view, {1, 1}, 2.0);
  CHECK(p.isApprox(Vec3(3, 2, 2), 1e-12));
}

TEST_CASE("pixel_to_world rejects bad depth") {
  const CameraView view = simple_view(0, 8, 8, 100, 100, 2, 2);
  CHECK_THROWS_AS(pixel_to_world(view, {2, 2}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pixel_to_world(view, {2, 2}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(pixel_to_world(view, {2, 2}, std::nan("")), std::invalid_argument);
}

TEST_CASE("world_to_pixel inverts the principal-point lift") {
  const CameraView view = simple_view(0, 8, 8, 100, 100, 2, 2);
  const auto proj = world_to_pixel(view, Vec3(0, 0, 3));
  REQUIRE(proj.has_value());
  CHECK(proj->px.u == doctest::Approx(2).epsilon(1e-12));
  CHECK(proj->px.v == doctest::Approx(2).epsilon(1e-12));
  CHECK(proj->z_ref == doctest::Approx(3).epsilon(1e-12));
}

TEST_CASE("world_to_pixel reports points behind the camera") {
  const CameraView view = simple_view(0, 8, 8, 100, 100, 2, 2);
  CHECK_FALSE(world_to_pixel(view, Vec3(0, 0, -1)).has_value());
  CHECK_FALSE(world_to_pixel(view, Vec3(0, 0, 0)).has_value());
}

TEST_CASE("projection round trip is the identity for random in-frustum samples") {
  Rng rng(42);
  const Mat4 pose = [] {
    // Arbitrary rigid pose: rotation about a skew axis plus translation.
    Mat4 p = Mat4::Identity();
    const Vec3 axis = Vec3(1, 2, 3).normalized();
    p.block<3, 3>(0, 0) = Eigen::AngleAxisd(0.7, axis).toRotationMatrix();
    p.block<3, 1>(0, 3) = Vec3(0.4, -0.2, 1.1);
    return p;
  }();
  const CameraView view = simple_view(3, 640, 480, 500, 480, 320, 240, pose);
  for (int i = 0; i < 1000; ++i) {
    const PixelCoord px{rng.uniform(0.0, 639.0), rng.uniform(0.0, 479.0)};
    const double depth = rng.uniform(0.1, 10.0);
    const Vec3 world = pixel_to_world(view, px, depth);
    const auto proj = world_to_pixel(view, world);
    REQUIRE(proj.has_value());
    CHECK(std::abs(proj->px.u - px.u) < 1e-9);
    CHECK(std::abs(proj->px.v - px.v) < 1e-9);
    CHECK(std::abs(proj->z_ref - depth) < 1e-9);
  }
}

TEST_CASE("warp between identical views is the identity") {
  const CameraView view = simple_view(0, 32, 24, 50, 50, 15.5, 11.5);
  const DepthMap depth = DepthMap::constant(32, 24, 4.0f);
  for (int v = 0; v < 24; v += 3) {
    for (int u = 0; u < 32; u += 3) {
      const WarpResult r = warp_pixel(view, depth, {double(u), double(v)}, view, depth, 0.05);
      REQUIRE(r.status == WarpStatus::ok);
      CHECK(r.u == u);
      CHECK(r.v == v);
    }
  }
}

TEST_CASE("warp shifts by the closed-form disparity on a fronto-parallel plane") {
  const CameraView src = simple_view(0, 64, 48, 100, 100, 32, 24);
  const CameraView dst = simple_view(1, 64, 48, 100, 100, 32, 24, translation(0.5, 0, 0));
  // Plane at z = 5 seen by both cameras; disparity = fx * tx / z = 10 px.
  const DepthMap depth = DepthMap::constant(64, 48, 5.0f);
  for (int u = 12; u < 60; u += 7) {
    const WarpResult r = warp_pixel(src, depth, {double(u), 20.0}, dst, depth, 0.05);
    REQUIRE(r.status == WarpStatus::ok);
    CHECK(r.u == u - 10);
    CHECK(r.v == 20);
  }
}

TEST_CASE("warp reports occlusion when a nearer surface hides the source point") {
  // Two-plane scene: a wide slab hides part of the far wall from the second
  // camera but not from the first.
  SceneSpec spec;
  spec.trajectory = TrajectoryKind::corridor;
  spec.view_count = 2;
  spec.width = 64;
  spec.height = 48;
  spec.room_half_extents = Vec3(4.0, 4.0, 2.0);
  spec.corridor_start = Vec3(0.0, -3.0, 0.0);
  spec.corridor_end = Vec3(2.2, -3.0, 0.0);
  Primitive slab;
  slab.kind = ShapeKind::box;
  slab.center = Vec3(1.5, 0.0, 0.0);
  slab.half_extents = Vec3(0.8, 0.2, 0.8);
  slab.sem_class = 2;
  slab.instance_id = 0;
  spec.primitives.push_back(slab);
  validate_scene(spec);

  const CameraView cam0 = camera_for_view(spec, 0);
  const CameraView cam1 = camera_for_view(spec, 1);
  const RenderedView v0 = render_gt(spec, 0);
  const RenderedView v1 = render_gt(spec, 1);

  // A far-wall pixel in view 0 that the slab covers in view 1.
  bool found_occluded = false;
  for (int v = 20; v < 28 && !found_occluded; ++v) {
    for (int u = 0; u < 64 && !found_occluded; ++u) {
      if (v0.sem.at(u, v) != spec.wall_class) continue;
      const WarpResult r = warp_pixel(cam0, v0.depth, {double(u), double(v)}, cam1, v1.depth, 0.02);
      if (r.status == WarpStatus::occluded) found_occluded = true;
    }
  }
  CHECK(found_occluded);
}

TEST_CASE("warp composition is within one pixel of the direct warp") {
  SceneSpec spec = make_orbit_scene(5, 12, 80, 60, 4);
  const CameraView a = camera_for_view(spec, 0);
  const CameraView b = camera_for_view(spec, 1);
  const CameraView c = camera_for_view(spec, 2);
  const RenderedView ra = render_gt(spec, 0);
  const RenderedView rb = render_gt(spec, 1);
  const RenderedView rc = render_gt(spec, 2);

  int checked = 0;
  for (int v = 0; v < 60; v += 2) {
    for (int u = 0; u < 80; u += 2) {
      const WarpResult ab = warp_pixel(a, ra.depth, {double(u), double(v)}, b, rb.depth, 0.05);
      if (ab.status != WarpStatus::ok) continue;
      const WarpResult bc =
          warp_pixel(b, rb.depth, {double(ab.u), double(ab.v)}, c, rc.depth, 0.05);
      const WarpResult ac = warp_pixel(a, ra.depth, {double(u), double(v)}, c, rc.depth, 0.05);
      if (bc.status != WarpStatus::ok || ac.status != WarpStatus::ok) continue;
      CHECK(std::abs(bc.u - ac.u) <= 1);
      CHECK(std::abs(bc.v - ac.v) <= 1);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("camera validation rejects broken inputs") {
  Mat3 k = Mat3::Identity();
  k(0, 0) = 100;
  k(1, 1) = 100;
  k(0, 2) = 4;
  k(1, 2) = 4;
  CHECK_NOTHROW(CameraView::create(0, 8, 8, k, Mat4::Identity()));

  Mat3 bad_focal = k;
  bad_focal(0, 0) = -1;
  CHECK_THROWS_AS(CameraView::create(0, 8, 8, bad_focal, Mat4::Identity()),
                  std::invalid_argument);

  Mat3 bad_cx = k;
  bad_cx(0, 2) = 9;  // outside the image
  CHECK_THROWS_AS(CameraView::create(0, 8, 8, bad_cx, Mat4::Identity()), std::invalid_argument);

  Mat4 bad_rot = Mat4::Identity();
  bad_rot(0, 0) = 2.0;
  CHECK_THROWS_AS(CameraView::create(0, 8, 8, k, bad_rot), std::invalid_argument);
}

TEST_CASE("rounding snaps half-pixels upward on both axes") {
  CHECK(round_half_up(0.5) == 1);
  CHECK(round_half_up(1.49) == 1);
  CHECK(round_half_up(-0.5) == 0);
  CHECK(round_half_up(-0.51) == -1);
}
