#include "panfuse/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace panfuse {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("CameraView: " + what);
}

}  // namespace

CameraView CameraView::create(int view_id, int width, int height, const Mat3& k,
                              const Mat4& cam_to_world) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  const double fx = k(0, 0), fy = k(1, 1), cx = k(0, 2), cy = k(1, 2);
  require(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
  require(cx >= 0.0 && cx < width, "cx outside image");
  require(cy >= 0.0 && cy < height, "cy outside image");
  require(k(0, 1) == 0.0 && k(1, 0) == 0.0 && k(2, 0) == 0.0 && k(2, 1) == 0.0 && k(2, 2) == 1.0,
          "intrinsics must be an upper-triangular pinhole matrix with zero skew");

  const Mat3 r = cam_to_world.block<3, 3>(0, 0);
  require((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9,
          "rotation block is not orthonormal");
  require(r.determinant() > 0.0, "rotation block must have det +1");
  require(cam_to_world(3, 0) == 0.0 && cam_to_world(3, 1) == 0.0 && cam_to_world(3, 2) == 0.0 &&
              cam_to_world(3, 3) == 1.0,
          "pose must be a rigid homogeneous transform");

  CameraView view;
  view.view_id = view_id;
  view.width = width;
  view.height = height;
  view.k_matrix = k;
  view.cam_to_world = cam_to_world;
  // Rigid inverse: [R t]^-1 = [R^T  -R^T t].
  view.world_to_cam = Mat4::Identity();
  view.world_to_cam.block<3, 3>(0, 0) = r.transpose();
  view.world_to_cam.block<3, 1>(0, 3) = -r.transpose() * cam_to_world.block<3, 1>(0, 3);
  require((view.cam_to_world * view.world_to_cam - Mat4::Identity()).cwiseAbs().maxCoeff() <= 1e-9,
          "pose inverse check failed");
  return view;
}

DepthMap DepthMap::constant(int width, int height, float depth) {
  DepthMap d;
  d.width = width;
  d.height = height;
  d.values.assign(static_cast<std::size_t>(width) * height, depth);
  return d;
}

Vec3 pixel_to_world(const CameraView& view, PixelCoord px, double depth) {
  if (!std::isfinite(depth) || depth <= 0.0)
    throw std::invalid_argument("pixel_to_world: depth must be finite and positive");
  const double fx = view.k_matrix(0, 0), fy = view.k_matrix(1, 1);
  const double cx = view.k_matrix(0, 2), cy = view.k_matrix(1, 2);
  // K^-1 [u v 1] has z component 1, so scaling by depth puts the point at
  // camera z == depth.
  const Vec3 p_cam((px.u - cx) / fx * depth, (px.v - cy) / fy * depth, depth);
  return view.cam_to_world.block<3, 3>(0, 0) * p_cam + view.cam_to_world.block<3, 1>(0, 3);
}

std::optional<PixelProjection> world_to_pixel(const CameraView& view, const Vec3& p) {
  const Vec3 p_ref =
      view.world_to_cam.block<3, 3>(0, 0) * p + view.world_to_cam.block<3, 1>(0, 3);
  if (p_ref.z() <= 0.0) return std::nullopt;
  const double fx = view.k_matrix(0, 0), fy = view.k_matrix(1, 1);
  const double cx = view.k_matrix(0, 2), cy = view.k_matrix(1, 2);
  PixelProjection proj;
  proj.px.u = fx * p_ref.x() / p_ref.z() + cx;
  proj.px.v = fy * p_ref.y() / p_ref.z() + cy;
  proj.z_ref = p_ref.z();
  return proj;
}

WarpResult warp_pixel(const CameraView& src, const DepthMap& src_depth, PixelCoord px,
                      const CameraView& dst, const DepthMap& dst_depth, double occlusion_tol) {
  const int su = static_cast<int>(round_half_up(px.u));
  const int sv = static_cast<int>(round_half_up(px.v));
  if (!src.contains(su, sv) || !src_depth.valid_at(su, sv))
    throw std::invalid_argument("warp_pixel: source pixel has no valid depth");

  const Vec3 p_world = pixel_to_world(src, px, src_depth.at(su, sv));
  const auto proj = world_to_pixel(dst, p_world);
  WarpResult result;
  if (!proj) return result;  // behind camera -> out_of_view

  const int du = static_cast<int>(round_half_up(proj->px.u));
  const int dv = static_cast<int>(round_half_up(proj->px.v));
  if (!dst.contains(du, dv)) return result;

  result.u = du;
  result.v = dv;
  result.z_ref = proj->z_ref;
  if (!dst_depth.valid_at(du, dv) ||
      std::abs(proj->z_ref - static_cast<double>(dst_depth.at(du, dv))) > occlusion_tol) {
    result.status = WarpStatus::occluded;
    return result;
  }
  result.status = WarpStatus::ok;
  return result;
}

}  // namespace panfuse
