#include "panfuse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "panfuse/parallel.hpp"
#include "panfuse/rng.hpp"

namespace panfuse {

std::set<std::uint16_t> SceneSpec::things_classes() const {
  std::set<std::uint16_t> things;
  for (const Primitive& p : primitives) things.insert(p.sem_class);
  return things;
}

namespace {

/// Support half-width of a primitive along a unit direction.
double support(const Primitive& prim, const Vec3& dir) {
  if (prim.kind == ShapeKind::sphere) return prim.half_extents.x();
  const double cy = std::cos(prim.yaw), sy = std::sin(prim.yaw);
  const Vec3 ax(cy, sy, 0.0), ay(-sy, cy, 0.0), az(0.0, 0.0, 1.0);
  return std::abs(dir.dot(ax)) * prim.half_extents.x() +
         std::abs(dir.dot(ay)) * prim.half_extents.y() +
         std::abs(dir.dot(az)) * prim.half_extents.z();
}

/// Lower bound on the gap between two primitives: the best separation found
/// along a handful of candidate axes.
double separation_gap(const Primitive& a, const Primitive& b) {
  std::vector<Vec3> axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  if ((b.center - a.center).norm() > 0.0) axes.push_back((b.center - a.center).normalized());
  for (const Primitive* p : {&a, &b}) {
    if (p->kind == ShapeKind::box) {
      const double cy = std::cos(p->yaw), sy = std::sin(p->yaw);
      axes.emplace_back(cy, sy, 0.0);
      axes.emplace_back(-sy, cy, 0.0);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec3& axis : axes) {
    const double gap =
        std::abs((b.center - a.center).dot(axis)) - support(a, axis) - support(b, axis);
    best = std::max(best, gap);
  }
  return best;
}

}  // namespace

void validate_scene(const SceneSpec& spec) {
  if (spec.view_count < 1 || spec.width < 1 || spec.height < 1)
    throw std::invalid_argument("scene: view count and image size must be positive");
  std::set<std::uint16_t> ids;
  for (const Primitive& p : spec.primitives) {
    if (!ids.insert(p.instance_id).second)
      throw std::invalid_argument("scene: duplicate instance id");
  }
  for (std::size_t i = 0; i < spec.primitives.size(); ++i)
    for (std::size_t j = i + 1; j < spec.primitives.size(); ++j)
      if (separation_gap(spec.primitives[i], spec.primitives[j]) < 0.01)
        throw std::invalid_argument("scene: primitives closer than 1 cm");
  for (int i = 0; i < spec.view_count; ++i) {
    const Vec3 eye = camera_for_view(spec, i).camera_center();
    if ((eye.cwiseAbs().array() >= spec.room_half_extents.array()).any())
      throw std::invalid_argument("scene: camera outside the room");
  }
}

namespace {

Mat4 look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 up(0.0, 0.0, 1.0);
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = Vec3(1.0, 0.0, 0.0);  // looking straight up/down
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat4 pose = Mat4::Identity();
  pose.block<3, 1>(0, 0) = right;
  pose.block<3, 1>(0, 1) = down;
  pose.block<3, 1>(0, 2) = forward;
  pose.block<3, 1>(0, 3) = eye;
  return pose;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  std::uint16_t sem = kUnknownLabel;
  std::uint16_t inst = kUnknownLabel;
};

/// Nearest positive intersection of o + t*d (d not normalized) with the
/// primitive surface; infinity when the ray misses.
double intersect_primitive(const Primitive& prim, const Vec3& o, const Vec3& d) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (prim.kind == ShapeKind::sphere) {
    const Vec3 oc = o - prim.center;
    const double a = d.squaredNorm();
    const double b = d.dot(oc);
    const double c = oc.squaredNorm() - prim.half_extents.x() * prim.half_extents.x();
    const double disc = b * b - a * c;
    if (disc < 0.0) return inf;
    const double sq = std::sqrt(disc);
    const double t0 = (-b - sq) / a;
    if (t0 > 0.0) return t0;
    const double t1 = (-b + sq) / a;
    return t1 > 0.0 ? t1 : inf;
  }
  // Box: slab test in the box frame.
  const double cy = std::cos(prim.yaw), sy = std::sin(prim.yaw);
  const Vec3 rel = o - prim.center;
  const Vec3 lo_o(cy * rel.x() + sy * rel.y(), -sy * rel.x() + cy * rel.y(), rel.z());
  const Vec3 lo_d(cy * d.x() + sy * d.y(), -sy * d.x() + cy * d.y(), d.z());
  double t_near = -inf, t_far = inf;
  for (int axis = 0; axis < 3; ++axis) {
    const double he = prim.half_extents[axis];
    if (lo_d[axis] == 0.0) {
      if (std::abs(lo_o[axis]) > he) return inf;
      continue;
    }
    double t0 = (-he - lo_o[axis]) / lo_d[axis];
    double t1 = (he - lo_o[axis]) / lo_d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return inf;
  }
  if (t_near > 0.0) return t_near;
  return t_far > 0.0 ? t_far : inf;
}

/// Exit point of a ray starting inside the room box; labels the face hit.
Hit intersect_room(const SceneSpec& spec, const Vec3& o, const Vec3& d) {
  Hit hit;
  double t_exit = std::numeric_limits<double>::infinity();
  int exit_axis = -1;
  int exit_sign = 0;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) continue;
    const double he = spec.room_half_extents[axis];
    const double bound = d[axis] > 0.0 ? he : -he;
    const double t = (bound - o[axis]) / d[axis];
    if (t < t_exit) {
      t_exit = t;
      exit_axis = axis;
      exit_sign = d[axis] > 0.0 ? 1 : -1;
    }
  }
  hit.t = t_exit;
  hit.sem = (exit_axis == 2 && exit_sign < 0) ? spec.floor_class : spec.wall_class;
  return hit;
}

}  // namespace

CameraView camera_for_view(const SceneSpec& spec, int view_index) {
  if (view_index < 0 || view_index >= spec.view_count)
    throw std::invalid_argument("camera_for_view: view index out of range");
  double fx = spec.fx;
  if (fx <= 0.0) fx = (spec.width / 2.0) / std::tan(std::numbers::pi / 6.0);  // 60 deg fov
  const double fy = spec.fy > 0.0 ? spec.fy : fx;
  Mat3 k = Mat3::Identity();
  k(0, 0) = fx;
  k(1, 1) = fy;
  k(0, 2) = (spec.width - 1) / 2.0;
  k(1, 2) = (spec.height - 1) / 2.0;

  Mat4 pose;
  if (spec.trajectory == TrajectoryKind::orbit) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(view_index) / spec.view_count;
    const Vec3 eye(spec.orbit_radius * std::cos(angle), spec.orbit_radius * std::sin(angle),
                   spec.orbit_height);
    pose = look_at(eye, spec.orbit_target);
  } else {
    const double s =
        spec.view_count == 1
            ? 0.0
            : static_cast<double>(view_index) / static_cast<double>(spec.view_count - 1);
    const Vec3 eye = spec.corridor_start + s * (spec.corridor_end - spec.corridor_start);
    pose = look_at(eye, eye + Vec3(0.0, 1.0, 0.0));
  }
  return CameraView::create(view_index, spec.width, spec.height, k, pose);
}

RenderedView render_gt(const SceneSpec& spec, int view_index, int threads) {
  const CameraView view = camera_for_view(spec, view_index);
  RenderedView out;
  out.depth.width = spec.width;
  out.depth.height = spec.height;
  out.depth.values.assign(static_cast<std::size_t>(spec.width) * spec.height, 0.0f);
  out.sem = LabelRaster::filled(spec.width, spec.height, RasterKind::semantic);
  out.inst = LabelRaster::filled(spec.width, spec.height, RasterKind::instance);

  const Vec3 origin = view.camera_center();
  const Mat3 rot = view.cam_to_world.block<3, 3>(0, 0);
  const double fx = view.k_matrix(0, 0), fy = view.k_matrix(1, 1);
  const double cx = view.k_matrix(0, 2), cy = view.k_matrix(1, 2);

  parallel_chunks(spec.height, 8, threads, [&](std::size_t, std::size_t vb, std::size_t ve) {
    for (std::size_t v = vb; v < ve; ++v) {
      for (int u = 0; u < spec.width; ++u) {
        // Camera-frame direction with z = 1, so the hit parameter is the
        // camera-frame depth directly.
        const Vec3 dir = rot * Vec3((u - cx) / fx, (v - cy) / fy, 1.0);
        Hit hit = intersect_room(spec, origin, dir);
        for (const Primitive& prim : spec.primitives) {
          const double t = intersect_primitive(prim, origin, dir);
          if (t < hit.t) hit = Hit{t, prim.sem_class, prim.instance_id};
        }
        out.depth.at(u, static_cast<int>(v)) = static_cast<float>(hit.t);
        out.sem.at(u, static_cast<int>(v)) = hit.sem;
        out.inst.at(u, static_cast<int>(v)) = hit.inst;
      }
    }
  });
  return out;
}

double primitive_sdf(const Primitive& prim, const Vec3& p) {
  if (prim.kind == ShapeKind::sphere)
    return (p - prim.center).norm() - prim.half_extents.x();
  const double cy = std::cos(prim.yaw), sy = std::sin(prim.yaw);
  const Vec3 rel = p - prim.center;
  const Vec3 local(cy * rel.x() + sy * rel.y(), -sy * rel.x() + cy * rel.y(), rel.z());
  const Vec3 q = local.cwiseAbs() - prim.half_extents;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

namespace {

/// Connected components (4-connectivity) of equal (sem, inst) pairs, ids in
/// raster-scan order of the first pixel. Unknown-unknown pixels form
/// segments too so the noise model can act on them uniformly.
std::vector<std::int32_t> pair_segments(const LabelRaster& sem, const LabelRaster& inst,
                                        std::int32_t& count) {
  const int w = sem.width, h = sem.height;
  std::vector<std::int32_t> seg(static_cast<std::size_t>(w) * h, -1);
  count = 0;
  std::vector<std::size_t> stack;
  static constexpr int du[] = {1, -1, 0, 0};
  static constexpr int dv[] = {0, 0, 1, -1};
  for (std::size_t start = 0; start < seg.size(); ++start) {
    if (seg[start] != -1) continue;
    const std::int32_t id = count++;
    seg[start] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int u = static_cast<int>(idx % w), v = static_cast<int>(idx / w);
      for (int d = 0; d < 4; ++d) {
        const int nu = u + du[d], nv = v + dv[d];
        if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
        const std::size_t nidx = static_cast<std::size_t>(nv) * w + nu;
        if (seg[nidx] != -1) continue;
        if (sem.labels[nidx] != sem.labels[idx] || inst.labels[nidx] != inst.labels[idx])
          continue;
        seg[nidx] = id;
        stack.push_back(nidx);
      }
    }
  }
  return seg;
}

enum : std::uint64_t { kFlipStream = 1, kJitterStream = 2, kDropStream = 3, kPermStream = 4 };

void dilate_segment(std::vector<std::int32_t>& owner, const std::int32_t seg_id, int steps,
                    NoisyView& out, int w, int h) {
  // Multi-source BFS from the segment; claimed pixels copy the labels of
  // their nearest segment pixel.
  std::deque<std::pair<std::size_t, int>> queue;
  std::vector<std::size_t> source(owner.size(), SIZE_MAX);
  for (std::size_t i = 0; i < owner.size(); ++i)
    if (owner[i] == seg_id) {
      queue.emplace_back(i, 0);
      source[i] = i;
    }
  static constexpr int du[] = {1, -1, 0, 0};
  static constexpr int dv[] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [idx, dist] = queue.front();
    queue.pop_front();
    if (dist == steps) continue;
    const int u = static_cast<int>(idx % w), v = static_cast<int>(idx / w);
    for (int d = 0; d < 4; ++d) {
      const int nu = u + du[d], nv = v + dv[d];
      if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
      const std::size_t nidx = static_cast<std::size_t>(nv) * w + nu;
      if (source[nidx] != SIZE_MAX) continue;
      source[nidx] = source[idx];
      out.sem.labels[nidx] = out.sem.labels[source[idx]];
      out.inst.labels[nidx] = out.inst.labels[source[idx]];
      owner[nidx] = seg_id;
      queue.emplace_back(nidx, dist + 1);
    }
  }
}

void erode_segment(std::vector<std::int32_t>& owner, const std::int32_t seg_id, int steps,
                   NoisyView& out, int w, int h) {
  // BFS inward from non-segment pixels; eroded pixels copy their nearest
  // outside neighbor.
  std::deque<std::pair<std::size_t, int>> queue;
  std::vector<std::size_t> source(owner.size(), SIZE_MAX);
  for (std::size_t i = 0; i < owner.size(); ++i)
    if (owner[i] != seg_id) {
      queue.emplace_back(i, 0);
      source[i] = i;
    }
  static constexpr int du[] = {1, -1, 0, 0};
  static constexpr int dv[] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [idx, dist] = queue.front();
    queue.pop_front();
    if (dist == steps) continue;
    const int u = static_cast<int>(idx % w), v = static_cast<int>(idx / w);
    for (int d = 0; d < 4; ++d) {
      const int nu = u + du[d], nv = v + dv[d];
      if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
      const std::size_t nidx = static_cast<std::size_t>(nv) * w + nu;
      if (source[nidx] != SIZE_MAX) continue;
      source[nidx] = source[idx];
      out.sem.labels[nidx] = out.sem.labels[source[idx]];
      out.inst.labels[nidx] = out.inst.labels[source[idx]];
      owner[nidx] = owner[source[idx]];
      queue.emplace_back(nidx, dist + 1);
    }
  }
}

}  // namespace

NoisyView inject_noise(const LabelRaster& sem, const LabelRaster& inst, const NoiseSpec& spec,
                       int view_index) {
  if (!sem.same_shape(inst)) throw std::invalid_argument("inject_noise: dimension mismatch");
  NoisyView out{sem, inst};
  const int w = sem.width, h = sem.height;

  std::int32_t count = 0;
  std::vector<std::int32_t> segments = pair_segments(sem, inst, count);

  // Whole-segment semantic flips.
  std::vector<std::uint16_t> seg_sem(count, kUnknownLabel);
  for (std::size_t i = 0; i < segments.size(); ++i) seg_sem[segments[i]] = sem.labels[i];
  std::vector<std::uint16_t> flipped = seg_sem;
  for (std::int32_t s = 0; s < count && spec.num_classes >= 2; ++s) {
    if (seg_sem[s] == kUnknownLabel) continue;
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(view_index), s, kFlipStream));
    if (rng.uniform() < spec.flip_prob) {
      std::uint16_t other =
          static_cast<std::uint16_t>(rng.uniform_index(spec.num_classes - 1));
      if (other >= seg_sem[s]) ++other;
      flipped[s] = other;
    }
  }
  for (std::size_t i = 0; i < segments.size(); ++i) out.sem.labels[i] = flipped[segments[i]];

  // Per-view instance id permutation over the whole id space.
  if (spec.permute_instances) {
    std::vector<std::uint16_t> perm(spec.max_instances);
    for (std::uint16_t i = 0; i < spec.max_instances; ++i) perm[i] = i;
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(view_index), 0, kPermStream));
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    for (auto& label : out.inst.labels)
      if (label != kUnknownLabel && label < spec.max_instances) label = perm[label];
  }

  // Boundary jitter: each segment dilates or erodes by a few pixels, applied
  // sequentially in segment order.
  if (spec.boundary_jitter_px > 0) {
    std::vector<std::int32_t> owner = segments;
    for (std::int32_t s = 0; s < count; ++s) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(view_index), s, kJitterStream));
      const int amount = static_cast<int>(rng.uniform_index(2 * spec.boundary_jitter_px + 1)) -
                         spec.boundary_jitter_px;
      if (amount > 0)
        dilate_segment(owner, s, amount, out, w, h);
      else if (amount < 0)
        erode_segment(owner, s, -amount, out, w, h);
    }
  }

  // Whole-segment dropout, applied to the original segment supports.
  if (spec.dropout_prob > 0.0) {
    std::vector<bool> drop(count, false);
    for (std::int32_t s = 0; s < count; ++s) {
      if (seg_sem[s] == kUnknownLabel) continue;
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(view_index), s, kDropStream));
      drop[s] = rng.uniform() < spec.dropout_prob;
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (drop[segments[i]]) {
        out.sem.labels[i] = kUnknownLabel;
        out.inst.labels[i] = kUnknownLabel;
      }
    }
  }
  return out;
}

SceneSpec make_orbit_scene(std::uint64_t seed, int view_count, int width, int height,
                           int object_count) {
  SceneSpec spec;
  spec.seed = seed;
  spec.trajectory = TrajectoryKind::orbit;
  spec.view_count = view_count;
  spec.width = width;
  spec.height = height;
  spec.room_half_extents = Vec3(3.0, 3.0, 1.5);
  spec.orbit_radius = 2.2;
  spec.orbit_height = 0.4;
  spec.orbit_target = Vec3(0.0, 0.0, 0.1);

  Rng rng(mix_seed(seed, 0xabcdULL));
  for (int i = 0; i < object_count; ++i) {
    Primitive prim;
    const double angle = 2.0 * std::numbers::pi * i / object_count + rng.uniform(0.0, 0.15);
    const double radius = 0.9 + 0.15 * rng.uniform();
    prim.kind = (i % 3 == 2) ? ShapeKind::sphere : ShapeKind::box;
    prim.center = Vec3(radius * std::cos(angle), radius * std::sin(angle),
                       -0.2 + 0.5 * rng.uniform());
    if (prim.kind == ShapeKind::sphere) {
      prim.half_extents = Vec3::Constant(0.22 + 0.06 * rng.uniform());
    } else {
      prim.yaw = rng.uniform(0.0, std::numbers::pi / 2.0);
      prim.half_extents =
          Vec3(0.26 + 0.08 * rng.uniform(), 0.2 + 0.06 * rng.uniform(), 0.2 + 0.1 * rng.uniform());
    }
    prim.sem_class = static_cast<std::uint16_t>(2 + (i % 6));
    prim.instance_id = static_cast<std::uint16_t>(i);
    spec.primitives.push_back(prim);
  }
  validate_scene(spec);
  return spec;
}

SceneSpec make_corridor_scene(std::uint64_t seed, int view_count, int width, int height,
                              int object_count) {
  SceneSpec spec;
  spec.seed = seed;
  spec.trajectory = TrajectoryKind::corridor;
  spec.view_count = view_count;
  spec.width = width;
  spec.height = height;
  spec.room_half_extents = Vec3(5.0, 2.0, 1.2);
  spec.corridor_start = Vec3(-2.5, -1.2, 0.0);
  spec.corridor_end = Vec3(2.5, -1.2, 0.0);
  // Narrow horizontal field of view: each view sees only a short slice of
  // the long boxes; the vertical field stays wide enough to cover them all.
  spec.fx = width * 4.8;
  spec.fy = height * 0.85;

  Rng rng(mix_seed(seed, 0x51deULL));
  for (int i = 0; i < object_count; ++i) {
    Primitive prim;
    prim.kind = ShapeKind::box;
    const double z = -0.55 + 1.1 * static_cast<double>(i) / std::max(1, object_count - 1);
    prim.center = Vec3(rng.uniform(-0.2, 0.2), 1.2, z);
    prim.yaw = 0.0;
    prim.half_extents = Vec3(2.0, 0.15, 0.1);
    prim.sem_class = static_cast<std::uint16_t>(2 + (i % 6));
    prim.instance_id = static_cast<std::uint16_t>(i);
    spec.primitives.push_back(prim);
  }
  validate_scene(spec);
  return spec;
}

}  // namespace panfuse
