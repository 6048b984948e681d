#include "salign/flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "salign/rng.hpp"

namespace salign {
namespace flow {

namespace {

Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

Vec3 mat_tvec(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[3] * v[1] + m[6] * v[2],
          m[1] * v[0] + m[4] * v[1] + m[7] * v[2],
          m[2] * v[0] + m[5] * v[1] + m[8] * v[2]};
}

double round_half_up(double x) { return std::floor(x + 0.5); }

}  // namespace

void validate_pose(const CameraPose& pose) {
  const Mat3& r = pose.rotation;
  // R^T R == I
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[k * 3 + i] * r[k * 3 + j];
      const double expect = (i == j) ? 1.0 : 0.0;
      if (std::abs(s - expect) > 1e-9)
        throw std::invalid_argument("camera rotation is not orthonormal");
    }
  }
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  if (std::abs(det - 1.0) > 1e-9)
    throw std::invalid_argument("camera rotation must have determinant +1");
}

Vec3 apply_pose(const CameraPose& pose, const Vec3& p_world) {
  Vec3 p = mat_vec(pose.rotation, p_world);
  return {p[0] + pose.translation[0], p[1] + pose.translation[1], p[2] + pose.translation[2]};
}

Vec3 invert_pose(const CameraPose& pose, const Vec3& p_cam) {
  const Vec3 d{p_cam[0] - pose.translation[0], p_cam[1] - pose.translation[1],
               p_cam[2] - pose.translation[2]};
  return mat_tvec(pose.rotation, d);
}

std::vector<std::pair<double, double>> seed_grid(const GridSpec& g, int width, int height) {
  if (width < 2 || height < 2) throw DegenerateImage();
  if (g.rows < 1 || g.cols < 1) throw std::invalid_argument("grid must have >= 1 row and column");
  if (g.margin < 0.0 || g.margin >= 0.5) throw std::invalid_argument("margin must be in [0, 0.5)");

  const double lo_u = g.margin * (width - 1);
  const double hi_u = (1.0 - g.margin) * (width - 1);
  const double lo_v = g.margin * (height - 1);
  const double hi_v = (1.0 - g.margin) * (height - 1);

  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(g.rows) * g.cols);
  for (int r = 0; r < g.rows; ++r) {
    const double v = (g.rows == 1) ? 0.5 * (lo_v + hi_v)
                                   : lo_v + r * (hi_v - lo_v) / (g.rows - 1);
    for (int c = 0; c < g.cols; ++c) {
      const double u = (g.cols == 1) ? 0.5 * (lo_u + hi_u)
                                     : lo_u + c * (hi_u - lo_u) / (g.cols - 1);
      pts.emplace_back(round_half_up(u), round_half_up(v));
    }
  }
  return pts;
}

Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& K) {
  if (depth <= 0.0) throw NonPositiveDepth();
  return {(u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth};
}

Vec3 project(const Vec3& p, const CameraIntrinsics& K) {
  if (p[2] <= 1e-9) throw BehindCamera();
  return {K.fx * p[0] / p[2] + K.cx, K.fy * p[1] / p[2] + K.cy, p[2]};
}

Vec3 to_reference(const Vec3& p_cam_t, const CameraPose& pose_t, const CameraPose& pose_ref) {
  return apply_pose(pose_ref, invert_pose(pose_t, p_cam_t));
}

double depth_at(const DepthMap& map, double u, double v) {
  if (map.width < 1 || map.height < 1) throw OutOfBounds();
  if (u < 0.0 || v < 0.0 || u > map.width - 1 || v > map.height - 1) throw OutOfBounds();

  const int x0 = std::min(static_cast<int>(std::floor(u)), map.width - 1);
  const int y0 = std::min(static_cast<int>(std::floor(v)), map.height - 1);
  const int x1 = std::min(x0 + 1, map.width - 1);
  const int y1 = std::min(y0 + 1, map.height - 1);
  const double fu = u - x0;
  const double fv = v - y0;

  const double d00 = map.at(x0, y0);
  const double d10 = map.at(x1, y0);
  const double d01 = map.at(x0, y1);
  const double d11 = map.at(x1, y1);

  if (d00 > 0.0 && d10 > 0.0 && d01 > 0.0 && d11 > 0.0) {
    const double top = d00 + fu * (d10 - d00);
    const double bot = d01 + fu * (d11 - d01);
    return top + fv * (bot - top);
  }

  // Renormalize over the valid neighbors.
  const double w[4] = {(1.0 - fu) * (1.0 - fv), fu * (1.0 - fv), (1.0 - fu) * fv, fu * fv};
  const double d[4] = {d00, d10, d01, d11};
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (d[i] > 0.0) {
      num += w[i] * d[i];
      den += w[i];
    }
  }
  if (den <= 0.0) throw NoValidDepth();
  return num / den;
}

std::size_t select_reference(const std::vector<int>& visible_counts, double window_frac) {
  if (visible_counts.empty()) throw EmptyInput();
  if (window_frac <= 0.0 || window_frac > 1.0)
    throw std::invalid_argument("window_frac must be in (0, 1]");
  const std::size_t T = visible_counts.size();
  std::size_t window = static_cast<std::size_t>(
      std::ceil(window_frac * static_cast<double>(T)));
  window = std::clamp<std::size_t>(window, 1, T);

  std::size_t best = 0;
  for (std::size_t t = 1; t < window; ++t)
    if (visible_counts[t] > visible_counts[best]) best = t;
  return best;
}

namespace {

struct TrackFlow {
  std::vector<double> triples;        // T x 3
  std::vector<std::uint8_t> valid;    // T
  bool dropped = false;
};

std::optional<double> try_depth(const DepthMap& map, double u, double v) {
  try {
    return depth_at(map, u, v);
  } catch (const OutOfBounds&) {
    return std::nullopt;
  } catch (const NoValidDepth&) {
    return std::nullopt;
  }
}

TrackFlow track_flow(const Track2D& track, const std::vector<DepthMap>& depths,
                     const std::vector<CameraPose>& poses, const CameraIntrinsics& K,
                     std::size_t ref_idx) {
  const std::size_t T = poses.size();
  TrackFlow out;
  out.triples.assign(T * 3, 0.0);
  out.valid.assign(T, 0);

  for (std::size_t t = 0; t < T; ++t) {
    if (!track.visible[t]) continue;
    const auto d = try_depth(depths[t], track.u[t], track.v[t]);
    if (!d || *d <= 0.0) continue;
    const Vec3 p_ref = to_reference(unproject(track.u[t], track.v[t], *d, K), poses[t],
                                    poses[ref_idx]);
    if (p_ref[2] <= 1e-9) continue;  // behind the reference camera
    const Vec3 s = project(p_ref, K);
    out.triples[t * 3] = s[0];
    out.triples[t * 3 + 1] = s[1];
    out.triples[t * 3 + 2] = s[2];
    out.valid[t] = 1;
  }

  if (!out.valid[ref_idx]) {
    out.dropped = true;
    return out;
  }

  // Carry the last valid triple forward over gaps; frames before the first
  // valid one take the first valid triple. Validity flags stay cleared.
  std::size_t first_valid = 0;
  while (!out.valid[first_valid]) ++first_valid;
  for (std::size_t t = 0; t < first_valid; ++t)
    std::copy_n(out.triples.begin() + first_valid * 3, 3, out.triples.begin() + t * 3);
  for (std::size_t t = first_valid + 1; t < T; ++t)
    if (!out.valid[t]) std::copy_n(out.triples.begin() + (t - 1) * 3, 3, out.triples.begin() + t * 3);
  return out;
}

Flow3D assemble(std::vector<TrackFlow>& per_track, std::size_t T, std::size_t ref_idx) {
  Flow3D f;
  f.frames = static_cast<int>(T);
  f.ref_frame = static_cast<int>(ref_idx);
  for (std::size_t k = 0; k < per_track.size(); ++k) {
    if (per_track[k].dropped) {
      f.dropped.push_back(static_cast<int>(k));
      continue;
    }
    f.source_index.push_back(static_cast<int>(k));
    f.data.insert(f.data.end(), per_track[k].triples.begin(), per_track[k].triples.end());
    f.valid.insert(f.valid.end(), per_track[k].valid.begin(), per_track[k].valid.end());
  }
  f.keypoints = static_cast<int>(f.source_index.size());
  return f;
}

void check_inputs(const std::vector<Track2D>& tracks, const std::vector<DepthMap>& depths,
                  const std::vector<CameraPose>& poses, std::size_t ref_idx) {
  const std::size_t T = poses.size();
  if (depths.size() != T) throw LengthMismatch("depth maps vs poses");
  if (ref_idx >= T) throw std::out_of_range("reference frame index out of range");
  for (const auto& tr : tracks)
    if (tr.u.size() != T || tr.v.size() != T || tr.visible.size() != T)
      throw LengthMismatch("track length vs frame count");
  for (const auto& pose : poses) validate_pose(pose);
}

}  // namespace

Flow3D build_flow(const std::vector<Track2D>& tracks, const std::vector<DepthMap>& depths,
                  const std::vector<CameraPose>& poses, const CameraIntrinsics& K,
                  std::size_t ref_idx) {
  check_inputs(tracks, depths, poses, ref_idx);
  std::vector<TrackFlow> per_track(tracks.size());
  // Keypoints are independent and write disjoint slots.
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < static_cast<long long>(tracks.size()); ++k)
    per_track[static_cast<std::size_t>(k)] =
        track_flow(tracks[static_cast<std::size_t>(k)], depths, poses, K, ref_idx);
  return assemble(per_track, poses.size(), ref_idx);
}

namespace serial {
Flow3D build_flow(const std::vector<Track2D>& tracks, const std::vector<DepthMap>& depths,
                  const std::vector<CameraPose>& poses, const CameraIntrinsics& K,
                  std::size_t ref_idx) {
  check_inputs(tracks, depths, poses, ref_idx);
  std::vector<TrackFlow> per_track(tracks.size());
  for (std::size_t k = 0; k < tracks.size(); ++k)
    per_track[k] = track_flow(tracks[k], depths, poses, K, ref_idx);
  return assemble(per_track, poses.size(), ref_idx);
}
}  // namespace serial

// ---- synthetic scene ---------------------------------------------------------

namespace {

CameraPose look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 fwd{target[0] - eye[0], target[1] - eye[1], target[2] - eye[2]};
  const double fn = std::sqrt(fwd[0] * fwd[0] + fwd[1] * fwd[1] + fwd[2] * fwd[2]);
  const Vec3 f{fwd[0] / fn, fwd[1] / fn, fwd[2] / fn};
  const Vec3 up{0.0, 1.0, 0.0};
  // right = up x f, renormalized; assumes f is never parallel to up.
  Vec3 r{up[1] * f[2] - up[2] * f[1], up[2] * f[0] - up[0] * f[2], up[0] * f[1] - up[1] * f[0]};
  const double rn = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  r = {r[0] / rn, r[1] / rn, r[2] / rn};
  const Vec3 u{f[1] * r[2] - f[2] * r[1], f[2] * r[0] - f[0] * r[2], f[0] * r[1] - f[1] * r[0]};

  CameraPose pose;
  pose.rotation = {r[0], r[1], r[2], u[0], u[1], u[2], f[0], f[1], f[2]};
  const Vec3 rc = mat_vec(pose.rotation, eye);
  pose.translation = {-rc[0], -rc[1], -rc[2]};
  return pose;
}

CameraPose path_pose(const SceneSpec& spec, int t) {
  switch (spec.path) {
    case CameraPathKind::Static:
      return CameraPose{{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}};
    case CameraPathKind::Linear: {
      // Identity orientation, position drifting off the origin.
      const Vec3 c{spec.camera_step * t, 0.5 * spec.camera_step * t, -0.75 * spec.camera_step * t};
      return CameraPose{{1, 0, 0, 0, 1, 0, 0, 0, 1}, {-c[0], -c[1], -c[2]}};
    }
    case CameraPathKind::Orbit: {
      const Vec3 center{0.0, 0.0, 0.5 * (spec.depth_near + spec.depth_far)};
      const double phi = (spec.frames > 1)
                             ? (static_cast<double>(t) / (spec.frames - 1) - 0.5) * spec.orbit_arc
                             : 0.0;
      const Vec3 eye{center[0] + spec.orbit_radius * std::sin(phi), center[1],
                     center[2] - spec.orbit_radius * std::cos(phi)};
      return look_at(eye, center);
    }
  }
  return CameraPose{{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}};
}

// Stamp a small constant-depth patch around the projection; nearer points win
// overlaps so occlusion behaves like a z-buffer.
void stamp_patch(DepthMap& map, double u, double v, double z) {
  const int cu = static_cast<int>(round_half_up(u));
  const int cv = static_cast<int>(round_half_up(v));
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const int x = cu + dx;
      const int y = cv + dy;
      if (x < 0 || y < 0 || x >= map.width || y >= map.height) continue;
      double& cell = map.at(x, y);
      if (cell == 0.0 || z < cell) cell = z;
    }
  }
}

// True when every bilinear neighbor of (u, v) holds exactly z, i.e. the
// sampled depth will reproduce z bit for bit.
bool patch_owned(const DepthMap& map, double u, double v, double z) {
  const int x0 = std::min(static_cast<int>(std::floor(u)), map.width - 1);
  const int y0 = std::min(static_cast<int>(std::floor(v)), map.height - 1);
  const int x1 = std::min(x0 + 1, map.width - 1);
  const int y1 = std::min(y0 + 1, map.height - 1);
  return map.at(x0, y0) == z && map.at(x1, y0) == z && map.at(x0, y1) == z && map.at(x1, y1) == z;
}

}  // namespace

SyntheticScene synth_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.frames < 1) throw std::invalid_argument("scene needs at least 1 frame");
  const int n_points = spec.grid_rows * spec.grid_cols;
  const int T = spec.frames;

  SyntheticScene scene;
  scene.K = spec.K;
  scene.width = spec.width;
  scene.height = spec.height;

  std::vector<CameraPose> poses;
  poses.reserve(T);
  for (int t = 0; t < T; ++t) poses.push_back(path_pose(spec, t));

  // World points: the t=0 grid unprojected through the t=0 camera at a
  // seeded depth, so frame 0 reproduces the grid exactly.
  Rng rng(seed);
  const auto grid = seed_grid({spec.grid_rows, spec.grid_cols, 0.1}, spec.width, spec.height);
  std::vector<Vec3> starts, velocities;
  for (int i = 0; i < n_points; ++i) {
    const double depth = rng.uniform(spec.depth_near, spec.depth_far);
    const Vec3 p_cam0 = unproject(grid[i].first, grid[i].second, depth, spec.K);
    starts.push_back(invert_pose(poses[0], p_cam0));
    if (spec.motion == MotionModel::ConstantVelocity) {
      Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
      const double n = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
      velocities.push_back({spec.velocity_scale * dir[0] / n, spec.velocity_scale * dir[1] / n,
                            spec.velocity_scale * dir[2] / n});
    } else {
      velocities.push_back({0.0, 0.0, 0.0});
    }
  }

  // Analytic tracks; points behind any camera at t=0 are excluded outright.
  std::vector<Track2D> tracks(n_points);
  for (auto& tr : tracks) {
    tr.u.assign(T, 0.0);
    tr.v.assign(T, 0.0);
    tr.visible.assign(T, 0);
  }
  std::vector<bool> keep(n_points, true);
  for (int i = 0; i < n_points; ++i) {
    for (int t = 0; t < T; ++t) {
      const Vec3 p_w{starts[i][0] + t * velocities[i][0], starts[i][1] + t * velocities[i][1],
                     starts[i][2] + t * velocities[i][2]};
      const Vec3 p_cam = apply_pose(poses[t], p_w);
      if (p_cam[2] <= 1e-6) {
        if (t == 0) keep[i] = false;
        continue;
      }
      const Vec3 s = project(p_cam, spec.K);
      if (s[0] < 0.0 || s[1] < 0.0 || s[0] > spec.width - 1 || s[1] > spec.height - 1) continue;
      tracks[i].u[t] = s[0];
      tracks[i].v[t] = s[1];
      tracks[i].visible[t] = 1;
    }
  }

  // Depth maps: exact per-point patches with z-buffer overlap resolution.
  scene.depths.assign(T, DepthMap{});
  for (int t = 0; t < T; ++t) {
    DepthMap& map = scene.depths[t];
    map.width = spec.width;
    map.height = spec.height;
    map.values.assign(static_cast<std::size_t>(spec.width) * spec.height, 0.0);
    for (int i = 0; i < n_points; ++i) {
      if (!keep[i] || !tracks[i].visible[t]) continue;
      const Vec3 p_w{starts[i][0] + t * velocities[i][0], starts[i][1] + t * velocities[i][1],
                     starts[i][2] + t * velocities[i][2]};
      const Vec3 p_cam = apply_pose(poses[t], p_w);
      stamp_patch(map, tracks[i].u[t], tracks[i].v[t], p_cam[2]);
    }
    // Occluded points lose their sampling patch; clear their visibility.
    for (int i = 0; i < n_points; ++i) {
      if (!keep[i] || !tracks[i].visible[t]) continue;
      const Vec3 p_w{starts[i][0] + t * velocities[i][0], starts[i][1] + t * velocities[i][1],
                     starts[i][2] + t * velocities[i][2]};
      const Vec3 p_cam = apply_pose(poses[t], p_w);
      if (!patch_owned(map, tracks[i].u[t], tracks[i].v[t], p_cam[2])) tracks[i].visible[t] = 0;
    }
  }

  for (int i = 0; i < n_points; ++i) {
    if (!keep[i]) {
      scene.excluded.push_back(i);
      continue;
    }
    scene.tracks.push_back(std::move(tracks[i]));
    scene.world_start.push_back(starts[i]);
    scene.world_velocity.push_back(velocities[i]);
  }
  scene.poses = std::move(poses);
  return scene;
}

}  // namespace flow
}  // namespace salign
