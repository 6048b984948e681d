#ifndef SALIGN_FLOW_HPP
#define SALIGN_FLOW_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "salign/common.hpp"

namespace salign {
namespace flow {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

struct CameraIntrinsics {
  double fx, fy, cx, cy;  // pixels
};

// World-to-camera pose: p_cam = R * p_world + t. R must be a rotation.
struct CameraPose {
  Mat3 rotation;
  Vec3 translation;
};

void validate_pose(const CameraPose& pose);  // R^T R = I, det R = +1 (1e-9)

Vec3 apply_pose(const CameraPose& pose, const Vec3& p_world);
Vec3 invert_pose(const CameraPose& pose, const Vec3& p_cam);

// Depth in meters; 0 marks an invalid pixel.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<double> values;  // row-major height x width

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct Track2D {
  std::vector<double> u, v;          // subpixel coordinates, length T
  std::vector<std::uint8_t> visible;  // length T
};

// Screen-aligned (x, y, z) per keypoint per frame in the reference camera:
// x, y are reference-image pixels, z is reference-camera depth.
struct Flow3D {
  int keypoints = 0, frames = 0, ref_frame = 0;
  std::vector<double> data;            // (keypoint, frame, component)
  std::vector<std::uint8_t> valid;     // (keypoint, frame)
  std::vector<int> source_index;       // original track index per kept keypoint
  std::vector<int> dropped;            // tracks with no valid depth at the reference frame

  double x(int k, int t) const { return data[(static_cast<std::size_t>(k) * frames + t) * 3]; }
  double y(int k, int t) const { return data[(static_cast<std::size_t>(k) * frames + t) * 3 + 1]; }
  double z(int k, int t) const { return data[(static_cast<std::size_t>(k) * frames + t) * 3 + 2]; }
  bool is_valid(int k, int t) const {
    return valid[static_cast<std::size_t>(k) * frames + t] != 0;
  }
};

struct GridSpec {
  int rows = 20, cols = 20;
  double margin = 0.0;  // fraction of the image border excluded, [0, 0.5)
};

// rows x cols points over the margin-inset rectangle, row-major, coordinates
// rounded half-up to integers.
std::vector<std::pair<double, double>> seed_grid(const GridSpec& g, int width, int height);

// ((u-cx)/fx * depth, (v-cy)/fy * depth, depth)
Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& K);

// (fx*x/z + cx, fy*y/z + cy, z); throws BehindCamera for z <= 1e-9.
Vec3 project(const Vec3& p_cam, const CameraIntrinsics& K);

// Camera-t coordinates -> world -> reference-camera coordinates.
Vec3 to_reference(const Vec3& p_cam_t, const CameraPose& pose_t, const CameraPose& pose_ref);

// Bilinear depth at a subpixel location; neighbors holding the invalid
// sentinel are excluded by renormalizing the weights.
double depth_at(const DepthMap& map, double u, double v);

// Frame with the highest visible count within the first ceil(window_frac*T)
// frames; earliest index wins ties.
std::size_t select_reference(const std::vector<int>& visible_counts, double window_frac = 0.1);

Flow3D build_flow(const std::vector<Track2D>& tracks, const std::vector<DepthMap>& depths,
                  const std::vector<CameraPose>& poses, const CameraIntrinsics& K,
                  std::size_t ref_idx);

namespace serial {
Flow3D build_flow(const std::vector<Track2D>& tracks, const std::vector<DepthMap>& depths,
                  const std::vector<CameraPose>& poses, const CameraIntrinsics& K,
                  std::size_t ref_idx);
}

// ---- synthetic scene oracle -------------------------------------------------

enum class MotionModel { Static, ConstantVelocity };
enum class CameraPathKind { Static, Linear, Orbit };

struct SceneSpec {
  int grid_rows = 20, grid_cols = 20;  // keypoints = rows * cols
  int frames = 60;
  int width = 320, height = 240;
  CameraIntrinsics K{260.0, 260.0, 160.0, 120.0};
  MotionModel motion = MotionModel::Static;
  CameraPathKind path = CameraPathKind::Static;
  double depth_near = 2.0, depth_far = 3.0;  // world point depth range at t=0
  double velocity_scale = 0.002;             // meters per frame for ConstantVelocity
  double camera_step = 0.004;                // meters per frame for Linear
  double orbit_radius = 2.5, orbit_arc = 0.20;  // radians swept over the clip
};

struct SyntheticScene {
  std::vector<Track2D> tracks;
  std::vector<DepthMap> depths;
  std::vector<CameraPose> poses;
  CameraIntrinsics K;
  std::vector<Vec3> world_start;     // ground-truth position at t=0
  std::vector<Vec3> world_velocity;  // ground-truth per-frame displacement
  std::vector<int> excluded;         // points behind the camera at generation
  int width = 0, height = 0;
};

// Analytic tracks and exact depth patches rendered from ground-truth
// geometry; deterministic for a given seed.
SyntheticScene synth_scene(const SceneSpec& spec, std::uint64_t seed);

}  // namespace flow
}  // namespace salign

#endif  // SALIGN_FLOW_HPP
