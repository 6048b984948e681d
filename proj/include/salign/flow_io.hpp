#ifndef SALIGN_FLOW_IO_HPP
#define SALIGN_FLOW_IO_HPP

#include <filesystem>
#include <string>

#include "salign/flow.hpp"

namespace salign {
namespace flow {

// Everything build_flow consumes, as read from a bundle on disk.
struct FlowBundle {
  std::vector<Track2D> tracks;
  std::vector<DepthMap> depths;
  std::vector<CameraPose> poses;
  CameraIntrinsics K{};
  int width = 0, height = 0;
};

// Bundle layout: a JSON manifest naming one flat-binary depth file per frame
// (two little-endian uint32 dims, then row-major float32 meters), pose
// records as 12 reals (row-major R then t, world-to-camera), intrinsics as
// 4 reals, and per-track u/v/visible arrays.
std::filesystem::path write_bundle(const std::filesystem::path& dir, const FlowBundle& bundle);
FlowBundle read_bundle(const std::filesystem::path& manifest_path);

// Flow output: a JSON metadata file (convention tag, shapes, validity) next
// to a float64 little-endian payload in (keypoint, frame, component) order.
std::filesystem::path write_flow(const std::filesystem::path& dir, const Flow3D& flow);
Flow3D read_flow(const std::filesystem::path& meta_path);

}  // namespace flow
}  // namespace salign

#endif  // SALIGN_FLOW_IO_HPP
