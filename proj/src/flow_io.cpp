#include "salign/flow_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "bundle payloads are written as raw little-endian words");

namespace salign {
namespace flow {

using nlohmann::json;

namespace {

void write_depth_bin(const std::filesystem::path& path, const DepthMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::uint32_t w = static_cast<std::uint32_t>(map.width);
  const std::uint32_t h = static_cast<std::uint32_t>(map.height);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> row(map.values.size());
  for (std::size_t i = 0; i < map.values.size(); ++i) row[i] = static_cast<float>(map.values[i]);
  out.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

DepthMap read_depth_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || w == 0 || h == 0) throw std::runtime_error("bad depth header in " + path.string());
  std::vector<float> raw(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated depth data in " + path.string());
  DepthMap map;
  map.width = static_cast<int>(w);
  map.height = static_cast<int>(h);
  map.values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!std::isfinite(v) || v < 0.0)
      throw std::runtime_error("invalid depth value in " + path.string());
    map.values[i] = v;
  }
  return map;
}

}  // namespace

std::filesystem::path write_bundle(const std::filesystem::path& dir, const FlowBundle& bundle) {
  std::filesystem::create_directories(dir);
  json frames = json::array();
  char name[32];
  for (std::size_t t = 0; t < bundle.depths.size(); ++t) {
    std::snprintf(name, sizeof(name), "depth_%04zu.bin", t);
    write_depth_bin(dir / name, bundle.depths[t]);
    json pose = json::array();
    for (double r : bundle.poses[t].rotation) pose.push_back(r);
    for (double v : bundle.poses[t].translation) pose.push_back(v);
    frames.push_back({{"depth", name}, {"pose", pose}});
  }

  json tracks = json::array();
  for (const auto& tr : bundle.tracks) {
    json rec;
    rec["u"] = tr.u;
    rec["v"] = tr.v;
    rec["visible"] = json::array();
    for (auto f : tr.visible) rec["visible"].push_back(static_cast<int>(f));
    tracks.push_back(std::move(rec));
  }

  const json manifest = {
      {"format", "flow-bundle"},
      {"version", 1},
      {"pose_convention", "world_to_camera"},
      {"width", bundle.width},
      {"height", bundle.height},
      {"intrinsics", {bundle.K.fx, bundle.K.fy, bundle.K.cx, bundle.K.cy}},
      {"frames", frames},
      {"tracks", tracks},
  };
  const auto path = dir / "bundle.json";
  std::ofstream out(path);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return path;
}

FlowBundle read_bundle(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read " + manifest_path.string());
  json manifest;
  in >> manifest;
  if (manifest.value("format", "") != "flow-bundle")
    throw std::runtime_error("not a flow-bundle manifest: " + manifest_path.string());
  if (manifest.value("pose_convention", "") != "world_to_camera")
    throw std::runtime_error("unsupported pose convention");

  FlowBundle b;
  b.width = manifest.at("width").get<int>();
  b.height = manifest.at("height").get<int>();
  const auto K = manifest.at("intrinsics");
  b.K = {K.at(0).get<double>(), K.at(1).get<double>(), K.at(2).get<double>(),
         K.at(3).get<double>()};

  const auto dir = manifest_path.parent_path();
  for (const auto& fr : manifest.at("frames")) {
    b.depths.push_back(read_depth_bin(dir / fr.at("depth").get<std::string>()));
    const auto pose = fr.at("pose");
    if (pose.size() != 12) throw std::runtime_error("pose record needs 12 reals");
    CameraPose p;
    for (int i = 0; i < 9; ++i) p.rotation[i] = pose.at(i).get<double>();
    for (int i = 0; i < 3; ++i) p.translation[i] = pose.at(9 + i).get<double>();
    validate_pose(p);
    b.poses.push_back(p);
  }

  for (const auto& rec : manifest.at("tracks")) {
    Track2D tr;
    tr.u = rec.at("u").get<std::vector<double>>();
    tr.v = rec.at("v").get<std::vector<double>>();
    for (const auto& f : rec.at("visible")) tr.visible.push_back(f.get<int>() ? 1 : 0);
    b.tracks.push_back(std::move(tr));
  }
  return b;
}

std::filesystem::path write_flow(const std::filesystem::path& dir, const Flow3D& flow) {
  std::filesystem::create_directories(dir);
  const auto bin_path = dir / "flow.bin";
  {
    std::ofstream out(bin_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(flow.data.data()),
              static_cast<std::streamsize>(flow.data.size() * sizeof(double)));
    if (!out) throw std::runtime_error("cannot write " + bin_path.string());
  }

  json valid = json::array();
  for (int k = 0; k < flow.keypoints; ++k) {
    json row = json::array();
    for (int t = 0; t < flow.frames; ++t) row.push_back(flow.is_valid(k, t) ? 1 : 0);
    valid.push_back(std::move(row));
  }
  const json meta = {
      {"format", "flow3d"},
      {"version", 1},
      {"pose_convention", "world_to_camera"},
      {"order", "keypoint,frame,component"},
      {"components", {"x_pixels", "y_pixels", "z_meters"}},
      {"dtype", "float64_le"},
      {"keypoints", flow.keypoints},
      {"frames", flow.frames},
      {"ref_frame", flow.ref_frame},
      {"payload", "flow.bin"},
      {"source_index", flow.source_index},
      {"dropped", flow.dropped},
      {"valid", valid},
  };
  const auto meta_path = dir / "flow.json";
  std::ofstream out(meta_path);
  out << meta.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + meta_path.string());
  return meta_path;
}

Flow3D read_flow(const std::filesystem::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw std::runtime_error("cannot read " + meta_path.string());
  json meta;
  in >> meta;
  if (meta.value("format", "") != "flow3d")
    throw std::runtime_error("not a flow3d metadata file");

  Flow3D f;
  f.keypoints = meta.at("keypoints").get<int>();
  f.frames = meta.at("frames").get<int>();
  f.ref_frame = meta.at("ref_frame").get<int>();
  f.source_index = meta.at("source_index").get<std::vector<int>>();
  f.dropped = meta.at("dropped").get<std::vector<int>>();
  for (const auto& row : meta.at("valid"))
    for (const auto& v : row) f.valid.push_back(v.get<int>() ? 1 : 0);

  const auto bin_path = meta_path.parent_path() / meta.at("payload").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + bin_path.string());
  f.data.resize(static_cast<std::size_t>(f.keypoints) * f.frames * 3);
  bin.read(reinterpret_cast<char*>(f.data.data()),
           static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!bin) throw std::runtime_error("truncated flow payload " + bin_path.string());
  return f;
}

}  // namespace flow
}  // namespace salign
