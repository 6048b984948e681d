// simplexalign: CLI over the sphere-geometry, alignment-energy, contrastive,
// toy-training, flow-geometry and scoring modules.
//
// Output protocol: line-delimited JSON records on stdout starting with a
// versioned header record; per-step traces as CSV files under --out. Every
// run writes <out>/manifest.json echoing the fully resolved configuration;
// re-running the same subcommand with --config <manifest> reproduces the
// outputs byte for byte.
//
// Exit status: 0 all declared thresholds pass, 1 threshold failure,
// 2 usage/parse/validation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "salign/contrastive.hpp"
#include "salign/flow_io.hpp"
#include "salign/gradcheck.hpp"
#include "salign/metrics.hpp"
#include "salign/toy.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace salign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;

// ---- small helpers -----------------------------------------------------------

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

energy::RegularizedPair parse_pair(const std::string& s) {
  if (s == "lf" || s == "language-flow") return energy::RegularizedPair::LanguageFlow;
  if (s == "li" || s == "language-image") return energy::RegularizedPair::LanguageImage;
  if (s == "if" || s == "image-flow") return energy::RegularizedPair::ImageFlow;
  throw CLI::ValidationError("--pair", "expected one of lf, li, if");
}

std::string pair_name(energy::RegularizedPair p) {
  switch (p) {
    case energy::RegularizedPair::LanguageFlow: return "lf";
    case energy::RegularizedPair::LanguageImage: return "li";
    case energy::RegularizedPair::ImageFlow: return "if";
  }
  return "lf";
}

Vec parse_vector(const std::string& text) {
  Vec v;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) {
    std::size_t pos = 0;
    double x;
    try {
      x = std::stod(token, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad vector component '" + token + "'");
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    if (pos != token.size()) throw std::invalid_argument("bad vector component '" + token + "'");
    v.push_back(x);
  }
  if (v.empty()) throw std::invalid_argument("empty vector");
  return v;
}

std::vector<Vec> read_vector_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<Vec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_vector(line));
  }
  return out;
}

// Records are mirrored to <out>/records.jsonl for machine consumption.
struct RecordSink {
  std::ofstream file;
  void open(const fs::path& dir) {
    file.open(dir / "records.jsonl");
  }
  void emit(const json& j) {
    const std::string line = j.dump();
    std::cout << line << "\n";
    if (file) file << line << "\n";
  }
};

void write_manifest(const fs::path& out_dir, const std::string& command, std::uint64_t seed,
                    const json& params) {
  const json manifest = {
      {"tool", "simplexalign"}, {"version", 1},    {"command", command},
      {"seed", seed},           {"params", params},
  };
  std::ofstream f(out_dir / "manifest.json");
  f << manifest.dump(2) << "\n";
  if (!f) throw std::runtime_error("cannot write manifest.json");
}

json load_config(const fs::path& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  json cfg;
  in >> cfg;
  if (cfg.contains("command") && cfg.at("command").get<std::string>() != command)
    throw std::runtime_error("config was written for command '" +
                             cfg.at("command").get<std::string>() + "', not '" + command + "'");
  return cfg.contains("params") ? cfg.at("params") : cfg;
}

// Pre-scan argv for an option value so configs load before CLI11 parses.
std::optional<std::string> scan_flag(int argc, char** argv, const std::string& name) {
  for (int i = 1; i + 1 < argc; ++i)
    if (argv[i] == name) return std::string(argv[i + 1]);
  return std::nullopt;
}

template <typename T>
void from_config(const json& cfg, const char* key, T& slot) {
  if (cfg.contains(key)) slot = cfg.at(key).get<T>();
}

json header(const std::string& format) {
  return {{"record", "header"}, {"tool", "simplexalign"}, {"format", format}, {"version", 1}};
}

// ---- eval ----------------------------------------------------------------------

struct EvalParams {
  std::vector<std::string> vecs;
  std::string file;
  double alpha = 1.0;
  double tau = 0.07;
  std::string pair = "lf";
  bool normalize = false;
};

int run_eval(const EvalParams& p, const fs::path& out, std::uint64_t seed, RecordSink& sink) {
  std::vector<Vec> raw;
  for (const auto& s : p.vecs) raw.push_back(parse_vector(s));
  if (!p.file.empty())
    for (auto& v : read_vector_file(p.file)) raw.push_back(std::move(v));
  if (raw.size() < 2) throw std::runtime_error("eval needs at least 2 vectors");

  std::vector<UnitEmbedding> pts;
  for (const auto& v : raw)
    pts.push_back(p.normalize ? sphere::normalize(v) : UnitEmbedding(v));

  write_manifest(out, "eval", seed,
                 {{"alpha", p.alpha},
                  {"tau", p.tau},
                  {"pair", p.pair},
                  {"normalize", p.normalize},
                  {"vectors", raw}});
  sink.emit(header("eval"));

  json rec = {{"record", "eval"}, {"count", pts.size()}, {"dim", pts[0].dim()}};
  rec["volume"] = sphere::simplex_volume(pts);
  if (pts.size() == 3) {
    const energy::EnergyParams ep{p.alpha, p.tau, parse_pair(p.pair)};
    const auto t = sphere::pairwise_cosines(pts[0], pts[1], pts[2]);
    rec["area"] = sphere::triangle_area(pts[0], pts[1], pts[2]);
    rec["energy"] = energy::energy(pts[0], pts[1], pts[2], ep);
    rec["cosines"] = {t.a, t.b, t.c};
  }
  sink.emit(rec);
  return kExitOk;
}

// ---- gradcheck -----------------------------------------------------------------

struct GradcheckParams {
  std::int64_t trials = 100;
  std::size_t dim = 8;
  std::size_t batch = 4;
  double alpha = 1.0;
  double tau = 0.07;
  double h = 1e-5;
  double tol = 1e-4;
};

int run_gradcheck(const GradcheckParams& p, const fs::path& out, std::uint64_t seed,
                  RecordSink& sink) {
  if (p.trials < 1) throw CLI::ValidationError("--trials", "must be >= 1");
  gradcheck::Options opt;
  opt.trials = p.trials;
  opt.dim = p.dim;
  opt.batch = p.batch;
  opt.seed = seed;
  opt.h = p.h;
  opt.params.alpha = p.alpha;
  opt.params.tau = p.tau;

  write_manifest(out, "gradcheck", seed,
                 {{"trials", p.trials},
                  {"dim", p.dim},
                  {"batch", p.batch},
                  {"alpha", p.alpha},
                  {"tau", p.tau},
                  {"h", p.h},
                  {"tol", p.tol}});
  sink.emit(header("gradcheck"));

  const auto rep = gradcheck::run(opt);
  const bool pass = rep.pass(p.tol);
  sink.emit({{"record", "gradcheck"},
             {"trials", rep.trials},
             {"worst_rel_error_area_grad", rep.worst_area},
             {"worst_rel_error_energy_grad", rep.worst_energy},
             {"worst_rel_error_loss_grad", rep.worst_loss},
             {"tolerance", p.tol},
             {"pass", pass}});
  return pass ? kExitOk : kExitThreshold;
}

// ---- demo ----------------------------------------------------------------------

struct DemoParams {
  std::string kind;  // ambiguity | conflict
  double theta0 = M_PI / 4.0;
  // NaN = unset; resolves to 0 for the ambiguity demo, 1 for conflict.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps = 6000;
  double lr = 2e-3;
  std::int64_t trials = 10000;
  double max_ratio = 0.1;
};

int run_demo(DemoParams p, const fs::path& out, std::uint64_t seed, RecordSink& sink) {
  if (std::isnan(p.alpha)) p.alpha = (p.kind == "conflict") ? 1.0 : 0.0;
  if (p.kind == "ambiguity") {
    write_manifest(out, "demo", seed,
                   {{"kind", p.kind},
                    {"theta0", p.theta0},
                    {"alpha", p.alpha},
                    {"steps", p.steps},
                    {"lr", p.lr}});
    sink.emit(header("demo-ambiguity"));

    const auto rep = toy::demo_ambiguity(p.theta0, p.alpha, p.steps, p.lr);
    {
      std::ofstream csv(out / "ambiguity_trace.csv");
      csv << "step,area,cos_xy,theta_equiv\n";
      for (const auto& r : rep.rows)
        csv << r.step << "," << fmt_double(r.area) << "," << fmt_double(r.cos_xy) << ","
            << fmt_double(r.theta_equiv) << "\n";
    }

    // Verdicts mirror the demo's documented behavior: with alpha = 0 the
    // area collapses while the (x, y) pair stays misaligned; with the
    // regularizer on (x, y) the pair realigns.
    bool pass = rep.final_area < 1e-4;
    if (p.alpha == 0.0)
      pass = pass && rep.final_cos_xy < -0.95;
    else
      pass = pass && rep.final_cos_xy > 0.9;
    sink.emit({{"record", "demo-ambiguity"},
               {"theta0", rep.theta0},
               {"alpha", rep.alpha},
               {"steps", p.steps},
               {"initial_area", rep.rows.front().area},
               {"final_area", rep.final_area},
               {"final_cos_xy", rep.final_cos_xy},
               {"trace", "ambiguity_trace.csv"},
               {"pass", pass}});
    return pass ? kExitOk : kExitThreshold;
  }

  if (p.kind == "conflict") {
    write_manifest(out, "demo", seed,
                   {{"kind", p.kind},
                    {"trials", p.trials},
                    {"alpha", p.alpha},
                    {"max_ratio", p.max_ratio}});
    sink.emit(header("demo-conflict"));

    const auto rep = toy::demo_conflict(seed, p.trials, p.alpha);
    const bool pass = rep.min_ratio < p.max_ratio && rep.max_decomp_residual < 1e-10 &&
                      rep.max_ascent_residual < 1e-12;
    sink.emit({{"record", "demo-conflict"},
               {"trials", rep.trials},
               {"skipped", rep.skipped},
               {"min_cancellation_ratio", rep.min_ratio},
               {"x", rep.x},
               {"y", rep.y},
               {"z", rep.z},
               {"cosine_pull_magnitude", rep.cosine_pull},
               {"max_decomposition_residual", rep.max_decomp_residual},
               {"max_ascent_identity_residual", rep.max_ascent_residual},
               {"max_ratio_threshold", p.max_ratio},
               {"pass", pass}});
    return pass ? kExitOk : kExitThreshold;
  }
  throw CLI::ValidationError("demo", "kind must be ambiguity or conflict");
}

// ---- train ---------------------------------------------------------------------

struct TrainParams {
  // data
  std::size_t count = 512;
  double noise = 0.05;
  std::size_t latent_dim = 8;
  std::size_t obs_l = 16, obs_i = 12, obs_f = 14;
  std::string data_file;
  std::string emit_data;
  // optimization
  std::size_t steps = 2000;
  std::size_t batch = 32;
  double lr = 1e-4;
  double wd = 1e-2;
  std::string optimizer = "adamw";
  std::string objective = "full";
  double alpha = 1.0;
  double tau = 0.07;
  std::string pair = "lf";
  std::size_t embed_dim = 16;
  std::size_t hidden = 64;
  std::size_t eval_every = 100;
  double lambda_tcn = 1.0;  // reserved; echoed but unused
  double lambda_act = 1.0;  // reserved; echoed but unused
  // evaluation thresholds (only checked when set)
  std::size_t retrieval_k = 64;
  double min_retrieval = -1.0;
  double max_spread = -1.0;
  double min_spread = -1.0;
};

json dataset_to_json(const toy::TripletDataset& d) {
  return {{"format", "toy-triplets"},
          {"version", 1},
          {"spec",
           {{"latent_dim", d.spec.latent_dim},
            {"obs_L", d.spec.obs_L},
            {"obs_I", d.spec.obs_I},
            {"obs_F", d.spec.obs_F},
            {"noise_std", d.spec.noise_std},
            {"count", d.spec.count},
            {"seed", d.spec.seed}}},
          {"obs_L", d.obs_L},
          {"obs_I_a", d.obs_I_a},
          {"obs_I_b", d.obs_I_b},
          {"obs_F", d.obs_F},
          {"latents", d.latents},
          {"map_L", d.map_L},
          {"map_Ia", d.map_Ia},
          {"map_Ib", d.map_Ib},
          {"map_F", d.map_F}};
}

toy::TripletDataset dataset_from_json(const json& j) {
  if (j.value("format", "") != "toy-triplets") throw std::runtime_error("not a toy-triplets file");
  toy::TripletDataset d;
  const auto& s = j.at("spec");
  d.spec.latent_dim = s.at("latent_dim").get<std::size_t>();
  d.spec.obs_L = s.at("obs_L").get<std::size_t>();
  d.spec.obs_I = s.at("obs_I").get<std::size_t>();
  d.spec.obs_F = s.at("obs_F").get<std::size_t>();
  d.spec.noise_std = s.at("noise_std").get<double>();
  d.spec.count = s.at("count").get<std::size_t>();
  d.spec.seed = s.at("seed").get<std::uint64_t>();
  d.obs_L = j.at("obs_L").get<std::vector<Vec>>();
  d.obs_I_a = j.at("obs_I_a").get<std::vector<Vec>>();
  d.obs_I_b = j.at("obs_I_b").get<std::vector<Vec>>();
  d.obs_F = j.at("obs_F").get<std::vector<Vec>>();
  d.latents = j.at("latents").get<std::vector<Vec>>();
  d.map_L = j.at("map_L").get<std::vector<Vec>>();
  d.map_Ia = j.at("map_Ia").get<std::vector<Vec>>();
  d.map_Ib = j.at("map_Ib").get<std::vector<Vec>>();
  d.map_F = j.at("map_F").get<std::vector<Vec>>();
  return d;
}

json encoder_to_json(const toy::ToyEncoder& e) {
  return {{"in_dim", e.in_dim}, {"hidden", e.hidden}, {"out_dim", e.out_dim},
          {"w1", e.w1},         {"b1", e.b1},         {"w2", e.w2},
          {"b2", e.b2}};
}

int run_train(const TrainParams& p, const fs::path& out, std::uint64_t seed, RecordSink& sink) {
  toy::TripletDataset data;
  if (!p.data_file.empty()) {
    std::ifstream in(p.data_file);
    if (!in) throw std::runtime_error("cannot read " + p.data_file);
    json j;
    in >> j;
    data = dataset_from_json(j);
  } else {
    toy::SyntheticTripletSpec spec;
    spec.count = p.count;
    spec.noise_std = p.noise;
    spec.latent_dim = p.latent_dim;
    spec.obs_L = p.obs_l;
    spec.obs_I = p.obs_i;
    spec.obs_F = p.obs_f;
    spec.seed = seed;
    data = toy::gen_triplets(spec);
  }
  if (!p.emit_data.empty()) {
    std::ofstream f(p.emit_data);
    f << dataset_to_json(data).dump() << "\n";
  }

  toy::TrainConfig cfg;
  cfg.learning_rate = p.lr;
  cfg.weight_decay = p.wd;
  cfg.batch_size = p.batch;
  cfg.steps = p.steps;
  cfg.optimizer = (p.optimizer == "sgd") ? toy::Optimizer::SGD : toy::Optimizer::AdamWStyle;
  if (p.optimizer != "sgd" && p.optimizer != "adamw")
    throw CLI::ValidationError("--optimizer", "expected adamw or sgd");
  cfg.objective =
      (p.objective == "volume") ? toy::Objective::VolumeOnlyDescent : toy::Objective::FullContrastive;
  if (p.objective != "volume" && p.objective != "full")
    throw CLI::ValidationError("--objective", "expected full or volume");
  cfg.energy.alpha = p.alpha;
  cfg.energy.tau = p.tau;
  cfg.energy.pair = parse_pair(p.pair);
  cfg.seed = seed;
  cfg.embed_dim = p.embed_dim;
  cfg.hidden_width = p.hidden;
  cfg.eval_every = p.eval_every;
  cfg.lambda_tcn = p.lambda_tcn;
  cfg.lambda_act = p.lambda_act;

  write_manifest(out, "train", seed,
                 {{"count", p.count},          {"noise", p.noise},
                  {"latent_dim", p.latent_dim}, {"obs_l", p.obs_l},
                  {"obs_i", p.obs_i},          {"obs_f", p.obs_f},
                  {"data_file", p.data_file},  {"steps", p.steps},
                  {"batch", p.batch},          {"lr", p.lr},
                  {"wd", p.wd},                {"optimizer", p.optimizer},
                  {"objective", p.objective},  {"alpha", p.alpha},
                  {"tau", p.tau},              {"pair", p.pair},
                  {"embed_dim", p.embed_dim},  {"hidden", p.hidden},
                  {"eval_every", p.eval_every}, {"lambda_tcn", p.lambda_tcn},
                  {"lambda_act", p.lambda_act}, {"retrieval_k", p.retrieval_k},
                  {"min_retrieval", p.min_retrieval}, {"max_spread", p.max_spread},
                  {"min_spread", p.min_spread},
                  {"collapse_threshold", cfg.collapse_threshold}});
  sink.emit(header("train"));

  const auto res = toy::train(cfg, data);

  {
    std::ofstream csv(out / "trace.csv");
    csv << "step,loss,mean_area,pair_cosine,batch_spread,full_spread\n";
    for (const auto& r : res.trace) {
      csv << r.step << "," << fmt_double(r.loss) << "," << fmt_double(r.mean_area) << ","
          << fmt_double(r.pair_cosine) << "," << fmt_double(r.batch_spread) << ",";
      if (!std::isnan(r.full_spread)) csv << fmt_double(r.full_spread);
      csv << "\n";
    }
  }
  {
    std::ofstream enc(out / "encoders.json");
    enc << json{{"format", "toy-encoders"},
                {"version", 1},
                {"embed_dim", cfg.embed_dim},
                {"lang", encoder_to_json(res.encoders.lang)},
                {"image", encoder_to_json(res.encoders.image)},
                {"flow", encoder_to_json(res.encoders.flow)}}
               .dump()
        << "\n";
  }

  double retrieval = std::numeric_limits<double>::quiet_NaN();
  if (p.retrieval_k >= 2 && p.retrieval_k <= data.size())
    retrieval = toy::retrieval_accuracy(res.encoders, data, p.retrieval_k, cfg.energy, seed);

  bool pass = true;
  if (p.min_retrieval >= 0.0) pass = pass && retrieval >= p.min_retrieval;
  if (p.max_spread >= 0.0) pass = pass && res.final_full_spread <= p.max_spread;
  if (p.min_spread >= 0.0) pass = pass && res.final_full_spread >= p.min_spread;

  json rec = {{"record", "train"},
              {"steps", res.trace.size()},
              {"final_spread", res.final_full_spread},
              {"collapse_threshold", res.collapse_threshold},
              {"collapsed", res.final_full_spread < res.collapse_threshold},
              {"retrieval_k", p.retrieval_k},
              {"retrieval", retrieval},
              {"trace", "trace.csv"},
              {"encoders", "encoders.json"},
              {"pass", pass}};
  if (!res.trace.empty()) {
    rec["initial_loss"] = res.trace.front().loss;
    rec["final_loss"] = res.trace.back().loss;
    rec["initial_mean_area"] = res.trace.front().mean_area;
    rec["final_mean_area"] = res.trace.back().mean_area;
  }
  sink.emit(rec);
  return pass ? kExitOk : kExitThreshold;
}

// ---- flow ----------------------------------------------------------------------

struct FlowParams {
  std::string bundle;
  std::string synth;  // static | translate | orbit | moving
  int frames = 60;
  int grid = 20;
  int width = 320, height = 240;
  std::string ref = "auto";
  double window_frac = 0.1;
  bool verify = false;
};

double max_static_residual(const flow::Flow3D& f) {
  double worst = 0.0;
  for (int k = 0; k < f.keypoints; ++k) {
    bool all_visible = true;
    for (int t = 0; t < f.frames; ++t) all_visible &= f.is_valid(k, t);
    if (!all_visible) continue;
    double mean[3] = {0, 0, 0};
    for (int t = 0; t < f.frames; ++t) {
      mean[0] += f.x(k, t);
      mean[1] += f.y(k, t);
      mean[2] += f.z(k, t);
    }
    for (double& m : mean) m /= f.frames;
    double var = 0.0;
    for (int t = 0; t < f.frames; ++t) {
      var += (f.x(k, t) - mean[0]) * (f.x(k, t) - mean[0]);
      var += (f.y(k, t) - mean[1]) * (f.y(k, t) - mean[1]);
      var += (f.z(k, t) - mean[2]) * (f.z(k, t) - mean[2]);
    }
    worst = std::max(worst, std::sqrt(var / f.frames));
  }
  return worst;
}

int run_flow(const FlowParams& p, const fs::path& out, std::uint64_t seed, RecordSink& sink) {
  if (p.bundle.empty() == p.synth.empty())
    throw CLI::ValidationError("flow", "exactly one of --bundle or --synth is required");
  if (p.verify && p.synth.empty())
    throw CLI::ValidationError("--verify", "requires --synth (needs ground truth)");

  write_manifest(out, "flow", seed,
                 {{"bundle", p.bundle},
                  {"synth", p.synth},
                  {"frames", p.frames},
                  {"grid", p.grid},
                  {"width", p.width},
                  {"height", p.height},
                  {"ref", p.ref},
                  {"window_frac", p.window_frac},
                  {"verify", p.verify}});
  sink.emit(header("flow"));

  flow::FlowBundle bundle;
  std::optional<flow::SyntheticScene> scene;
  if (!p.synth.empty()) {
    flow::SceneSpec spec;
    spec.grid_rows = spec.grid_cols = p.grid;
    spec.frames = p.frames;
    spec.width = p.width;
    spec.height = p.height;
    if (p.synth == "static") {
      spec.path = flow::CameraPathKind::Static;
    } else if (p.synth == "translate") {
      spec.path = flow::CameraPathKind::Linear;
    } else if (p.synth == "orbit") {
      spec.path = flow::CameraPathKind::Orbit;
    } else if (p.synth == "moving") {
      spec.path = flow::CameraPathKind::Linear;
      spec.motion = flow::MotionModel::ConstantVelocity;
    } else {
      throw CLI::ValidationError("--synth", "expected static, translate, orbit or moving");
    }
    scene = flow::synth_scene(spec, seed);
    // Write the bundle and read it back so the file formats are what gets
    // consumed, exactly as an external producer would be.
    const auto manifest =
        flow::write_bundle(out / "bundle", {scene->tracks, scene->depths, scene->poses, scene->K,
                                            scene->width, scene->height});
    bundle = flow::read_bundle(manifest);
    sink.emit({{"record", "bundle"},
               {"path", (out / "bundle" / "bundle.json").string()},
               {"tracks", bundle.tracks.size()},
               {"frames", bundle.depths.size()},
               {"excluded_points", scene->excluded}});
  } else {
    bundle = flow::read_bundle(p.bundle);
  }

  std::size_t ref_idx;
  if (p.ref == "auto") {
    std::vector<int> counts(bundle.depths.size(), 0);
    for (const auto& tr : bundle.tracks)
      for (std::size_t t = 0; t < tr.visible.size(); ++t) counts[t] += tr.visible[t] ? 1 : 0;
    ref_idx = flow::select_reference(counts, p.window_frac);
  } else {
    ref_idx = static_cast<std::size_t>(std::stoul(p.ref));
  }

  const auto f = flow::build_flow(bundle.tracks, bundle.depths, bundle.poses, bundle.K, ref_idx);
  const auto meta = flow::write_flow(out, f);
  sink.emit({{"record", "flow"},
             {"keypoints", f.keypoints},
             {"frames", f.frames},
             {"ref_frame", f.ref_frame},
             {"dropped", f.dropped},
             {"meta", meta.string()}});

  int status = kExitOk;
  if (p.verify) {
    // Static-scene kinds: screen-aligned triples of fully visible keypoints
    // must be constant over frames (camera motion compensated).
    json v = {{"record", "verify"}};
    bool pass = true;

    if (scene->world_velocity.empty() ||
        scene->world_velocity[0] == flow::Vec3{0.0, 0.0, 0.0}) {
      const double residual = max_static_residual(f);
      v["compensation_residual"] = residual;
      v["compensation_threshold"] = 1e-6;
      pass = pass && residual < 1e-6;
    } else {
      // Constant-velocity scene: recovered per-frame displacement of the
      // unprojected reference-frame positions must match the ground truth.
      double worst = 0.0;
      for (int k = 0; k < f.keypoints; ++k) {
        bool all_visible = true;
        for (int t = 0; t < f.frames; ++t) all_visible &= f.is_valid(k, t);
        if (!all_visible) continue;
        const int src = f.source_index[k];
        const flow::Vec3 v_ref = flow::apply_pose(
            {bundle.poses[ref_idx].rotation, {0, 0, 0}}, scene->world_velocity[src]);
        for (int t = 0; t + 1 < f.frames; ++t) {
          const auto a = flow::unproject(f.x(k, t), f.y(k, t), f.z(k, t), bundle.K);
          const auto b = flow::unproject(f.x(k, t + 1), f.y(k, t + 1), f.z(k, t + 1), bundle.K);
          for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(b[c] - a[c] - v_ref[c]));
        }
      }
      v["velocity_residual"] = worst;
      v["velocity_threshold"] = 1e-6;
      pass = pass && worst < 1e-6;
    }

    // Projection round trip on fresh random samples.
    Rng rng(seed ^ 0x726f756e64ull);
    double rt = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double u = rng.uniform(0.0, p.width - 1.0);
      const double vv = rng.uniform(0.0, p.height - 1.0);
      const double d = rng.uniform(0.5, 10.0);
      const auto s = flow::project(flow::unproject(u, vv, d, bundle.K), bundle.K);
      rt = std::max({rt, std::abs(s[0] - u), std::abs(s[1] - vv), std::abs(s[2] - d)});
    }
    v["roundtrip_residual"] = rt;
    v["roundtrip_threshold"] = 1e-9;
    pass = pass && rt < 1e-9;

    v["pass"] = pass;
    sink.emit(v);
    if (!pass) status = kExitThreshold;
  }
  return status;
}

// ---- score ---------------------------------------------------------------------

struct ScoreParams {
  std::string input;  // path or "-" for stdin
};

int run_score(const ScoreParams& p, const fs::path& out, std::uint64_t seed, RecordSink& sink) {
  if (p.input.empty()) throw CLI::ValidationError("--in", "input file required");

  write_manifest(out, "score", seed, {{"in", p.input}});
  sink.emit(header("score"));

  metrics::RawScoreMatrix m;
  if (p.input == "-") {
    m = metrics::read_score_csv(std::cin);
  } else {
    std::ifstream in(p.input);
    if (!in) throw std::runtime_error("cannot read " + p.input);
    m = metrics::read_score_csv(in);
  }
  const auto r = metrics::control_relevant_score(m);

  {
    std::ofstream csv(out / "scores.csv");
    metrics::write_score_csv(csv, r);
  }
  json rec = {{"record", "score"},
              {"models", r.models},
              {"scores", r.scores},
              {"excluded_dimensions", r.excluded_dimensions},
              {"output", "scores.csv"}};
  sink.emit(rec);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simplex-guided multimodal alignment toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_path;
  app.add_option("--seed", seed, "global random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "JSON config (a previous run's manifest works)");

  EvalParams ep;
  GradcheckParams gp;
  DemoParams dp;
  TrainParams tp;
  FlowParams fp;
  ScoreParams sp;

  // Configs load before CLI11 binds option defaults, so explicit flags win.
  try {
    const auto cfg_file = scan_flag(argc, argv, "--config");
    if (cfg_file) {
      std::string command;
      for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "eval" || a == "gradcheck" || a == "demo" || a == "train" || a == "flow" ||
            a == "score") {
          command = a;
          break;
        }
      }
      const json cfg = load_config(*cfg_file, command);
      std::ifstream raw(*cfg_file);
      json whole;
      raw >> whole;
      if (whole.contains("seed")) seed = whole.at("seed").get<std::uint64_t>();

      if (command == "eval") {
        from_config(cfg, "alpha", ep.alpha);
        from_config(cfg, "tau", ep.tau);
        from_config(cfg, "pair", ep.pair);
        from_config(cfg, "normalize", ep.normalize);
        if (cfg.contains("vectors")) {
          ep.vecs.clear();
          for (const auto& v : cfg.at("vectors")) {
            std::string s;
            for (const auto& x : v) {
              if (!s.empty()) s += ",";
              s += fmt_double(x.get<double>());
            }
            ep.vecs.push_back(s);
          }
        }
      } else if (command == "gradcheck") {
        from_config(cfg, "trials", gp.trials);
        from_config(cfg, "dim", gp.dim);
        from_config(cfg, "batch", gp.batch);
        from_config(cfg, "alpha", gp.alpha);
        from_config(cfg, "tau", gp.tau);
        from_config(cfg, "h", gp.h);
        from_config(cfg, "tol", gp.tol);
      } else if (command == "demo") {
        from_config(cfg, "kind", dp.kind);
        from_config(cfg, "theta0", dp.theta0);
        from_config(cfg, "alpha", dp.alpha);
        from_config(cfg, "steps", dp.steps);
        from_config(cfg, "lr", dp.lr);
        from_config(cfg, "trials", dp.trials);
        from_config(cfg, "max_ratio", dp.max_ratio);
      } else if (command == "train") {
        from_config(cfg, "count", tp.count);
        from_config(cfg, "noise", tp.noise);
        from_config(cfg, "latent_dim", tp.latent_dim);
        from_config(cfg, "obs_l", tp.obs_l);
        from_config(cfg, "obs_i", tp.obs_i);
        from_config(cfg, "obs_f", tp.obs_f);
        from_config(cfg, "data_file", tp.data_file);
        from_config(cfg, "steps", tp.steps);
        from_config(cfg, "batch", tp.batch);
        from_config(cfg, "lr", tp.lr);
        from_config(cfg, "wd", tp.wd);
        from_config(cfg, "optimizer", tp.optimizer);
        from_config(cfg, "objective", tp.objective);
        from_config(cfg, "alpha", tp.alpha);
        from_config(cfg, "tau", tp.tau);
        from_config(cfg, "pair", tp.pair);
        from_config(cfg, "embed_dim", tp.embed_dim);
        from_config(cfg, "hidden", tp.hidden);
        from_config(cfg, "eval_every", tp.eval_every);
        from_config(cfg, "lambda_tcn", tp.lambda_tcn);
        from_config(cfg, "lambda_act", tp.lambda_act);
        from_config(cfg, "retrieval_k", tp.retrieval_k);
        from_config(cfg, "min_retrieval", tp.min_retrieval);
        from_config(cfg, "max_spread", tp.max_spread);
        from_config(cfg, "min_spread", tp.min_spread);
      } else if (command == "flow") {
        from_config(cfg, "bundle", fp.bundle);
        from_config(cfg, "synth", fp.synth);
        from_config(cfg, "frames", fp.frames);
        from_config(cfg, "grid", fp.grid);
        from_config(cfg, "width", fp.width);
        from_config(cfg, "height", fp.height);
        from_config(cfg, "ref", fp.ref);
        from_config(cfg, "window_frac", fp.window_frac);
        from_config(cfg, "verify", fp.verify);
      } else if (command == "score") {
        from_config(cfg, "in", sp.input);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  auto* eval_cmd = app.add_subcommand("eval", "simplex volume / triangle area / energy of embeddings");
  eval_cmd->add_option("--vec", ep.vecs, "embedding as comma-separated reals (repeatable)");
  eval_cmd->add_option("--file", ep.file, "file with one vector per line");
  eval_cmd->add_option("--alpha", ep.alpha, "cosine regularizer weight");
  eval_cmd->add_option("--tau", ep.tau, "contrastive temperature");
  eval_cmd->add_option("--pair", ep.pair, "regularized pair: lf, li, if");
  eval_cmd->add_flag("--normalize", ep.normalize, "normalize inputs instead of requiring unit norm");

  auto* grad_cmd = app.add_subcommand("gradcheck", "analytic gradients vs finite differences");
  grad_cmd->add_option("--trials", gp.trials, "random instances per operation");
  grad_cmd->add_option("--dim", gp.dim, "embedding dimension");
  grad_cmd->add_option("--batch", gp.batch, "batch size for the loss check");
  grad_cmd->add_option("--alpha", gp.alpha, "cosine regularizer weight");
  grad_cmd->add_option("--tau", gp.tau, "contrastive temperature");
  grad_cmd->add_option("--fd-step", gp.h, "finite-difference step");
  grad_cmd->add_option("--tol", gp.tol, "max relative error tolerance");

  auto* demo_cmd = app.add_subcommand("demo", "ambiguity / conflict demonstrations");
  demo_cmd->add_option("kind", dp.kind, "ambiguity | conflict")->required();
  demo_cmd->add_option("--theta0", dp.theta0, "initial flat-triangle angle");
  demo_cmd->add_option("--alpha", dp.alpha, "cosine regularizer weight");
  demo_cmd->add_option("--steps", dp.steps, "descent steps");
  demo_cmd->add_option("--lr", dp.lr, "descent step size");
  demo_cmd->add_option("--trials", dp.trials, "random-search trials (conflict)");
  demo_cmd->add_option("--max-ratio", dp.max_ratio, "cancellation ratio the search must beat");

  auto* train_cmd = app.add_subcommand("train", "toy three-modal contrastive training");
  train_cmd->add_option("--count", tp.count, "synthetic triplet count");
  train_cmd->add_option("--noise", tp.noise, "observation noise std");
  train_cmd->add_option("--latent-dim", tp.latent_dim, "latent dimension");
  train_cmd->add_option("--obs-l", tp.obs_l, "language observation width");
  train_cmd->add_option("--obs-i", tp.obs_i, "per-frame image observation width");
  train_cmd->add_option("--obs-f", tp.obs_f, "flow observation width");
  train_cmd->add_option("--data", tp.data_file, "load dataset JSON instead of generating");
  train_cmd->add_option("--emit-data", tp.emit_data, "write the dataset JSON here");
  train_cmd->add_option("--steps", tp.steps, "training steps");
  train_cmd->add_option("--batch", tp.batch, "batch size");
  train_cmd->add_option("--lr", tp.lr, "learning rate");
  train_cmd->add_option("--wd", tp.wd, "weight decay");
  train_cmd->add_option("--optimizer", tp.optimizer, "adamw | sgd");
  train_cmd->add_option("--objective", tp.objective, "full | volume");
  train_cmd->add_option("--alpha", tp.alpha, "cosine regularizer weight");
  train_cmd->add_option("--tau", tp.tau, "contrastive temperature");
  train_cmd->add_option("--pair", tp.pair, "regularized pair: lf, li, if");
  train_cmd->add_option("--embed-dim", tp.embed_dim, "embedding dimension");
  train_cmd->add_option("--hidden", tp.hidden, "encoder hidden width");
  train_cmd->add_option("--eval-every", tp.eval_every, "full-spread cadence (0 = final only)");
  train_cmd->add_option("--retrieval-k", tp.retrieval_k, "candidate count for retrieval");
  train_cmd->add_option("--min-retrieval", tp.min_retrieval, "fail below this retrieval");
  train_cmd->add_option("--max-spread", tp.max_spread, "fail above this final spread");
  train_cmd->add_option("--min-spread", tp.min_spread, "fail below this final spread");

  auto* flow_cmd = app.add_subcommand("flow", "screen-aligned 3D flow construction");
  flow_cmd->add_option("--bundle", fp.bundle, "input bundle manifest (JSON)");
  flow_cmd->add_option("--synth", fp.synth, "synthetic scene: static | translate | orbit | moving");
  flow_cmd->add_option("--frames", fp.frames, "synthetic frame count");
  flow_cmd->add_option("--grid", fp.grid, "synthetic keypoint grid side");
  flow_cmd->add_option("--width", fp.width, "synthetic image width");
  flow_cmd->add_option("--height", fp.height, "synthetic image height");
  flow_cmd->add_option("--ref", fp.ref, "reference frame index or 'auto'");
  flow_cmd->add_option("--window-frac", fp.window_frac, "auto-reference window fraction");
  flow_cmd->add_flag("--verify", fp.verify, "verify against the synthetic ground truth");

  auto* score_cmd = app.add_subcommand("score", "control-relevant score aggregation");
  score_cmd->add_option("--in", sp.input, "scores CSV (model,dimension,value) or '-' for stdin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    const fs::path out(out_dir);
    fs::create_directories(out);
    RecordSink sink;
    sink.open(out);

    if (eval_cmd->parsed()) return run_eval(ep, out, seed, sink);
    if (grad_cmd->parsed()) return run_gradcheck(gp, out, seed, sink);
    if (demo_cmd->parsed()) return run_demo(dp, out, seed, sink);
    if (train_cmd->parsed()) return run_train(tp, out, seed, sink);
    if (flow_cmd->parsed()) return run_flow(fp, out, seed, sink);
    if (score_cmd->parsed()) return run_score(sp, out, seed, sink);
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
