// Timing comparison of the OpenMP kernels against their serial references.
// Also cross-checks that both paths produce the same numbers.
//
//   bench [batch] [dim] [reps]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "salign/contrastive.hpp"
#include "salign/flow.hpp"
#include "salign/rng.hpp"

using namespace salign;

namespace {

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

contrastive::TupleBatch random_batch(std::size_t b, std::size_t dim, Rng& rng) {
  contrastive::TupleBatch batch;
  for (std::size_t i = 0; i < b; ++i) {
    Vec v[3];
    for (auto& x : v) {
      x.resize(dim);
      for (auto& c : x) c = rng.normal();
    }
    batch.tuples.push_back(
        {sphere::normalize(v[0]), sphere::normalize(v[1]), sphere::normalize(v[2])});
  }
  return batch;
}

double grad_checksum(const contrastive::LossGradient& g) {
  double s = 0.0;
  for (const auto& t : g.total) {
    for (double v : t.g_L) s += v;
    for (double v : t.g_I) s += v;
    for (double v : t.g_F) s += v;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t batch_size = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 64;
  const std::size_t dim = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 32;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 5;

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("batch=%zu dim=%zu reps=%d\n\n", batch_size, dim, reps);

  Rng rng(1234);
  const auto batch = random_batch(batch_size, dim, rng);
  const energy::EnergyParams params;
  const contrastive::NegativePolicy policy;

  // info_nce
  double t0 = now();
  double sink = 0.0;
  for (int r = 0; r < reps; ++r) sink += contrastive::serial::info_nce(batch, params, policy, r).loss;
  const double t_nce_serial = (now() - t0) / reps;
  t0 = now();
  double sink_p = 0.0;
  for (int r = 0; r < reps; ++r) sink_p += contrastive::info_nce(batch, params, policy, r).loss;
  const double t_nce_par = (now() - t0) / reps;
  std::printf("info_nce   serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   %s\n",
              1e3 * t_nce_serial, 1e3 * t_nce_par, t_nce_serial / t_nce_par,
              sink == sink_p ? "match" : "MISMATCH");

  // loss_grad
  t0 = now();
  double cks = 0.0;
  for (int r = 0; r < reps; ++r)
    cks += grad_checksum(contrastive::serial::loss_grad(batch, params, policy, r));
  const double t_lg_serial = (now() - t0) / reps;
  t0 = now();
  double ckp = 0.0;
  for (int r = 0; r < reps; ++r)
    ckp += grad_checksum(contrastive::loss_grad(batch, params, policy, r));
  const double t_lg_par = (now() - t0) / reps;
  std::printf("loss_grad  serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   %s\n",
              1e3 * t_lg_serial, 1e3 * t_lg_par, t_lg_serial / t_lg_par,
              std::abs(cks - ckp) < 1e-9 * std::max(1.0, std::abs(cks)) ? "match" : "MISMATCH");

  // build_flow on a 20x20 grid, 60-frame orbit scene
  flow::SceneSpec spec;
  spec.path = flow::CameraPathKind::Orbit;
  const auto scene = flow::synth_scene(spec, 7);
  t0 = now();
  double sx = 0.0;
  for (int r = 0; r < reps; ++r)
    sx += flow::serial::build_flow(scene.tracks, scene.depths, scene.poses, scene.K, 0).data[0];
  const double t_bf_serial = (now() - t0) / reps;
  t0 = now();
  double px = 0.0;
  for (int r = 0; r < reps; ++r)
    px += flow::build_flow(scene.tracks, scene.depths, scene.poses, scene.K, 0).data[0];
  const double t_bf_par = (now() - t0) / reps;
  std::printf("build_flow serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   %s\n",
              1e3 * t_bf_serial, 1e3 * t_bf_par, t_bf_serial / t_bf_par,
              sx == px ? "match" : "MISMATCH");
  return 0;
}
