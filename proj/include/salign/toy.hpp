#ifndef SALIGN_TOY_HPP
#define SALIGN_TOY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "salign/contrastive.hpp"
#include "salign/rng.hpp"

namespace salign {
namespace toy {

// ---- synthetic triplets ------------------------------------------------------

struct SyntheticTripletSpec {
  std::size_t latent_dim = 8;
  std::size_t obs_L = 16;  // language observation width
  std::size_t obs_I = 12;  // per-frame image observation width (two frames per item)
  std::size_t obs_F = 14;  // flow observation width
  double noise_std = 0.05;
  std::size_t count = 512;
  std::uint64_t seed = 0;
};

// Matched observations share one latent; each modality sees it through its
// own fixed random linear map plus Gaussian noise. The image modality gets a
// transition pair (two frames) whose concatenation the image encoder reads.
// Latents and maps are kept as the ground-truth oracle for tests.
struct TripletDataset {
  SyntheticTripletSpec spec;
  std::vector<Vec> obs_L;
  std::vector<Vec> obs_I_a, obs_I_b;
  std::vector<Vec> obs_F;
  std::vector<Vec> latents;
  std::vector<Vec> map_L, map_Ia, map_Ib, map_F;  // rows of each linear map

  std::size_t size() const { return obs_L.size(); }
};

TripletDataset gen_triplets(const SyntheticTripletSpec& spec);

// ---- frame sampling protocol -------------------------------------------------

// Five strictly increasing frame indices: the first from the leading 10% of
// the clip, the last from the trailing 10%, three intermediates strictly
// between them in temporal order.
struct FrameSample {
  std::array<std::int64_t, 5> indices;
};

FrameSample frame_sample(std::int64_t clip_len, std::uint64_t seed);

std::array<std::pair<std::int64_t, std::int64_t>, 4> transition_pairs(const FrameSample& f);

// ---- encoders ----------------------------------------------------------------

// Two affine layers with tanh between, output renormalized to the sphere.
struct ToyEncoder {
  std::size_t in_dim = 0, hidden = 0, out_dim = 0;
  Vec w1, b1, w2, b2;  // w1: hidden x in, w2: out x hidden, row-major

  static ToyEncoder init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, Rng& rng);
};

struct EncoderCache {
  Vec input;
  Vec h;         // tanh activations
  Vec raw;       // pre-normalization output
  double raw_norm = 0.0;
  Vec unit;      // raw / |raw|
};

struct EncoderGrads {
  Vec w1, b1, w2, b2;
};

EncoderCache encoder_forward(const ToyEncoder& enc, const Vec& x);
void encoder_backward(const ToyEncoder& enc, const EncoderCache& cache, const Vec& g_unit,
                      EncoderGrads& acc);
EncoderGrads zero_grads(const ToyEncoder& enc);

struct TripletEncoders {
  ToyEncoder lang, image, flow;
};

// ---- training ----------------------------------------------------------------

enum class Optimizer { SGD, AdamWStyle };
enum class Objective { FullContrastive, VolumeOnlyDescent };

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-2;
  std::size_t batch_size = 32;
  std::size_t steps = 0;
  Optimizer optimizer = Optimizer::AdamWStyle;
  energy::EnergyParams energy{};
  std::uint64_t seed = 0;
  Objective objective = Objective::FullContrastive;
  std::size_t embed_dim = 16;
  std::size_t hidden_width = 64;
  contrastive::NegativePolicy negatives{};
  std::size_t eval_every = 100;      // full-dataset spread cadence
  double collapse_threshold = 0.05;  // echoed in every report
  // Reserved auxiliary-loss weights; accepted and echoed, not used.
  double lambda_tcn = 1.0;
  double lambda_act = 1.0;
};

struct TraceRow {
  std::size_t step;
  double loss;          // objective value on the step's batch
  double mean_area;     // matched-tuple triangle area, batch mean
  double pair_cosine;   // regularized-pair cosine, batch mean
  double batch_spread;  // mean pairwise distance across distinct batch items
  double full_spread;   // dataset-wide spread at eval steps, else NaN
};

struct TrainResult {
  TripletEncoders encoders;
  std::vector<TraceRow> trace;
  double final_full_spread;  // computed after the last update (NaN if steps == 0)
  double collapse_threshold;
};

TrainResult train(const TrainConfig& config, const TripletDataset& data);

// Mean pairwise distance across distinct items, averaged over modalities.
double embedding_spread(const TripletEncoders& encoders, const TripletDataset& data);

// Fraction of language queries whose matched (image, flow) candidate has the
// strictly lowest energy among K seeded candidates.
double retrieval_accuracy(const TripletEncoders& encoders, const TripletDataset& data,
                          std::size_t candidates, const energy::EnergyParams& p,
                          std::uint64_t seed);

// ---- diagnostic demos ----------------------------------------------------------

// Riemannian descent on E from the flat triangle x=e1, y=-e1,
// z=(cos theta0, sin theta0, 0); the regularizer acts on the (x, y) pair.
struct AmbiguityRow {
  std::size_t step;
  double area;
  double cos_xy;
  double theta_equiv;  // asin of the area, the flat-family angle
};

struct AmbiguityReport {
  std::vector<AmbiguityRow> rows;  // rows[0] is the initial state
  double theta0, alpha, lr;
  double final_area, final_cos_xy;
};

AmbiguityReport demo_ambiguity(double theta0, double alpha, std::size_t steps, double lr);

// Random search over unit triples in R^3 for the strongest cancellation
// between the two edge-wise pulls on x.
struct ConflictReport {
  double min_ratio;
  Vec x, y, z;                 // configuration attaining it
  double cosine_pull;          // alpha * sqrt(ascent_rate(x, y)) there
  double max_decomp_residual;  // |u_xy + u_xz + grad_x A|_inf over all trials
  double max_ascent_residual;  // |(1 - <x,y>^2) - <P_x y, y>| over all trials
  std::int64_t trials, skipped;
  double alpha;
};

ConflictReport demo_conflict(std::uint64_t search_seed, std::int64_t trials, double alpha = 1.0);

}  // namespace toy
}  // namespace salign

#endif  // SALIGN_TOY_HPP
