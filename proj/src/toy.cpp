#include "salign/toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salign {
namespace toy {

using contrastive::ModalityTuple;
using contrastive::TupleBatch;
using energy::DegeneracyPolicy;
using energy::EnergyParams;
using energy::RegularizedPair;

// ---- synthetic triplets ------------------------------------------------------

namespace {

std::vector<Vec> random_map(std::size_t rows, std::size_t cols, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  std::vector<Vec> m(rows, Vec(cols));
  for (auto& row : m)
    for (auto& v : row) v = scale * rng.normal();
  return m;
}

Vec apply_map(const std::vector<Vec>& m, const Vec& u, double noise_std, Rng& rng) {
  Vec out(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) {
    out[r] = dot(m[r], u);
    if (noise_std > 0.0) out[r] += noise_std * rng.normal();
  }
  return out;
}

}  // namespace

TripletDataset gen_triplets(const SyntheticTripletSpec& spec) {
  if (spec.count < 2) throw std::invalid_argument("triplet count must be >= 2");
  if (spec.noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
  if (spec.latent_dim < 1 || spec.obs_L < 1 || spec.obs_I < 1 || spec.obs_F < 1)
    throw std::invalid_argument("dimensions must be positive");

  TripletDataset d;
  d.spec = spec;
  Rng rng(spec.seed);
  d.map_L = random_map(spec.obs_L, spec.latent_dim, rng);
  d.map_Ia = random_map(spec.obs_I, spec.latent_dim, rng);
  d.map_Ib = random_map(spec.obs_I, spec.latent_dim, rng);
  d.map_F = random_map(spec.obs_F, spec.latent_dim, rng);

  for (std::size_t i = 0; i < spec.count; ++i) {
    Vec u(spec.latent_dim);
    for (auto& v : u) v = rng.normal();
    d.obs_L.push_back(apply_map(d.map_L, u, spec.noise_std, rng));
    d.obs_I_a.push_back(apply_map(d.map_Ia, u, spec.noise_std, rng));
    d.obs_I_b.push_back(apply_map(d.map_Ib, u, spec.noise_std, rng));
    d.obs_F.push_back(apply_map(d.map_F, u, spec.noise_std, rng));
    d.latents.push_back(std::move(u));
  }
  return d;
}

// ---- frame sampling ------------------------------------------------------------

FrameSample frame_sample(std::int64_t clip_len, std::uint64_t seed) {
  if (clip_len < 5) throw ClipTooShort(clip_len);
  const std::int64_t band =
      static_cast<std::int64_t>(std::ceil(0.1 * static_cast<double>(clip_len)));

  Rng rng(seed);
  const std::int64_t first = rng.uniform_int(0, band - 1);
  const std::int64_t last = rng.uniform_int(clip_len - band, clip_len - 1);

  const std::int64_t between = last - first - 1;
  FrameSample f;
  if (between < 3) {
    // Unreachable for clip_len >= 5 with the 10% bands; kept as a guard.
    for (int i = 0; i < 5; ++i)
      f.indices[i] = first + (last - first) * i / 4;
    return f;
  }

  // Three distinct intermediates via a partial shuffle, then temporal order.
  std::vector<std::int64_t> pool(static_cast<std::size_t>(between));
  for (std::int64_t i = 0; i < between; ++i) pool[static_cast<std::size_t>(i)] = first + 1 + i;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size() - 1 - i)));
    std::swap(pool[i], pool[j]);
  }
  std::int64_t mid[3] = {pool[0], pool[1], pool[2]};
  std::sort(mid, mid + 3);

  f.indices = {first, mid[0], mid[1], mid[2], last};
  return f;
}

std::array<std::pair<std::int64_t, std::int64_t>, 4> transition_pairs(const FrameSample& f) {
  return {{{f.indices[0], f.indices[1]},
           {f.indices[1], f.indices[2]},
           {f.indices[2], f.indices[3]},
           {f.indices[3], f.indices[4]}}};
}

// ---- encoders ------------------------------------------------------------------

ToyEncoder ToyEncoder::init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                            Rng& rng) {
  ToyEncoder e;
  e.in_dim = in_dim;
  e.hidden = hidden;
  e.out_dim = out_dim;
  e.w1.resize(hidden * in_dim);
  e.b1.assign(hidden, 0.0);
  e.w2.resize(out_dim * hidden);
  e.b2.resize(out_dim);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : e.w1) w = rng.uniform(-s1, s1);
  for (auto& w : e.w2) w = rng.uniform(-s2, s2);
  for (auto& b : e.b2) b = rng.uniform(-0.1, 0.1);
  return e;
}

EncoderCache encoder_forward(const ToyEncoder& enc, const Vec& x) {
  if (x.size() != enc.in_dim) throw DimensionMismatch("encoder input width");
  EncoderCache c;
  c.input = x;
  c.h.resize(enc.hidden);
  for (std::size_t r = 0; r < enc.hidden; ++r) {
    double s = enc.b1[r];
    const double* w = &enc.w1[r * enc.in_dim];
    for (std::size_t j = 0; j < enc.in_dim; ++j) s += w[j] * x[j];
    c.h[r] = std::tanh(s);
  }
  c.raw.resize(enc.out_dim);
  for (std::size_t r = 0; r < enc.out_dim; ++r) {
    double s = enc.b2[r];
    const double* w = &enc.w2[r * enc.hidden];
    for (std::size_t j = 0; j < enc.hidden; ++j) s += w[j] * c.h[j];
    c.raw[r] = s;
  }
  c.raw_norm = norm(c.raw);
  if (c.raw_norm <= 1e-12) throw ZeroVector();
  c.unit.resize(enc.out_dim);
  for (std::size_t r = 0; r < enc.out_dim; ++r) c.unit[r] = c.raw[r] / c.raw_norm;
  return c;
}

void encoder_backward(const ToyEncoder& enc, const EncoderCache& c, const Vec& g_unit,
                      EncoderGrads& acc) {
  // Through z = raw/|raw|: dz/draw = (I - z z^T)/|raw|.
  const double radial = dot(c.unit, g_unit);
  Vec g_raw(enc.out_dim);
  for (std::size_t r = 0; r < enc.out_dim; ++r)
    g_raw[r] = (g_unit[r] - radial * c.unit[r]) / c.raw_norm;

  Vec g_h(enc.hidden, 0.0);
  for (std::size_t r = 0; r < enc.out_dim; ++r) {
    const double g = g_raw[r];
    double* gw = &acc.w2[r * enc.hidden];
    const double* w = &enc.w2[r * enc.hidden];
    for (std::size_t j = 0; j < enc.hidden; ++j) {
      gw[j] += g * c.h[j];
      g_h[j] += w[j] * g;
    }
    acc.b2[r] += g;
  }

  for (std::size_t r = 0; r < enc.hidden; ++r) {
    const double g = g_h[r] * (1.0 - c.h[r] * c.h[r]);
    double* gw = &acc.w1[r * enc.in_dim];
    for (std::size_t j = 0; j < enc.in_dim; ++j) gw[j] += g * c.input[j];
    acc.b1[r] += g;
  }
}

EncoderGrads zero_grads(const ToyEncoder& enc) {
  EncoderGrads g;
  g.w1.assign(enc.w1.size(), 0.0);
  g.b1.assign(enc.b1.size(), 0.0);
  g.w2.assign(enc.w2.size(), 0.0);
  g.b2.assign(enc.b2.size(), 0.0);
  return g;
}

// ---- optimizer -----------------------------------------------------------------

namespace {

struct AdamSlot {
  Vec m, v;
};

struct EncoderOpt {
  AdamSlot w1, b1, w2, b2;
};

AdamSlot adam_slot(std::size_t n) { return {Vec(n, 0.0), Vec(n, 0.0)}; }

EncoderOpt encoder_opt(const ToyEncoder& e) {
  return {adam_slot(e.w1.size()), adam_slot(e.b1.size()), adam_slot(e.w2.size()),
          adam_slot(e.b2.size())};
}

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adamw_update(Vec& w, const Vec& g, AdamSlot& s, double lr, double wd, std::size_t step) {
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
  for (std::size_t i = 0; i < w.size(); ++i) {
    s.m[i] = kBeta1 * s.m[i] + (1.0 - kBeta1) * g[i];
    s.v[i] = kBeta2 * s.v[i] + (1.0 - kBeta2) * g[i] * g[i];
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    w[i] -= lr * (mhat / (std::sqrt(vhat) + kAdamEps) + wd * w[i]);
  }
}

void sgd_update(Vec& w, const Vec& g, double lr, double wd) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * (g[i] + wd * w[i]);
}

// Decoupled weight decay on the weight matrices only.
void apply_update(ToyEncoder& e, const EncoderGrads& g, EncoderOpt& opt, const TrainConfig& cfg,
                  std::size_t step) {
  if (cfg.optimizer == Optimizer::AdamWStyle) {
    adamw_update(e.w1, g.w1, opt.w1, cfg.learning_rate, cfg.weight_decay, step);
    adamw_update(e.b1, g.b1, opt.b1, cfg.learning_rate, 0.0, step);
    adamw_update(e.w2, g.w2, opt.w2, cfg.learning_rate, cfg.weight_decay, step);
    adamw_update(e.b2, g.b2, opt.b2, cfg.learning_rate, 0.0, step);
  } else {
    sgd_update(e.w1, g.w1, cfg.learning_rate, cfg.weight_decay);
    sgd_update(e.b1, g.b1, cfg.learning_rate, 0.0);
    sgd_update(e.w2, g.w2, cfg.learning_rate, cfg.weight_decay);
    sgd_update(e.b2, g.b2, cfg.learning_rate, 0.0);
  }
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double pair_cosine(const ModalityTuple& t, RegularizedPair pair) {
  switch (pair) {
    case RegularizedPair::LanguageFlow:
      return dot(t.z_L.values(), t.z_F.values());
    case RegularizedPair::LanguageImage:
      return dot(t.z_L.values(), t.z_I.values());
    case RegularizedPair::ImageFlow:
      return dot(t.z_I.values(), t.z_F.values());
  }
  return 0.0;
}

double mean_pairwise_distance(const std::vector<const Vec*>& pts) {
  if (pts.size() < 2) return 0.0;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      s += norm(*pts[i] - *pts[j]);
      ++n;
    }
  return s / static_cast<double>(n);
}

}  // namespace

double embedding_spread(const TripletEncoders& enc, const TripletDataset& data) {
  std::vector<Vec> zl, zi, zf;
  for (std::size_t i = 0; i < data.size(); ++i) {
    zl.push_back(encoder_forward(enc.lang, data.obs_L[i]).unit);
    zi.push_back(encoder_forward(enc.image, concat(data.obs_I_a[i], data.obs_I_b[i])).unit);
    zf.push_back(encoder_forward(enc.flow, data.obs_F[i]).unit);
  }
  double s = 0.0;
  for (const auto* mod : {&zl, &zi, &zf}) {
    std::vector<const Vec*> view;
    for (const auto& v : *mod) view.push_back(&v);
    s += mean_pairwise_distance(view);
  }
  return s / 3.0;
}

TrainResult train(const TrainConfig& cfg, const TripletDataset& data) {
  if (data.size() < cfg.batch_size) throw DatasetTooSmall();
  if (cfg.batch_size < 2) throw BatchTooSmall(cfg.batch_size);
  if (cfg.embed_dim < 2) throw std::invalid_argument("embed_dim must be >= 2");

  Rng init_rng(cfg.seed);
  TrainResult out;
  out.encoders.lang = ToyEncoder::init(data.spec.obs_L, cfg.hidden_width, cfg.embed_dim, init_rng);
  out.encoders.image =
      ToyEncoder::init(2 * data.spec.obs_I, cfg.hidden_width, cfg.embed_dim, init_rng);
  out.encoders.flow = ToyEncoder::init(data.spec.obs_F, cfg.hidden_width, cfg.embed_dim, init_rng);
  out.collapse_threshold = cfg.collapse_threshold;
  out.final_full_spread = std::numeric_limits<double>::quiet_NaN();

  EncoderOpt opt_l = encoder_opt(out.encoders.lang);
  EncoderOpt opt_i = encoder_opt(out.encoders.image);
  EncoderOpt opt_f = encoder_opt(out.encoders.flow);

  Rng batch_rng = Rng::derive(cfg.seed, 0x6261746368ull);  // "batch"
  std::vector<std::size_t> order(data.size());

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    // Batch without replacement via a partial shuffle.
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(batch_rng.uniform_int(
                                    0, static_cast<std::int64_t>(order.size() - 1 - i)));
      std::swap(order[i], order[j]);
    }

    std::vector<EncoderCache> cache_l, cache_i, cache_f;
    TupleBatch batch;
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      const std::size_t idx = order[i];
      cache_l.push_back(encoder_forward(out.encoders.lang, data.obs_L[idx]));
      cache_i.push_back(encoder_forward(out.encoders.image,
                                        concat(data.obs_I_a[idx], data.obs_I_b[idx])));
      cache_f.push_back(encoder_forward(out.encoders.flow, data.obs_F[idx]));
      batch.tuples.push_back({UnitEmbedding(cache_l.back().unit),
                              UnitEmbedding(cache_i.back().unit),
                              UnitEmbedding(cache_f.back().unit)});
    }

    double loss = 0.0;
    std::vector<energy::TupleGradient> embed_grads;
    if (cfg.objective == Objective::FullContrastive) {
      auto lg = contrastive::loss_grad(batch, cfg.energy, cfg.negatives,
                                       cfg.seed ^ (0x9e3779b97f4a7c15ull + step),
                                       DegeneracyPolicy::ZeroArea);
      loss = lg.report.loss;
      embed_grads = std::move(lg.total);
    } else {
      // Naive volume descent: minimize the mean matched-tuple area, no
      // negatives, no cosine term.
      const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
      embed_grads.resize(cfg.batch_size);
      for (std::size_t i = 0; i < cfg.batch_size; ++i) {
        const auto& t = batch.tuples[i];
        const double area = sphere::triangle_area(t.z_L, t.z_I, t.z_F);
        loss += area;
        if (area > energy::kDegenerateArea) {
          auto g = energy::area_grad(t.z_L, t.z_I, t.z_F);
          embed_grads[i].g_L = inv_b * g.g_L;
          embed_grads[i].g_I = inv_b * g.g_I;
          embed_grads[i].g_F = inv_b * g.g_F;
        } else {
          embed_grads[i].g_L = Vec(cfg.embed_dim, 0.0);
          embed_grads[i].g_I = Vec(cfg.embed_dim, 0.0);
          embed_grads[i].g_F = Vec(cfg.embed_dim, 0.0);
        }
      }
      loss /= static_cast<double>(cfg.batch_size);
    }

    TraceRow row{};
    row.step = step;
    row.loss = loss;
    row.mean_area = 0.0;
    row.pair_cosine = 0.0;
    for (const auto& t : batch.tuples) {
      row.mean_area += sphere::triangle_area(t.z_L, t.z_I, t.z_F);
      row.pair_cosine += pair_cosine(t, cfg.energy.pair);
    }
    row.mean_area /= static_cast<double>(cfg.batch_size);
    row.pair_cosine /= static_cast<double>(cfg.batch_size);
    {
      std::vector<const Vec*> view;
      for (const auto& c : cache_l) view.push_back(&c.unit);
      double s = mean_pairwise_distance(view);
      view.clear();
      for (const auto& c : cache_i) view.push_back(&c.unit);
      s += mean_pairwise_distance(view);
      view.clear();
      for (const auto& c : cache_f) view.push_back(&c.unit);
      s += mean_pairwise_distance(view);
      row.batch_spread = s / 3.0;
    }

    // Backprop in batch order so runs are bit-reproducible.
    EncoderGrads g_l = zero_grads(out.encoders.lang);
    EncoderGrads g_i = zero_grads(out.encoders.image);
    EncoderGrads g_f = zero_grads(out.encoders.flow);
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      encoder_backward(out.encoders.lang, cache_l[i], embed_grads[i].g_L, g_l);
      encoder_backward(out.encoders.image, cache_i[i], embed_grads[i].g_I, g_i);
      encoder_backward(out.encoders.flow, cache_f[i], embed_grads[i].g_F, g_f);
    }

    apply_update(out.encoders.lang, g_l, opt_l, cfg, step + 1);
    apply_update(out.encoders.image, g_i, opt_i, cfg, step + 1);
    apply_update(out.encoders.flow, g_f, opt_f, cfg, step + 1);

    row.full_spread = std::numeric_limits<double>::quiet_NaN();
    const bool last = (step + 1 == cfg.steps);
    if (last || (cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0)) {
      row.full_spread = embedding_spread(out.encoders, data);
      if (last) out.final_full_spread = row.full_spread;
    }
    out.trace.push_back(row);
  }
  return out;
}

double retrieval_accuracy(const TripletEncoders& enc, const TripletDataset& data,
                          std::size_t candidates, const EnergyParams& p, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (candidates < 2 || candidates > n) throw TooFewCandidates();

  std::vector<Vec> zl, zi, zf;
  for (std::size_t i = 0; i < n; ++i) {
    zl.push_back(encoder_forward(enc.lang, data.obs_L[i]).unit);
    zi.push_back(encoder_forward(enc.image, concat(data.obs_I_a[i], data.obs_I_b[i])).unit);
    zf.push_back(encoder_forward(enc.flow, data.obs_F[i]).unit);
  }

  std::size_t hits = 0;
  std::vector<std::size_t> pool(n);
  for (std::size_t q = 0; q < n; ++q) {
    const UnitEmbedding query{zl[q]};
    const double matched =
        energy::energy(query, UnitEmbedding(zi[q]), UnitEmbedding(zf[q]), p);

    // K-1 distinct distractors drawn from the other items.
    Rng rng = Rng::derive(seed, q);
    pool.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != q) pool.push_back(j);
    bool beaten = false;
    for (std::size_t i = 0; i + 1 < candidates && !beaten; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                                    0, static_cast<std::int64_t>(pool.size() - 1 - i)));
      std::swap(pool[i], pool[j]);
      const std::size_t c = pool[i];
      const double e = energy::energy(query, UnitEmbedding(zi[c]), UnitEmbedding(zf[c]), p);
      if (e <= matched) beaten = true;
    }
    if (!beaten) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

// ---- demos ---------------------------------------------------------------------

// Anchored descent: x stays fixed while y and z follow the energy gradient.
// Free three-point descent drags x and y jointly toward z, so the (x, y)
// cosine would drift well off -1 before the area collapses; anchoring x is
// what exhibits a vanishing area with the pair still misaligned. The area
// step is capped at the current area so the collapse is monotone instead of
// bouncing at the step-size scale; the smooth cosine term takes full steps.
AmbiguityReport demo_ambiguity(double theta0, double alpha, std::size_t steps, double lr) {
  if (theta0 <= 0.0 || theta0 > 1.5707963267948966)
    throw std::invalid_argument("theta0 must lie in (0, pi/2]");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (lr <= 0.0) throw std::invalid_argument("lr must be > 0");

  const UnitEmbedding x{Vec{1.0, 0.0, 0.0}};
  UnitEmbedding y{Vec{-1.0, 0.0, 0.0}};
  UnitEmbedding z = sphere::normalize(Vec{std::cos(theta0), std::sin(theta0), 0.0});

  AmbiguityReport rep;
  rep.theta0 = theta0;
  rep.alpha = alpha;
  rep.lr = lr;

  const auto record = [&](std::size_t step) {
    const double area = sphere::triangle_area(x, y, z);
    const double cos_xy = dot(x.values(), y.values());
    rep.rows.push_back({step, area, cos_xy, std::asin(std::min(area, 1.0))});
  };
  record(0);

  for (std::size_t s = 0; s < steps; ++s) {
    const double area = sphere::triangle_area(x, y, z);
    energy::TupleGradient ga;
    if (area > energy::kDegenerateArea) {
      ga = energy::area_grad(x, y, z);
    } else {
      ga.g_I = Vec(3, 0.0);
      ga.g_F = Vec(3, 0.0);
    }
    const double area_step = std::min(lr, area);

    Vec ny = y.values();
    Vec nz = z.values();
    add_scaled(ny, -area_step, ga.g_I);
    add_scaled(nz, -area_step, ga.g_F);
    if (alpha > 0.0) {
      // Regularized pair (x, y): ascent pull of <x, y> acting on y.
      add_scaled(ny, lr * alpha, sphere::tangent_project(y, x.values()));
    }
    y = sphere::normalize(ny);
    z = sphere::normalize(nz);
    record(s + 1);
  }

  rep.final_area = rep.rows.back().area;
  rep.final_cos_xy = rep.rows.back().cos_xy;
  return rep;
}

ConflictReport demo_conflict(std::uint64_t search_seed, std::int64_t trials, double alpha) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  ConflictReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_decomp_residual = 0.0;
  rep.max_ascent_residual = 0.0;
  rep.trials = trials;
  rep.skipped = 0;
  rep.alpha = alpha;

  for (std::int64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::derive(search_seed, static_cast<std::uint64_t>(trial));
    const auto draw = [&]() {
      Vec v{rng.normal(), rng.normal(), rng.normal()};
      return sphere::normalize(v);
    };
    const UnitEmbedding x = draw();
    const UnitEmbedding y = draw();
    const UnitEmbedding z = draw();

    if (sphere::triangle_area(x, y, z) <= 1e-6) {  // degenerate; no defined pulls
      ++rep.skipped;
      continue;
    }

    const auto [u_xy, u_xz] = energy::edgewise_pulls(x, y, z);
    const auto grad = energy::area_grad(x, y, z);
    for (std::size_t i = 0; i < 3; ++i)
      rep.max_decomp_residual =
          std::max(rep.max_decomp_residual, std::abs(u_xy[i] + u_xz[i] + grad.g_L[i]));

    const double rate = energy::ascent_rate(x, y);
    const Vec pxy = sphere::tangent_project(x, y.values());
    rep.max_ascent_residual =
        std::max(rep.max_ascent_residual, std::abs(rate - dot(pxy, y.values())));

    double ratio;
    try {
      ratio = energy::cancellation_ratio(u_xy, u_xz);
    } catch (const BothZero&) {
      ++rep.skipped;
      continue;
    }
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.x = x.values();
      rep.y = y.values();
      rep.z = z.values();
      rep.cosine_pull = alpha * std::sqrt(rate);
    }
  }
  return rep;
}

}  // namespace toy
}  // namespace salign
