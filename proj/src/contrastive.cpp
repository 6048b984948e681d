#include "salign/contrastive.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "salign/rng.hpp"

namespace salign {
namespace contrastive {

using energy::DegeneracyPolicy;
using energy::EnergyParams;
using energy::TupleGradient;

namespace {

void validate_params(const EnergyParams& p) {
  if (p.alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (p.tau <= 0.0) throw std::invalid_argument("tau must be > 0");
}

const UnitEmbedding& slot_L(const TupleBatch& b, std::size_t i) { return b.tuples[i].z_L; }
const UnitEmbedding& slot_I(const TupleBatch& b, std::size_t i) { return b.tuples[i].z_I; }
const UnitEmbedding& slot_F(const TupleBatch& b, std::size_t i) { return b.tuples[i].z_F; }

// Fused energy/gradient kernel for the batch loops: the same math as
// energy::energy / energy::energy_grad with the tangent projections expanded
// in place, so the hot path never allocates.
double fused_energy_grad(const Vec& x, const Vec& y, const Vec& z, const EnergyParams& p,
                         DegeneracyPolicy policy, double* gx, double* gy, double* gz) {
  const std::size_t d = x.size();
  const double a = clamp_cosine(dot(x, y));
  const double b = clamp_cosine(dot(x, z));
  const double c = clamp_cosine(dot(y, z));
  const double h = 1.0 + c - a - b;
  const double radicand = (2.0 - 2.0 * a) * (2.0 - 2.0 * b) - h * h;
  const double area = 0.5 * std::sqrt(std::max(radicand, 0.0));

  double wa = 0.0, wb = 0.0, wc = 0.0;
  if (gx != nullptr) {
    if (area > energy::kDegenerateArea) {
      const double scale = 1.0 / (8.0 * area);
      wa = (-2.0 * (2.0 - 2.0 * b) + 2.0 * h) * scale;
      wb = (-2.0 * (2.0 - 2.0 * a) + 2.0 * h) * scale;
      wc = (-2.0 * h) * scale;
    } else if (policy == DegeneracyPolicy::Error && p.alpha == 0.0) {
      throw DegenerateTriangle();
    }
    for (std::size_t i = 0; i < d; ++i) {
      gx[i] = wa * (y[i] - a * x[i]) + wb * (z[i] - b * x[i]);
      gy[i] = wa * (x[i] - a * y[i]) + wc * (z[i] - c * y[i]);
      gz[i] = wb * (x[i] - b * z[i]) + wc * (y[i] - c * z[i]);
    }
  }

  double pair_cos = 0.0;
  switch (p.pair) {
    case energy::RegularizedPair::LanguageFlow:
      pair_cos = b;
      if (gx != nullptr)
        for (std::size_t i = 0; i < d; ++i) {
          gx[i] -= p.alpha * (z[i] - b * x[i]);
          gz[i] -= p.alpha * (x[i] - b * z[i]);
        }
      break;
    case energy::RegularizedPair::LanguageImage:
      pair_cos = a;
      if (gx != nullptr)
        for (std::size_t i = 0; i < d; ++i) {
          gx[i] -= p.alpha * (y[i] - a * x[i]);
          gy[i] -= p.alpha * (x[i] - a * y[i]);
        }
      break;
    case energy::RegularizedPair::ImageFlow:
      pair_cos = c;
      if (gx != nullptr)
        for (std::size_t i = 0; i < d; ++i) {
          gy[i] -= p.alpha * (z[i] - c * y[i]);
          gz[i] -= p.alpha * (y[i] - c * z[i]);
        }
      break;
  }
  return area - p.alpha * pair_cos;
}

double source_energy(const TupleBatch& b, const NegativeSource& s, const EnergyParams& p) {
  return fused_energy_grad(slot_L(b, s.idx_L).values(), slot_I(b, s.idx_I).values(),
                           slot_F(b, s.idx_F).values(), p, DegeneracyPolicy::ZeroArea, nullptr,
                           nullptr, nullptr);
}

// Flat (element, slot, component) gradient accumulator; one allocation per
// stream keeps the per-anchor scratch cheap.
struct GradGrid {
  std::size_t batch = 0, dim = 0;
  std::vector<double> data;

  void init(std::size_t b, std::size_t d) {
    batch = b;
    dim = d;
    data.assign(b * 3 * d, 0.0);
  }
  double* slot(std::size_t elem, int s) { return &data[(elem * 3 + s) * dim]; }
};

void axpy(double* dst, double a, const Vec& v) {
  for (std::size_t i = 0; i < v.size(); ++i) dst[i] += a * v[i];
}

std::vector<TupleGradient> grid_to_tuples(const GradGrid& grid, double scale) {
  std::vector<TupleGradient> out(grid.batch);
  for (std::size_t e = 0; e < grid.batch; ++e) {
    const double* base = &grid.data[e * 3 * grid.dim];
    out[e].g_L.assign(base, base + grid.dim);
    out[e].g_I.assign(base + grid.dim, base + 2 * grid.dim);
    out[e].g_F.assign(base + 2 * grid.dim, base + 3 * grid.dim);
    for (auto& v : out[e].g_L) v *= scale;
    for (auto& v : out[e].g_I) v *= scale;
    for (auto& v : out[e].g_F) v *= scale;
  }
  return out;
}

struct AnchorForward {
  double e_plus;
  std::vector<double> e_minus;
  NceTerms terms;
  std::vector<NegativeSource> sources;
};

AnchorForward anchor_forward(const TupleBatch& batch, std::size_t anchor, const EnergyParams& p,
                             const NegativePolicy& policy, std::uint64_t seed) {
  AnchorForward f;
  f.sources = negative_sources(batch.size(), anchor, policy, seed);
  f.e_plus = source_energy(batch, {anchor, anchor, anchor}, p);
  f.e_minus.reserve(f.sources.size());
  for (const auto& s : f.sources) f.e_minus.push_back(source_energy(batch, s, p));
  f.terms = nce_from_energies(f.e_plus, f.e_minus, p.tau);
  return f;
}

// One anchor's contribution to the (unnormalized) loss gradient, stored
// compactly: the anchor's own alignment and uniformity slots, plus one
// vector per negative for the slot that negative replaced. Only the
// single-modality policy produces exactly one replaced slot per negative;
// the double-mismatch ablation goes through the serial path instead.
struct AnchorGrad {
  AnchorForward fwd;
  Vec own_align;  // 3 * dim: matched-tuple gradient scaled by (1 - p+)/tau
  Vec own_uni;    // 3 * dim: kept-slot parts of all negatives
  Vec replaced;   // sources.size() * dim: the replaced slot of each negative
};

void anchor_grad(const TupleBatch& batch, std::size_t anchor, const EnergyParams& p,
                 const NegativePolicy& policy, std::uint64_t seed, DegeneracyPolicy degeneracy,
                 AnchorGrad& out, Vec& gx, Vec& gy, Vec& gz) {
  const std::size_t dim = batch.tuples[0].z_L.dim();
  out.fwd = anchor_forward(batch, anchor, p, policy, seed);
  out.own_align.assign(3 * dim, 0.0);
  out.own_uni.assign(3 * dim, 0.0);
  out.replaced.resize(out.fwd.sources.size() * dim);
  gx.resize(dim);
  gy.resize(dim);
  gz.resize(dim);

  const double c_align = (1.0 - out.fwd.terms.p_plus) / p.tau;
  fused_energy_grad(slot_L(batch, anchor).values(), slot_I(batch, anchor).values(),
                    slot_F(batch, anchor).values(), p, degeneracy, gx.data(), gy.data(),
                    gz.data());
  axpy(&out.own_align[0], c_align, gx);
  axpy(&out.own_align[dim], c_align, gy);
  axpy(&out.own_align[2 * dim], c_align, gz);

  for (std::size_t l = 0; l < out.fwd.sources.size(); ++l) {
    const NegativeSource& s = out.fwd.sources[l];
    const double c_uni = -out.fwd.terms.p_minus[l] / p.tau;
    fused_energy_grad(slot_L(batch, s.idx_L).values(), slot_I(batch, s.idx_I).values(),
                      slot_F(batch, s.idx_F).values(), p, degeneracy, gx.data(), gy.data(),
                      gz.data());
    const Vec* g[3] = {&gx, &gy, &gz};
    const std::size_t idx[3] = {s.idx_L, s.idx_I, s.idx_F};
    double* rep = &out.replaced[l * dim];
    for (int m = 0; m < 3; ++m) {
      if (idx[m] == anchor) {
        axpy(&out.own_uni[m * dim], c_uni, *g[m]);
      } else {
        for (std::size_t k = 0; k < dim; ++k) rep[k] = c_uni * (*g[m])[k];
      }
    }
  }
}

void fill_report_slot(LossReport& r, std::size_t i, const AnchorForward& f) {
  r.per_anchor_loss[i] = f.terms.loss;
  r.p_plus[i] = f.terms.p_plus;
  r.p_minus[i] = f.terms.p_minus;
  r.e_plus[i] = f.e_plus;
  r.e_minus[i] = f.e_minus;
}

LossReport sized_report(std::size_t batch) {
  LossReport r;
  r.per_anchor_loss.resize(batch);
  r.p_plus.resize(batch);
  r.p_minus.resize(batch);
  r.e_plus.resize(batch);
  r.e_minus.resize(batch);
  return r;
}

// Mean over anchors in ascending order; shared by every implementation so
// thread count never changes the summation order.
double reduce_mean_loss(const std::vector<double>& per_anchor) {
  double s = 0.0;
  for (double v : per_anchor) s += v;
  return s / static_cast<double>(per_anchor.size());
}

}  // namespace

std::vector<NegativeSource> negative_sources(std::size_t batch, std::size_t anchor,
                                             const NegativePolicy& policy, std::uint64_t seed) {
  if (batch < 2) throw BatchTooSmall(batch);
  if (anchor >= batch) throw std::out_of_range("anchor index out of range");

  std::vector<NegativeSource> out;
  const auto each_other = [&](auto&& emit) {
    for (std::size_t j = 0; j < batch; ++j)
      if (j != anchor) emit(j);
  };
  each_other([&](std::size_t j) { out.push_back({j, anchor, anchor}); });
  each_other([&](std::size_t j) { out.push_back({anchor, j, anchor}); });
  each_other([&](std::size_t j) { out.push_back({anchor, anchor, j}); });
  if (policy.mode == NegativeMode::AllSingleAndDouble) {
    each_other([&](std::size_t j) { out.push_back({j, j, anchor}); });
    each_other([&](std::size_t j) { out.push_back({j, anchor, j}); });
    each_other([&](std::size_t j) { out.push_back({anchor, j, j}); });
  }

  if (policy.per_anchor_cap && *policy.per_anchor_cap < out.size()) {
    const std::size_t k = *policy.per_anchor_cap;
    if (k == 0) throw std::invalid_argument("per_anchor_cap must be positive");
    Rng rng = Rng::derive(seed, anchor);
    std::vector<std::size_t> pos(out.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(
                                                              pos.size() - 1 - i)));
      std::swap(pos[i], pos[j]);
    }
    pos.resize(k);
    std::sort(pos.begin(), pos.end());  // keep the canonical ordering
    std::vector<NegativeSource> capped;
    capped.reserve(k);
    for (std::size_t i : pos) capped.push_back(out[i]);
    out = std::move(capped);
  }
  return out;
}

std::vector<ModalityTuple> build_negatives(const TupleBatch& batch, std::size_t anchor,
                                           const NegativePolicy& policy, std::uint64_t seed) {
  const auto sources = negative_sources(batch.size(), anchor, policy, seed);
  std::vector<ModalityTuple> out;
  out.reserve(sources.size());
  for (const auto& s : sources)
    out.push_back({slot_L(batch, s.idx_L), slot_I(batch, s.idx_I), slot_F(batch, s.idx_F)});
  return out;
}

NceTerms nce_from_energies(double e_plus, const std::vector<double>& e_minus, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
  double shift = -e_plus / tau;
  for (double e : e_minus) shift = std::max(shift, -e / tau);

  NceTerms t;
  const double w_plus = std::exp(-e_plus / tau - shift);
  double denom = w_plus;
  t.p_minus.reserve(e_minus.size());
  for (double e : e_minus) {
    const double w = std::exp(-e / tau - shift);
    t.p_minus.push_back(w);
    denom += w;
  }
  t.p_plus = w_plus / denom;
  for (double& w : t.p_minus) w /= denom;
  t.loss = e_plus / tau + shift + std::log(denom);
  return t;
}

LossReport info_nce(const TupleBatch& batch, const EnergyParams& p, const NegativePolicy& policy,
                    std::uint64_t seed) {
  validate_params(p);
  const std::size_t B = batch.size();
  if (B < 2) throw BatchTooSmall(B);
  LossReport r = sized_report(B);

#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(B); ++i) {
    const AnchorForward f = anchor_forward(batch, static_cast<std::size_t>(i), p, policy, seed);
    fill_report_slot(r, static_cast<std::size_t>(i), f);
  }
  r.loss = reduce_mean_loss(r.per_anchor_loss);
  return r;
}

LossGradient loss_grad(const TupleBatch& batch, const EnergyParams& p,
                       const NegativePolicy& policy, std::uint64_t seed,
                       DegeneracyPolicy degeneracy) {
  validate_params(p);
  const std::size_t B = batch.size();
  if (B < 2) throw BatchTooSmall(B);
  const std::size_t dim = batch.tuples[0].z_L.dim();

  // The double-mismatch ablation replaces two slots per negative and does
  // not fit the compact scratch; it runs through the reference path.
  if (policy.mode == NegativeMode::AllSingleAndDouble)
    return serial::loss_grad(batch, p, policy, seed, degeneracy);

  LossGradient out;
  out.report = sized_report(B);

  std::vector<AnchorGrad> scratch(B);
#pragma omp parallel
  {
    Vec gx, gy, gz;
#pragma omp for schedule(static)
    for (long long i = 0; i < static_cast<long long>(B); ++i)
      anchor_grad(batch, static_cast<std::size_t>(i), p, policy, seed, degeneracy,
                  scratch[static_cast<std::size_t>(i)], gx, gy, gz);
  }

  // Fixed ascending (anchor, negative) reduction keeps results identical
  // across thread counts.
  GradGrid align, uni, total;
  align.init(B, dim);
  uni.init(B, dim);
  total.init(B, dim);
  for (std::size_t i = 0; i < B; ++i) {
    const AnchorGrad& g = scratch[i];
    fill_report_slot(out.report, i, g.fwd);
    for (int m = 0; m < 3; ++m) {
      double* a = align.slot(i, m);
      double* u = uni.slot(i, m);
      double* t = total.slot(i, m);
      for (std::size_t k = 0; k < dim; ++k) {
        a[k] += g.own_align[m * dim + k];
        t[k] += g.own_align[m * dim + k];
      }
      for (std::size_t k = 0; k < dim; ++k) {
        u[k] += g.own_uni[m * dim + k];
        t[k] += g.own_uni[m * dim + k];
      }
    }
    for (std::size_t l = 0; l < g.fwd.sources.size(); ++l) {
      const NegativeSource& s = g.fwd.sources[l];
      const std::size_t idx[3] = {s.idx_L, s.idx_I, s.idx_F};
      const double* rep = &g.replaced[l * dim];
      for (int m = 0; m < 3; ++m) {
        if (idx[m] == i) continue;
        double* u = uni.slot(idx[m], m);
        double* t = total.slot(idx[m], m);
        for (std::size_t k = 0; k < dim; ++k) {
          u[k] += rep[k];
          t[k] += rep[k];
        }
      }
    }
  }
  out.report.loss = reduce_mean_loss(out.report.per_anchor_loss);

  const double inv_b = 1.0 / static_cast<double>(B);
  out.total = grid_to_tuples(total, inv_b);
  out.alignment = grid_to_tuples(align, inv_b);
  out.uniformity = grid_to_tuples(uni, inv_b);
  return out;
}

namespace serial {

LossReport info_nce(const TupleBatch& batch, const EnergyParams& p, const NegativePolicy& policy,
                    std::uint64_t seed) {
  validate_params(p);
  const std::size_t B = batch.size();
  if (B < 2) throw BatchTooSmall(B);
  LossReport r = sized_report(B);
  for (std::size_t i = 0; i < B; ++i) fill_report_slot(r, i, anchor_forward(batch, i, p, policy, seed));
  r.loss = reduce_mean_loss(r.per_anchor_loss);
  return r;
}

LossGradient loss_grad(const TupleBatch& batch, const EnergyParams& p,
                       const NegativePolicy& policy, std::uint64_t seed,
                       DegeneracyPolicy degeneracy) {
  validate_params(p);
  const std::size_t B = batch.size();
  if (B < 2) throw BatchTooSmall(B);
  const std::size_t dim = batch.tuples[0].z_L.dim();

  LossGradient out;
  out.report = sized_report(B);

  // Straightforward accumulation through the public composed gradients, in
  // ascending (anchor, negative) order.
  GradGrid align, uni, total;
  align.init(B, dim);
  uni.init(B, dim);
  total.init(B, dim);
  for (std::size_t i = 0; i < B; ++i) {
    const AnchorForward f = anchor_forward(batch, i, p, policy, seed);
    fill_report_slot(out.report, i, f);

    const double c_align = (1.0 - f.terms.p_plus) / p.tau;
    const TupleGradient g_plus =
        energy::energy_grad(slot_L(batch, i), slot_I(batch, i), slot_F(batch, i), p, degeneracy);
    axpy(align.slot(i, 0), c_align, g_plus.g_L);
    axpy(align.slot(i, 1), c_align, g_plus.g_I);
    axpy(align.slot(i, 2), c_align, g_plus.g_F);
    axpy(total.slot(i, 0), c_align, g_plus.g_L);
    axpy(total.slot(i, 1), c_align, g_plus.g_I);
    axpy(total.slot(i, 2), c_align, g_plus.g_F);

    for (std::size_t l = 0; l < f.sources.size(); ++l) {
      const NegativeSource& s = f.sources[l];
      const double c_uni = -f.terms.p_minus[l] / p.tau;
      const TupleGradient g = energy::energy_grad(slot_L(batch, s.idx_L), slot_I(batch, s.idx_I),
                                                  slot_F(batch, s.idx_F), p, degeneracy);
      axpy(uni.slot(s.idx_L, 0), c_uni, g.g_L);
      axpy(uni.slot(s.idx_I, 1), c_uni, g.g_I);
      axpy(uni.slot(s.idx_F, 2), c_uni, g.g_F);
      axpy(total.slot(s.idx_L, 0), c_uni, g.g_L);
      axpy(total.slot(s.idx_I, 1), c_uni, g.g_I);
      axpy(total.slot(s.idx_F, 2), c_uni, g.g_F);
    }
  }
  out.report.loss = reduce_mean_loss(out.report.per_anchor_loss);

  const double inv_b = 1.0 / static_cast<double>(B);
  out.total = grid_to_tuples(total, inv_b);
  out.alignment = grid_to_tuples(align, inv_b);
  out.uniformity = grid_to_tuples(uni, inv_b);
  return out;
}

}  // namespace serial
}  // namespace contrastive
}  // namespace salign
