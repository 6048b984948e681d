#include "salign/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "salign/rng.hpp"

namespace salign {
namespace gradcheck {

using contrastive::TupleBatch;
using energy::EnergyParams;

Vec fd_tangent_grad(const UnitEmbedding& x, const std::function<double(const UnitEmbedding&)>& f,
                    double h) {
  const std::size_t d = x.dim();
  Vec g(d);
  for (std::size_t i = 0; i < d; ++i) {
    Vec plus = x.values();
    Vec minus = x.values();
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(sphere::normalize(plus)) - f(sphere::normalize(minus))) / (2.0 * h);
  }
  return sphere::tangent_project(x, g);
}

double rel_error(const Vec& analytic, const Vec& fd, double floor) {
  double diff = 0.0, scale = floor;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - fd[i]));
    scale = std::max(scale, std::abs(fd[i]));
  }
  return diff / scale;
}

namespace {

UnitEmbedding random_unit(std::size_t dim, Rng& rng) {
  Vec v(dim);
  for (auto& x : v) x = rng.normal();
  return sphere::normalize(v);
}

// Resample until the matched triangle is comfortably non-degenerate so the
// finite-difference step stays inside the smooth region.
std::vector<UnitEmbedding> random_triple(std::size_t dim, Rng& rng) {
  for (;;) {
    std::vector<UnitEmbedding> t{random_unit(dim, rng), random_unit(dim, rng),
                                 random_unit(dim, rng)};
    if (sphere::triangle_area(t[0], t[1], t[2]) > 1e-3) return t;
  }
}

}  // namespace

Report run(const Options& opt) {
  if (opt.trials < 1) throw std::invalid_argument("gradcheck needs at least 1 trial");
  if (opt.batch < 2) throw BatchTooSmall(opt.batch);

  Report rep;
  rep.trials = opt.trials;
  Rng rng(opt.seed);
  const contrastive::NegativePolicy policy{};

  for (std::int64_t trial = 0; trial < opt.trials; ++trial) {
    // area_grad
    {
      const auto t = random_triple(opt.dim, rng);
      const auto g = energy::area_grad(t[0], t[1], t[2]);
      const Vec* analytic[3] = {&g.g_L, &g.g_I, &g.g_F};
      for (int which = 0; which < 3; ++which) {
        const auto fd = fd_tangent_grad(
            t[which],
            [&](const UnitEmbedding& p) {
              return sphere::triangle_area(which == 0 ? p : t[0], which == 1 ? p : t[1],
                                           which == 2 ? p : t[2]);
            },
            opt.h);
        rep.worst_area = std::max(rep.worst_area, rel_error(*analytic[which], fd));
      }
    }

    // energy_grad
    {
      const auto t = random_triple(opt.dim, rng);
      const auto g = energy::energy_grad(t[0], t[1], t[2], opt.params);
      const Vec* analytic[3] = {&g.g_L, &g.g_I, &g.g_F};
      for (int which = 0; which < 3; ++which) {
        const auto fd = fd_tangent_grad(
            t[which],
            [&](const UnitEmbedding& p) {
              return energy::energy(which == 0 ? p : t[0], which == 1 ? p : t[1],
                                    which == 2 ? p : t[2], opt.params);
            },
            opt.h);
        rep.worst_energy = std::max(rep.worst_energy, rel_error(*analytic[which], fd));
      }
    }

    // loss_grad over a full batch
    {
      TupleBatch batch;
      for (std::size_t i = 0; i < opt.batch; ++i) {
        auto t = random_triple(opt.dim, rng);
        batch.tuples.push_back({t[0], t[1], t[2]});
      }
      const std::uint64_t nce_seed = opt.seed + static_cast<std::uint64_t>(trial);
      const auto lg = contrastive::loss_grad(batch, opt.params, policy, nce_seed);

      for (std::size_t i = 0; i < opt.batch; ++i) {
        for (int slot = 0; slot < 3; ++slot) {
          const UnitEmbedding& base = slot == 0   ? batch.tuples[i].z_L
                                      : slot == 1 ? batch.tuples[i].z_I
                                                  : batch.tuples[i].z_F;
          const auto fd = fd_tangent_grad(
              base,
              [&](const UnitEmbedding& p) {
                TupleBatch perturbed = batch;
                if (slot == 0)
                  perturbed.tuples[i].z_L = p;
                else if (slot == 1)
                  perturbed.tuples[i].z_I = p;
                else
                  perturbed.tuples[i].z_F = p;
                return contrastive::info_nce(perturbed, opt.params, policy, nce_seed).loss;
              },
              opt.h);
          const Vec& analytic = slot == 0   ? lg.total[i].g_L
                                : slot == 1 ? lg.total[i].g_I
                                            : lg.total[i].g_F;
          rep.worst_loss = std::max(rep.worst_loss, rel_error(analytic, fd));
        }
      }
    }
  }
  return rep;
}

}  // namespace gradcheck
}  // namespace salign
