#include "salign/energy.hpp"

#include <cmath>

namespace salign {
namespace energy {

using sphere::CosineTriple;

namespace {

double pair_cosine(const UnitEmbedding& z_L, const UnitEmbedding& z_I, const UnitEmbedding& z_F,
                   RegularizedPair pair) {
  switch (pair) {
    case RegularizedPair::LanguageFlow:
      return clamp_cosine(dot(z_L.values(), z_F.values()));
    case RegularizedPair::LanguageImage:
      return clamp_cosine(dot(z_L.values(), z_I.values()));
    case RegularizedPair::ImageFlow:
      return clamp_cosine(dot(z_I.values(), z_F.values()));
  }
  return 0.0;  // unreachable
}

}  // namespace

double energy(const UnitEmbedding& z_L, const UnitEmbedding& z_I, const UnitEmbedding& z_F,
              const EnergyParams& p) {
  const double area = sphere::triangle_area(z_L, z_I, z_F);
  return area - p.alpha * pair_cosine(z_L, z_I, z_F, p.pair);
}

AreaPartials area_partials(const CosineTriple& t) {
  const double area = sphere::area_from_cosines(t);
  if (area <= kDegenerateArea) throw DegenerateTriangle();
  // A = 0.5*sqrt(R), R = (2-2a)(2-2b) - h^2, h = 1+c-a-b, so dA/dq = dR/dq / (8A).
  const double h = 1.0 + t.c - t.a - t.b;
  const double scale = 1.0 / (8.0 * area);
  return AreaPartials{
      (-2.0 * (2.0 - 2.0 * t.b) + 2.0 * h) * scale,
      (-2.0 * (2.0 - 2.0 * t.a) + 2.0 * h) * scale,
      (-2.0 * h) * scale,
  };
}

TupleGradient area_grad(const UnitEmbedding& x, const UnitEmbedding& y, const UnitEmbedding& z) {
  const CosineTriple t = sphere::pairwise_cosines(x, y, z);
  const AreaPartials w = area_partials(t);

  // Each vertex sees the two edges it participates in.
  TupleGradient g;
  g.g_L = Vec(x.dim(), 0.0);
  add_scaled(g.g_L, w.da, sphere::tangent_project(x, y.values()));
  add_scaled(g.g_L, w.db, sphere::tangent_project(x, z.values()));

  g.g_I = Vec(x.dim(), 0.0);
  add_scaled(g.g_I, w.da, sphere::tangent_project(y, x.values()));
  add_scaled(g.g_I, w.dc, sphere::tangent_project(y, z.values()));

  g.g_F = Vec(x.dim(), 0.0);
  add_scaled(g.g_F, w.db, sphere::tangent_project(z, x.values()));
  add_scaled(g.g_F, w.dc, sphere::tangent_project(z, y.values()));
  return g;
}

TupleGradient energy_grad(const UnitEmbedding& z_L, const UnitEmbedding& z_I,
                          const UnitEmbedding& z_F, const EnergyParams& p,
                          DegeneracyPolicy policy) {
  const double area = sphere::triangle_area(z_L, z_I, z_F);

  TupleGradient g;
  if (area > kDegenerateArea) {
    g = area_grad(z_L, z_I, z_F);
  } else {
    if (policy == DegeneracyPolicy::Error && p.alpha == 0.0) throw DegenerateTriangle();
    g.g_L = Vec(z_L.dim(), 0.0);
    g.g_I = Vec(z_L.dim(), 0.0);
    g.g_F = Vec(z_L.dim(), 0.0);
  }

  // grad_p (-alpha <p, q>) = -alpha P_p q for the selected pair.
  switch (p.pair) {
    case RegularizedPair::LanguageFlow:
      add_scaled(g.g_L, -p.alpha, sphere::tangent_project(z_L, z_F.values()));
      add_scaled(g.g_F, -p.alpha, sphere::tangent_project(z_F, z_L.values()));
      break;
    case RegularizedPair::LanguageImage:
      add_scaled(g.g_L, -p.alpha, sphere::tangent_project(z_L, z_I.values()));
      add_scaled(g.g_I, -p.alpha, sphere::tangent_project(z_I, z_L.values()));
      break;
    case RegularizedPair::ImageFlow:
      add_scaled(g.g_I, -p.alpha, sphere::tangent_project(z_I, z_F.values()));
      add_scaled(g.g_F, -p.alpha, sphere::tangent_project(z_F, z_I.values()));
      break;
  }
  return g;
}

std::pair<Vec, Vec> edgewise_pulls(const UnitEmbedding& x, const UnitEmbedding& y,
                                   const UnitEmbedding& z) {
  const AreaPartials w = area_partials(sphere::pairwise_cosines(x, y, z));
  Vec u_xy = (-w.da) * sphere::tangent_project(x, y.values());
  Vec u_xz = (-w.db) * sphere::tangent_project(x, z.values());
  return {std::move(u_xy), std::move(u_xz)};
}

double cancellation_ratio(const Vec& u1, const Vec& u2) {
  if (u1.size() != u2.size()) throw DimensionMismatch("cancellation_ratio inputs");
  const double n1 = norm(u1);
  const double n2 = norm(u2);
  if (n1 + n2 <= 1e-12) throw BothZero();
  return norm(u1 + u2) / (n1 + n2);
}

double ascent_rate(const UnitEmbedding& x, const UnitEmbedding& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("ascent_rate inputs");
  const double c = clamp_cosine(dot(x.values(), y.values()));
  return std::max(1.0 - c * c, 0.0);
}

std::pair<double, double> cosine_distance_check(const UnitEmbedding& x, const UnitEmbedding& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("cosine_distance_check inputs");
  const double lhs = 1.0 - dot(x.values(), y.values());
  const Vec d = x.values() - y.values();
  return {lhs, 0.5 * dot(d, d)};
}

}  // namespace energy
}  // namespace salign
