#ifndef SALIGN_ENERGY_HPP
#define SALIGN_ENERGY_HPP

#include <utility>

#include "salign/sphere.hpp"

namespace salign {
namespace energy {

// Which modality pair the cosine regularizer attracts. Slots are named after
// the (language, image-transition, flow) tuple order used across the library.
enum class RegularizedPair { LanguageFlow, LanguageImage, ImageFlow };

struct EnergyParams {
  double alpha = 1.0;  // cosine-regularizer weight, >= 0
  double tau = 0.07;   // contrastive temperature, > 0
  RegularizedPair pair = RegularizedPair::LanguageFlow;
};

// Behavior when the triangle area falls below the degeneracy threshold:
// Error throws DegenerateTriangle; ZeroArea substitutes a zero subgradient
// for the area term (the training-loop policy).
enum class DegeneracyPolicy { Error, ZeroArea };

// Area gradients are undefined at zero area; below this the area term is
// treated as degenerate.
inline constexpr double kDegenerateArea = 1e-8;

// Tangent-space gradients for one (z_L, z_I, z_F) tuple.
struct TupleGradient {
  Vec g_L, g_I, g_F;
};

struct AreaPartials {
  double da, db, dc;
};

double energy(const UnitEmbedding& z_L, const UnitEmbedding& z_I, const UnitEmbedding& z_F,
              const EnergyParams& p);

// Closed-form partials of A(a,b,c) = 0.5*sqrt((2-2a)(2-2b) - (1+c-a-b)^2).
AreaPartials area_partials(const sphere::CosineTriple& t);

// Riemannian gradient of the triangle area at each vertex:
//   grad_x A = dA/da * P_x y + dA/db * P_x z, and cyclically for y, z.
TupleGradient area_grad(const UnitEmbedding& x, const UnitEmbedding& y, const UnitEmbedding& z);

TupleGradient energy_grad(const UnitEmbedding& z_L, const UnitEmbedding& z_I,
                          const UnitEmbedding& z_F, const EnergyParams& p,
                          DegeneracyPolicy policy = DegeneracyPolicy::Error);

// The two edge-wise pulls acting on x under area descent:
//   u_xy = -dA/da * P_x y,  u_xz = -dA/db * P_x z,  u_xy + u_xz = -grad_x A.
std::pair<Vec, Vec> edgewise_pulls(const UnitEmbedding& x, const UnitEmbedding& y,
                                   const UnitEmbedding& z);

// |u1 + u2| / (|u1| + |u2|); 1 when aligned, 0 at full cancellation.
double cancellation_ratio(const Vec& u1, const Vec& u2);

// Directional derivative of <x, y> along the tangent pull P_x y: 1 - <x,y>^2.
double ascent_rate(const UnitEmbedding& x, const UnitEmbedding& y);

// (1 - <x,y>, 0.5*|x - y|^2); equal for unit vectors up to rounding.
std::pair<double, double> cosine_distance_check(const UnitEmbedding& x, const UnitEmbedding& y);

}  // namespace energy
}  // namespace salign

#endif  // SALIGN_ENERGY_HPP
