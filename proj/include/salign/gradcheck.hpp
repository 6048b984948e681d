#ifndef SALIGN_GRADCHECK_HPP
#define SALIGN_GRADCHECK_HPP

#include <cstdint>
#include <functional>

#include "salign/contrastive.hpp"

namespace salign {
namespace gradcheck {

// Central finite difference of a scalar function of one embedding, using the
// renormalization retraction x -> normalize(x + h e_i), projected back to the
// tangent space at x. Touches only scalar evaluations, never the analytic
// gradient code it is used to check.
Vec fd_tangent_grad(const UnitEmbedding& x, const std::function<double(const UnitEmbedding&)>& f,
                    double h = 1e-5);

// max_i |a_i - b_i| / max(|b|_inf, floor)
double rel_error(const Vec& analytic, const Vec& fd, double floor = 1e-12);

struct Options {
  std::int64_t trials = 100;
  std::size_t dim = 8;
  std::size_t batch = 4;
  std::uint64_t seed = 0;
  double h = 1e-5;
  energy::EnergyParams params{1.0, 0.07, energy::RegularizedPair::LanguageFlow};
};

struct Report {
  double worst_area = 0.0;    // area_grad vs finite differences
  double worst_energy = 0.0;  // energy_grad vs finite differences
  double worst_loss = 0.0;    // loss_grad total vs finite differences
  std::int64_t trials = 0;
  bool pass(double tol = 1e-4) const {
    return worst_area <= tol && worst_energy <= tol && worst_loss <= tol;
  }
};

// Random non-degenerate instances; the worst relative error per operation.
Report run(const Options& opt);

}  // namespace gradcheck
}  // namespace salign

#endif  // SALIGN_GRADCHECK_HPP
