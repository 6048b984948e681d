// Test-only softmax oracle at 50 decimal digits of working precision.
// Recomputes the energy softmax naively (no max shift) so it is independent
// of the library's log-sum-exp path.
#ifndef TESTS_MPFR_SOFTMAX_HPP
#define TESTS_MPFR_SOFTMAX_HPP

#include <mpfr.h>

#include <vector>

struct HighPrecisionSoftmax {
  double loss;
  double p_plus;
  std::vector<double> p_minus;
};

inline HighPrecisionSoftmax mpfr_softmax(double e_plus, const std::vector<double>& e_minus,
                                         double tau) {
  // 50 decimal digits ~ 167 bits; use 192 for headroom.
  constexpr mpfr_prec_t prec = 192;
  mpfr_t w_plus, denom, tmp, p;
  mpfr_inits2(prec, w_plus, denom, tmp, p, (mpfr_ptr) nullptr);

  mpfr_set_d(w_plus, -e_plus / tau, MPFR_RNDN);
  mpfr_exp(w_plus, w_plus, MPFR_RNDN);
  mpfr_set(denom, w_plus, MPFR_RNDN);

  std::vector<double> weights(e_minus.size());
  for (std::size_t i = 0; i < e_minus.size(); ++i) {
    mpfr_set_d(tmp, -e_minus[i] / tau, MPFR_RNDN);
    mpfr_exp(tmp, tmp, MPFR_RNDN);
    mpfr_add(denom, denom, tmp, MPFR_RNDN);
    weights[i] = 0.0;  // recomputed below once denom is final
  }

  HighPrecisionSoftmax out;
  mpfr_div(p, w_plus, denom, MPFR_RNDN);
  out.p_plus = mpfr_get_d(p, MPFR_RNDN);
  mpfr_log(p, p, MPFR_RNDN);
  mpfr_neg(p, p, MPFR_RNDN);
  out.loss = mpfr_get_d(p, MPFR_RNDN);

  for (std::size_t i = 0; i < e_minus.size(); ++i) {
    mpfr_set_d(tmp, -e_minus[i] / tau, MPFR_RNDN);
    mpfr_exp(tmp, tmp, MPFR_RNDN);
    mpfr_div(tmp, tmp, denom, MPFR_RNDN);
    weights[i] = mpfr_get_d(tmp, MPFR_RNDN);
  }
  out.p_minus = std::move(weights);

  mpfr_clears(w_plus, denom, tmp, p, (mpfr_ptr) nullptr);
  return out;
}

#endif  // TESTS_MPFR_SOFTMAX_HPP
