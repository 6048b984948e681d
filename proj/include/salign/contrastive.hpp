#ifndef SALIGN_CONTRASTIVE_HPP
#define SALIGN_CONTRASTIVE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "salign/energy.hpp"

namespace salign {
namespace contrastive {

struct ModalityTuple {
  UnitEmbedding z_L, z_I, z_F;
};

struct TupleBatch {
  std::vector<ModalityTuple> tuples;
  std::size_t size() const { return tuples.size(); }
};

enum class NegativeMode {
  SingleModality,     // replace exactly one slot per negative: 3(B-1) tuples
  AllSingleAndDouble  // additionally replace each slot pair: 6(B-1) tuples
};

struct NegativePolicy {
  NegativeMode mode = NegativeMode::SingleModality;
  std::optional<std::size_t> per_anchor_cap;  // deterministic seeded subsample
};

struct LossReport {
  double loss = 0.0;                          // mean over anchors of -log p_plus
  std::vector<double> per_anchor_loss;        // size B
  std::vector<double> p_plus;                 // size B
  std::vector<std::vector<double>> p_minus;   // per anchor, per negative
  std::vector<double> e_plus;                 // raw matched energies
  std::vector<std::vector<double>> e_minus;   // raw negative energies
};

// Gradients of the mean loss with respect to every batch embedding, together
// with the alignment / uniformity split of the per-anchor gradient.
struct LossGradient {
  std::vector<energy::TupleGradient> total;       // size B
  std::vector<energy::TupleGradient> alignment;   // (1-p_i^+)/tau * grad E_i^+
  std::vector<energy::TupleGradient> uniformity;  // -sum_l p_il^-/tau * grad E_il^-
  LossReport report;
};

// Which batch slot each embedding of a negative tuple came from; used to
// route gradients back to their source embeddings.
struct NegativeSource {
  std::size_t idx_L, idx_I, idx_F;
};

// Negatives for one anchor: the anchor tuple with one (or two) modality slots
// replaced by another batch element's embedding. Order is deterministic:
// modality-major (L, I, F, then LI, LF, IF pairs), batch index ascending.
// A cap subsamples by seed, preserving that order.
std::vector<NegativeSource> negative_sources(std::size_t batch, std::size_t anchor,
                                             const NegativePolicy& policy, std::uint64_t seed);

std::vector<ModalityTuple> build_negatives(const TupleBatch& batch, std::size_t anchor,
                                           const NegativePolicy& policy, std::uint64_t seed);

// One anchor's softmax over energies with the max-shift; exposed so the
// stability contract can be exercised on raw energy values.
struct NceTerms {
  double loss;
  double p_plus;
  std::vector<double> p_minus;
};
NceTerms nce_from_energies(double e_plus, const std::vector<double>& e_minus, double tau);

LossReport info_nce(const TupleBatch& batch, const energy::EnergyParams& p,
                    const NegativePolicy& policy, std::uint64_t seed);

LossGradient loss_grad(const TupleBatch& batch, const energy::EnergyParams& p,
                       const NegativePolicy& policy, std::uint64_t seed,
                       energy::DegeneracyPolicy degeneracy = energy::DegeneracyPolicy::Error);

// Plain single-threaded implementations kept as the reference for the
// OpenMP kernels above; results must match bit for bit.
namespace serial {
LossReport info_nce(const TupleBatch& batch, const energy::EnergyParams& p,
                    const NegativePolicy& policy, std::uint64_t seed);
LossGradient loss_grad(const TupleBatch& batch, const energy::EnergyParams& p,
                       const NegativePolicy& policy, std::uint64_t seed,
                       energy::DegeneracyPolicy degeneracy = energy::DegeneracyPolicy::Error);
}  // namespace serial

}  // namespace contrastive
}  // namespace salign

#endif  // SALIGN_CONTRASTIVE_HPP
