#ifndef SALIGN_METRICS_HPP
#define SALIGN_METRICS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "salign/common.hpp"

namespace salign {
namespace metrics {

// Probe prediction scores r_{m,a}: one row per model, one column per state
// dimension, each entry a negative mean squared error.
struct RawScoreMatrix {
  std::vector<std::string> models;
  std::vector<std::string> dimensions;
  std::vector<double> values;  // row-major models x dimensions

  double at(std::size_t m, std::size_t a) const { return values[m * dimensions.size() + a]; }
};

struct ScoreResult {
  std::vector<std::string> models;
  std::vector<double> scores;                  // S_m in [0, 1]
  std::vector<std::string> excluded_dimensions;  // max == min across models
};

double neg_mse(const std::vector<double>& preds, const std::vector<double>& truths);

// Min-max normalize each dimension across models and average; dimensions
// where all models tie are excluded (and reported).
ScoreResult control_relevant_score(const RawScoreMatrix& m);

// Delimited text: "model,dimension,value" per line; '#' comments and an
// optional header line are skipped. Every (model, dimension) pair must
// appear exactly once.
RawScoreMatrix read_score_csv(std::istream& in);
void write_score_csv(std::ostream& out, const ScoreResult& r);

}  // namespace metrics
}  // namespace salign

#endif  // SALIGN_METRICS_HPP
