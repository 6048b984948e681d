#include "salign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace salign {
namespace metrics {

double neg_mse(const std::vector<double>& preds, const std::vector<double>& truths) {
  if (preds.empty()) throw EmptyInput();
  if (preds.size() != truths.size()) throw LengthMismatch("predictions vs ground truth");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - truths[i];
    s += d * d;
  }
  return -s / static_cast<double>(preds.size());
}

ScoreResult control_relevant_score(const RawScoreMatrix& m) {
  const std::size_t n_models = m.models.size();
  const std::size_t n_dims = m.dimensions.size();
  if (n_models < 2) throw TooFewModels();
  if (n_dims < 1) throw EmptyInput();
  for (double v : m.values)
    if (!std::isfinite(v)) throw std::invalid_argument("score matrix entries must be finite");

  ScoreResult r;
  r.models = m.models;
  r.scores.assign(n_models, 0.0);
  std::size_t included = 0;
  for (std::size_t a = 0; a < n_dims; ++a) {
    double lo = m.at(0, a), hi = m.at(0, a);
    for (std::size_t i = 1; i < n_models; ++i) {
      lo = std::min(lo, m.at(i, a));
      hi = std::max(hi, m.at(i, a));
    }
    if (hi == lo) {
      r.excluded_dimensions.push_back(m.dimensions[a]);
      continue;
    }
    ++included;
    for (std::size_t i = 0; i < n_models; ++i)
      r.scores[i] += (m.at(i, a) - lo) / (hi - lo);
  }
  if (included == 0) throw AllDimensionsDegenerate();
  for (double& s : r.scores) s /= static_cast<double>(included);
  return r;
}

RawScoreMatrix read_score_csv(std::istream& in) {
  std::map<std::string, std::size_t> model_idx, dim_idx;
  std::vector<std::string> models, dims;
  std::vector<std::tuple<std::size_t, std::size_t, double>> entries;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string model, dim, value;
    if (!std::getline(ss, model, ',') || !std::getline(ss, dim, ',') ||
        !std::getline(ss, value))
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected model,dimension,value");
    double v;
    try {
      std::size_t pos = 0;
      v = std::stod(value, &pos);
      while (pos < value.size() && std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header line
      throw std::runtime_error("line " + std::to_string(line_no) + ": bad value '" + value + "'");
    }
    auto [mi, fresh_m] = model_idx.try_emplace(model, models.size());
    if (fresh_m) models.push_back(model);
    auto [di, fresh_d] = dim_idx.try_emplace(dim, dims.size());
    if (fresh_d) dims.push_back(dim);
    entries.emplace_back(mi->second, di->second, v);
  }

  RawScoreMatrix m;
  m.models = std::move(models);
  m.dimensions = std::move(dims);
  m.values.assign(m.models.size() * m.dimensions.size(),
                  std::numeric_limits<double>::quiet_NaN());
  for (const auto& [mi, di, v] : entries) {
    double& cell = m.values[mi * m.dimensions.size() + di];
    if (!std::isnan(cell))
      throw std::runtime_error("duplicate entry for (" + m.models[mi] + ", " +
                               m.dimensions[di] + ")");
    cell = v;
  }
  for (std::size_t i = 0; i < m.models.size(); ++i)
    for (std::size_t a = 0; a < m.dimensions.size(); ++a)
      if (std::isnan(m.at(i, a)))
        throw std::runtime_error("missing entry for (" + m.models[i] + ", " + m.dimensions[a] +
                                 ")");
  return m;
}

void write_score_csv(std::ostream& out, const ScoreResult& r) {
  out << "model,score\n";
  char buf[64];
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.scores[i]);
    out << r.models[i] << "," << buf << "\n";
  }
}

}  // namespace metrics
}  // namespace salign
