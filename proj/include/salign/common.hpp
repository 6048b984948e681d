#ifndef SALIGN_COMMON_HPP
#define SALIGN_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace salign {

using Vec = std::vector<double>;

// ---- error types -----------------------------------------------------------
// One exception class per named contract violation. All derive from
// std::invalid_argument or std::domain_error so callers can catch broadly.

struct ZeroVector : std::invalid_argument {
  ZeroVector() : std::invalid_argument("vector norm below 1e-12") {}
};
struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument("dimension mismatch: " + what) {}
};
struct TooFewPoints : std::invalid_argument {
  explicit TooFewPoints(std::size_t m)
      : std::invalid_argument("need at least 2 points, got " + std::to_string(m)) {}
};
struct TooManyPoints : std::invalid_argument {
  explicit TooManyPoints(std::size_t m)
      : std::invalid_argument("at most 20 points supported, got " + std::to_string(m)) {}
};
struct DegenerateTriangle : std::domain_error {
  DegenerateTriangle() : std::domain_error("triangle area below degeneracy threshold") {}
};
struct BothZero : std::invalid_argument {
  BothZero() : std::invalid_argument("both pull vectors are zero") {}
};
struct BatchTooSmall : std::invalid_argument {
  explicit BatchTooSmall(std::size_t b)
      : std::invalid_argument("batch needs at least 2 tuples, got " + std::to_string(b)) {}
};
struct ClipTooShort : std::invalid_argument {
  explicit ClipTooShort(long t)
      : std::invalid_argument("clip needs at least 5 frames, got " + std::to_string(t)) {}
};
struct DatasetTooSmall : std::invalid_argument {
  DatasetTooSmall() : std::invalid_argument("dataset smaller than batch size") {}
};
struct TooFewCandidates : std::invalid_argument {
  TooFewCandidates() : std::invalid_argument("retrieval needs at least 2 candidates") {}
};
struct DegenerateImage : std::invalid_argument {
  DegenerateImage() : std::invalid_argument("image must be at least 2x2 pixels") {}
};
struct NonPositiveDepth : std::domain_error {
  NonPositiveDepth() : std::domain_error("depth must be positive") {}
};
struct BehindCamera : std::domain_error {
  BehindCamera() : std::domain_error("point is behind the camera") {}
};
struct OutOfBounds : std::invalid_argument {
  OutOfBounds() : std::invalid_argument("sample location outside image bounds") {}
};
struct NoValidDepth : std::domain_error {
  NoValidDepth() : std::domain_error("no valid depth among interpolation neighbors") {}
};
struct LengthMismatch : std::invalid_argument {
  explicit LengthMismatch(const std::string& what)
      : std::invalid_argument("length mismatch: " + what) {}
};
struct EmptyInput : std::invalid_argument {
  EmptyInput() : std::invalid_argument("input sequence is empty") {}
};
struct TooFewModels : std::invalid_argument {
  TooFewModels() : std::invalid_argument("score matrix needs at least 2 models") {}
};
struct AllDimensionsDegenerate : std::domain_error {
  AllDimensionsDegenerate()
      : std::domain_error("every state dimension has equal scores across models") {}
};

// ---- small dense-vector helpers --------------------------------------------

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec operator*(double s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

inline void add_scaled(Vec& acc, double s, const Vec& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * v[i];
}

inline double clamp_cosine(double c) {
  if (c > 1.0) return 1.0;
  if (c < -1.0) return -1.0;
  return c;
}

}  // namespace salign

#endif  // SALIGN_COMMON_HPP
