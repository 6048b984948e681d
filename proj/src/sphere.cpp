#include "salign/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace salign {

UnitEmbedding::UnitEmbedding(Vec values) : values_(std::move(values)) {
  if (values_.size() < 2)
    throw DimensionMismatch("embedding dimension must be >= 2, got " +
                            std::to_string(values_.size()));
  const double n = norm(values_);
  if (std::abs(n - 1.0) > 1e-9)
    throw std::invalid_argument("embedding is not unit norm (norm = " + std::to_string(n) + ")");
}

namespace sphere {
namespace {

// Eigenvalues of a small symmetric matrix via cyclic Jacobi sweeps.
std::vector<double> jacobi_eigenvalues(std::vector<double> m, std::size_t n) {
  if (n == 1) return {m[0]};
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m[p * n + q] * m[p * n + q];
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (apq == 0.0) continue;
        const double app = m[p * n + p];
        const double aqq = m[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m[k * n + p];
          const double mkq = m[k * n + q];
          m[k * n + p] = c * mkp - s * mkq;
          m[k * n + q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m[p * n + k];
          const double mqk = m[q * n + k];
          m[p * n + k] = c * mpk - s * mqk;
          m[q * n + k] = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = m[i * n + i];
  return eig;
}

double factorial(std::size_t k) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return static_cast<double>(f);
}

void check_same_dim(const std::vector<UnitEmbedding>& points) {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].dim() != points[0].dim())
      throw DimensionMismatch("point " + std::to_string(i) + " has dimension " +
                              std::to_string(points[i].dim()) + ", expected " +
                              std::to_string(points[0].dim()));
}

}  // namespace

GramMatrix::GramMatrix(std::vector<double> entries, std::size_t n)
    : entries_(std::move(entries)), n_(n) {
  if (entries_.size() != n_ * n_) throw DimensionMismatch("gram entries vs size");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (std::abs(at(i, j) - at(j, i)) > 1e-12)
        throw std::invalid_argument("gram matrix is not symmetric");
  const auto eig = jacobi_eigenvalues(entries_, n_);
  if (*std::min_element(eig.begin(), eig.end()) < -1e-10)
    throw std::invalid_argument("gram matrix is not positive semidefinite");
}

CosineTriple::CosineTriple(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  for (double v : {a, b, c})
    if (v < -1.0 - 1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument("cosine outside [-1, 1]: " + std::to_string(v));
}

UnitEmbedding normalize(const Vec& v) {
  const double n = norm(v);
  if (n <= 1e-12) throw ZeroVector();
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return UnitEmbedding(std::move(out));
}

Vec tangent_project(const UnitEmbedding& x, const Vec& v) {
  if (x.dim() != v.size()) throw DimensionMismatch("tangent_project base vs vector");
  const double r = dot(x.values(), v);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - r * x[i];
  return out;
}

EdgeMatrix edge_matrix(const std::vector<UnitEmbedding>& points) {
  if (points.size() < 2) throw TooFewPoints(points.size());
  check_same_dim(points);
  EdgeMatrix e;
  e.columns.reserve(points.size() - 1);
  for (std::size_t k = 1; k < points.size(); ++k)
    e.columns.push_back(points[k].values() - points[0].values());
  return e;
}

GramMatrix gram_matrix(const EdgeMatrix& edges) {
  const std::size_t n = edges.columns.size();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = dot(edges.columns[i], edges.columns[j]);
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  return GramMatrix(std::move(g), n);
}

double simplex_volume(const std::vector<UnitEmbedding>& points) {
  const std::size_t m = points.size();
  if (m < 2) throw TooFewPoints(m);
  if (m > 20) throw TooManyPoints(m);
  check_same_dim(points);

  const EdgeMatrix edges = edge_matrix(points);
  const std::size_t n = m - 1;
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = dot(edges.columns[i], edges.columns[j]);
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  // det(G) through the spectrum, clamping nonpositive eigenvalues at 0.
  // Eigenvalues below the rounding floor of the largest one are pure noise
  // from rank-deficient configurations and are zeroed so degenerate tuples
  // report an exact zero volume under any input ordering.
  const auto eig = jacobi_eigenvalues(std::move(g), n);
  const double lambda_max = *std::max_element(eig.begin(), eig.end());
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(lambda_max, 0.0);
  double det = 1.0;
  for (double lambda : eig) det *= (lambda <= floor) ? 0.0 : lambda;
  return std::sqrt(det) / factorial(n);
}

double triangle_area(const UnitEmbedding& x, const UnitEmbedding& y, const UnitEmbedding& z) {
  if (x.dim() != y.dim() || x.dim() != z.dim())
    throw DimensionMismatch("triangle_area inputs");
  const Vec u = y.values() - x.values();
  const Vec v = z.values() - x.values();
  const double uu = dot(u, u);
  const double vv = dot(v, v);
  const double uv = dot(u, v);
  return 0.5 * std::sqrt(std::max(uu * vv - uv * uv, 0.0));
}

CosineTriple pairwise_cosines(const UnitEmbedding& x, const UnitEmbedding& y,
                              const UnitEmbedding& z) {
  if (x.dim() != y.dim() || x.dim() != z.dim())
    throw DimensionMismatch("pairwise_cosines inputs");
  return CosineTriple(clamp_cosine(dot(x.values(), y.values())),
                      clamp_cosine(dot(x.values(), z.values())),
                      clamp_cosine(dot(y.values(), z.values())));
}

double area_from_cosines(const CosineTriple& t) {
  // With u = y-x, v = z-x: |u|^2 = 2-2a, |v|^2 = 2-2b, <u,v> = 1+c-a-b.
  const double h = 1.0 + t.c - t.a - t.b;
  const double radicand = (2.0 - 2.0 * t.a) * (2.0 - 2.0 * t.b) - h * h;
  return 0.5 * std::sqrt(std::max(radicand, 0.0));
}

}  // namespace sphere
}  // namespace salign
