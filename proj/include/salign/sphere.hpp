#ifndef SALIGN_SPHERE_HPP
#define SALIGN_SPHERE_HPP

#include <cstddef>
#include <vector>

#include "salign/common.hpp"

namespace salign {

// A unit-norm embedding on the (d-1)-sphere, d >= 2. The constructor checks
// the norm to 1e-9; use normalize() to build one from an arbitrary vector.
class UnitEmbedding {
 public:
  explicit UnitEmbedding(Vec values);

  const Vec& values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  Vec values_;
};

namespace sphere {

// Columns z_k - z_1 of the simplex spanned by the input points.
struct EdgeMatrix {
  std::vector<Vec> columns;  // m-1 columns, each of dimension d
};

// G = U^T U for the edge matrix U; symmetric positive semidefinite.
class GramMatrix {
 public:
  explicit GramMatrix(std::vector<double> entries, std::size_t n);

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

 private:
  std::vector<double> entries_;  // row-major n x n
  std::size_t n_;
};

// Pairwise inner products a = <x,y>, b = <x,z>, c = <y,z>, clamped to [-1, 1].
struct CosineTriple {
  CosineTriple(double a_, double b_, double c_);
  double a, b, c;
};

UnitEmbedding normalize(const Vec& v);

// v minus its radial component at x: P_x v = v - <x,v> x.
Vec tangent_project(const UnitEmbedding& x, const Vec& v);

EdgeMatrix edge_matrix(const std::vector<UnitEmbedding>& points);
GramMatrix gram_matrix(const EdgeMatrix& edges);

// sqrt(max(det G, 0)) / (m-1)! for m points; 0 signals a degenerate simplex.
double simplex_volume(const std::vector<UnitEmbedding>& points);

double triangle_area(const UnitEmbedding& x, const UnitEmbedding& y, const UnitEmbedding& z);

CosineTriple pairwise_cosines(const UnitEmbedding& x, const UnitEmbedding& y,
                              const UnitEmbedding& z);

// Triangle area expressed through the pairwise cosines; radicand clamped at 0.
double area_from_cosines(const CosineTriple& t);

}  // namespace sphere
}  // namespace salign

#endif  // SALIGN_SPHERE_HPP
