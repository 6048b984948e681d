#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "salign/rng.hpp"
#include "salign/sphere.hpp"

using namespace salign;
using namespace salign::sphere;

namespace {

UnitEmbedding basis(std::size_t dim, std::size_t axis) {
  Vec v(dim, 0.0);
  v[axis] = 1.0;
  return UnitEmbedding(v);
}

UnitEmbedding random_unit(std::size_t dim, Rng& rng) {
  Vec v(dim);
  for (auto& x : v) x = rng.normal();
  return normalize(v);
}

// Random orthogonal matrix via Gram-Schmidt on Gaussian columns.
std::vector<Vec> random_orthogonal(std::size_t d, Rng& rng) {
  std::vector<Vec> q;
  for (std::size_t c = 0; c < d; ++c) {
    Vec v(d);
    for (auto& x : v) x = rng.normal();
    for (const auto& prev : q) add_scaled(v, -dot(prev, v), prev);
    const double n = norm(v);
    for (auto& x : v) x /= n;
    q.push_back(std::move(v));
  }
  return q;
}

UnitEmbedding rotate(const std::vector<Vec>& q, const UnitEmbedding& p) {
  const std::size_t d = p.dim();
  Vec out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i] += q[i][j] * p[j];
  return normalize(out);
}

}  // namespace

TEST_CASE("normalize basic cases") {
  const auto a = normalize(Vec{3.0, 4.0});
  CHECK(a[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(0.8).epsilon(1e-12));

  const auto b = normalize(Vec{1.0, 0.0, 0.0});
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);

  CHECK_THROWS_AS(normalize(Vec{0.0, 0.0}), ZeroVector);
  CHECK(std::abs(norm(normalize(Vec{1e-3, -2e-3, 5e-4}).values()) - 1.0) < 1e-12);
}

TEST_CASE("unit embedding invariants") {
  CHECK_THROWS(UnitEmbedding(Vec{1.0}));            // d >= 2
  CHECK_THROWS(UnitEmbedding(Vec{0.5, 0.5}));       // not unit
  CHECK_NOTHROW(UnitEmbedding(Vec{0.6, 0.8}));
}

TEST_CASE("tangent projection") {
  const auto e1 = basis(3, 0);
  const auto e2 = basis(3, 1);

  const Vec t1 = tangent_project(e1, e2.values());
  CHECK(t1 == e2.values());

  const Vec t2 = tangent_project(e1, e1.values());
  CHECK(norm(t2) < 1e-15);

  const Vec t3 = tangent_project(UnitEmbedding(Vec{1.0, 0.0}), Vec{1.0, 1.0});
  CHECK(t3[0] == 0.0);
  CHECK(t3[1] == 1.0);

  CHECK_THROWS_AS(tangent_project(e1, Vec{1.0, 0.0}), DimensionMismatch);

  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_unit(8, rng);
    Vec v(8);
    for (auto& c : v) c = rng.normal();
    const Vec p = tangent_project(x, v);
    CHECK(std::abs(dot(p, x.values())) < 1e-12);
    const Vec pp = tangent_project(x, p);
    for (std::size_t j = 0; j < p.size(); ++j) CHECK(std::abs(pp[j] - p[j]) < 1e-12);
  }
}

TEST_CASE("simplex volume on orthonormal tuples") {
  const std::vector<UnitEmbedding> tri{basis(3, 0), basis(3, 1), basis(3, 2)};
  CHECK(simplex_volume(tri) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));

  const std::vector<UnitEmbedding> tetra{basis(4, 0), basis(4, 1), basis(4, 2), basis(4, 3)};
  CHECK(simplex_volume(tetra) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("simplex volume edge cases") {
  const auto v = normalize(Vec{1.0, 2.0, -1.0});
  CHECK(simplex_volume({v, v, v}) == 0.0);

  // m = 2 reduces to the edge length.
  const auto a = basis(3, 0);
  const auto b = basis(3, 1);
  CHECK(simplex_volume({a, b}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(simplex_volume({a}), TooFewPoints);
  CHECK_THROWS_AS(simplex_volume({a, UnitEmbedding(Vec{1.0, 0.0})}), DimensionMismatch);

  std::vector<UnitEmbedding> many(21, a);
  CHECK_THROWS_AS(simplex_volume(many), TooManyPoints);
}

TEST_CASE("triangle area closed forms") {
  // Flat triangle: x = e1, y = -e1, z = (cos t, sin t, 0) has area |sin t|.
  const double theta = M_PI / 6.0;
  const auto x = basis(3, 0);
  const auto y = normalize(Vec{-1.0, 0.0, 0.0});
  const auto z = normalize(Vec{std::cos(theta), std::sin(theta), 0.0});
  CHECK(triangle_area(x, y, z) == doctest::Approx(0.5).epsilon(1e-10));

  const auto p = normalize(Vec{0.3, -0.4, 0.5});
  CHECK(triangle_area(p, p, p) == 0.0);

  CHECK(triangle_area(basis(3, 0), basis(3, 1), basis(3, 2)) ==
        doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("triangle area is permutation symmetric") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_unit(5, rng);
    const auto y = random_unit(5, rng);
    const auto z = random_unit(5, rng);
    const double a = triangle_area(x, y, z);
    CHECK(std::abs(triangle_area(y, z, x) - a) < 1e-10);
    CHECK(std::abs(triangle_area(z, x, y) - a) < 1e-10);
    CHECK(std::abs(triangle_area(x, z, y) - a) < 1e-10);
  }
}

TEST_CASE("pairwise cosines") {
  const auto t1 = pairwise_cosines(basis(3, 0), basis(3, 1), basis(3, 2));
  CHECK(t1.a == 0.0);
  CHECK(t1.b == 0.0);
  CHECK(t1.c == 0.0);

  const auto p = normalize(Vec{1.0, 1.0, 1.0});
  const auto t2 = pairwise_cosines(p, p, p);
  CHECK(t2.a == doctest::Approx(1.0).epsilon(1e-12));

  const auto t3 = pairwise_cosines(basis(3, 0), normalize(Vec{-1.0, 0.0, 0.0}), basis(3, 1));
  CHECK(t3.a == -1.0);
  CHECK(t3.b == 0.0);
  CHECK(t3.c == 0.0);

  CHECK_THROWS(CosineTriple(1.5, 0.0, 0.0));
}

TEST_CASE("area from cosines") {
  const double theta = M_PI / 4.0;
  const CosineTriple flat(-1.0, std::cos(theta), -std::cos(theta));
  CHECK(area_from_cosines(flat) == doctest::Approx(std::sin(theta)).epsilon(1e-12));

  CHECK(area_from_cosines(CosineTriple(1.0, 1.0, 1.0)) == 0.0);
  CHECK(area_from_cosines(CosineTriple(0.0, 0.0, 0.0)) ==
        doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("triangle area agrees with the cosine route") {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const auto x = random_unit(6, rng);
    const auto y = random_unit(6, rng);
    const auto z = random_unit(6, rng);
    const double direct = triangle_area(x, y, z);
    const double via_cos = area_from_cosines(pairwise_cosines(x, y, z));
    CHECK(std::abs(direct - via_cos) < 1e-10);
  }
}

TEST_CASE("simplex volume permutation invariance") {
  Rng rng(17);
  for (std::size_t d : {3u, 8u, 64u}) {
    for (std::size_t m : {3u, 4u, 5u}) {
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<UnitEmbedding> pts;
        for (std::size_t k = 0; k < m; ++k) pts.push_back(random_unit(d, rng));
        const double base = simplex_volume(pts);

        std::vector<std::size_t> order(m);
        for (std::size_t k = 0; k < m; ++k) order[k] = k;
        for (int shuffle = 0; shuffle < 4; ++shuffle) {
          for (std::size_t k = 0; k + 1 < m; ++k) {
            const auto j =
                k + static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m - 1 - k)));
            std::swap(order[k], order[j]);
          }
          std::vector<UnitEmbedding> perm;
          for (std::size_t k : order) perm.push_back(pts[k]);
          CHECK(std::abs(simplex_volume(perm) - base) < 1e-10);
        }

        // m = 3 agreement with the direct area formula.
        if (m == 3) CHECK(std::abs(base - triangle_area(pts[0], pts[1], pts[2])) < 1e-10);
      }
    }
  }
}

TEST_CASE("simplex volume rotation invariance") {
  Rng rng(19);
  const std::size_t d = 8;
  const auto q = random_orthogonal(d, rng);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<UnitEmbedding> pts, rotated;
    for (int k = 0; k < 4; ++k) {
      pts.push_back(random_unit(d, rng));
      rotated.push_back(rotate(q, pts.back()));
    }
    const double v0 = simplex_volume(pts);
    const double v1 = simplex_volume(rotated);
    CHECK(std::abs(v1 - v0) <= 1e-9 * std::max(1.0, std::abs(v0)));
  }
}

TEST_CASE("degenerate configurations have zero volume") {
  Rng rng(23);
  // Two coincident points.
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = random_unit(6, rng);
    const auto b = random_unit(6, rng);
    CHECK(simplex_volume({a, b, a}) < 1e-9);
  }
  // Four points on a planar circle: edge vectors span two dimensions.
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<UnitEmbedding> pts;
    for (int k = 0; k < 4; ++k) {
      const double phi = rng.uniform(0.0, 6.28);
      pts.push_back(normalize(Vec{std::cos(phi), std::sin(phi), 0.0, 0.0}));
    }
    CHECK(simplex_volume(pts) < 1e-9);
  }
}

TEST_CASE("gram matrix construction and validation") {
  const std::vector<UnitEmbedding> pts{basis(3, 0), basis(3, 1), basis(3, 2)};
  const auto g = gram_matrix(edge_matrix(pts));
  CHECK(g.size() == 2);
  CHECK(g.at(0, 0) == doctest::Approx(2.0));
  CHECK(g.at(0, 1) == doctest::Approx(1.0));
  CHECK(g.at(1, 1) == doctest::Approx(2.0));

  CHECK_THROWS(GramMatrix({1.0, 0.5, 0.0, 1.0}, 2));     // asymmetric
  CHECK_THROWS(GramMatrix({1.0, 2.0, 2.0, 1.0}, 2));     // indefinite
  CHECK_NOTHROW(GramMatrix({1.0, 1.0, 1.0, 1.0}, 2));    // semidefinite boundary
}
