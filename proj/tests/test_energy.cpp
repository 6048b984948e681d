#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salign/energy.hpp"
#include "salign/gradcheck.hpp"
#include "salign/rng.hpp"

using namespace salign;
using namespace salign::energy;
using sphere::CosineTriple;
using sphere::normalize;
namespace nrg = salign::energy;

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

// Flat-family configuration x = e1, y = -e1, z = (cos t, sin t, 0).
struct FlatTriple {
  UnitEmbedding x, y, z;
};
FlatTriple flat(double theta) {
  return {basis(3, 0), normalize(Vec{-1.0, 0.0, 0.0}),
          normalize(Vec{std::cos(theta), std::sin(theta), 0.0})};
}

}  // namespace

TEST_CASE("energy closed forms") {
  EnergyParams p;  // alpha = 1, pair = LanguageFlow
  CHECK(nrg::energy(basis(3, 0), basis(3, 1), basis(3, 2), p) ==
        doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));

  const auto v = normalize(Vec{1.0, -2.0, 0.5});
  for (double alpha : {0.0, 0.5, 2.0}) {
    p.alpha = alpha;
    CHECK(nrg::energy(v, v, v, p) == doctest::Approx(-alpha).epsilon(1e-12));
  }

  p.alpha = 0.0;
  const auto f = flat(M_PI / 6.0);
  CHECK(nrg::energy(f.x, f.y, f.z, p) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("energy respects the pair selector") {
  EnergyParams p;
  p.alpha = 1.0;
  const auto x = basis(3, 0);
  const auto y = normalize(Vec{0.6, 0.8, 0.0});
  const auto z = basis(3, 2);
  const double area = sphere::triangle_area(x, y, z);

  p.pair = RegularizedPair::LanguageImage;
  CHECK(nrg::energy(x, y, z, p) == doctest::Approx(area - 0.6).epsilon(1e-12));
  p.pair = RegularizedPair::LanguageFlow;
  CHECK(nrg::energy(x, y, z, p) == doctest::Approx(area).epsilon(1e-12));
  p.pair = RegularizedPair::ImageFlow;
  CHECK(nrg::energy(x, y, z, p) == doctest::Approx(area).epsilon(1e-12));
}

TEST_CASE("area partials at the orthonormal triple") {
  const auto w = area_partials(CosineTriple(0.0, 0.0, 0.0));
  const double expected = -2.0 / (8.0 * (std::sqrt(3.0) / 2.0));
  CHECK(w.da == doctest::Approx(expected).epsilon(1e-12));
  CHECK(w.db == doctest::Approx(expected).epsilon(1e-12));
  CHECK(w.dc == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(-0.2886751).epsilon(1e-6));
}

TEST_CASE("area partials match finite differences in cosine space") {
  Rng rng(5);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 50) {
    const auto x = random_unit(4, rng);
    const auto y = random_unit(4, rng);
    const auto z = random_unit(4, rng);
    const auto t = sphere::pairwise_cosines(x, y, z);
    if (sphere::area_from_cosines(t) < 1e-2) continue;
    ++checked;
    const auto w = area_partials(t);

    const auto fd = [&](double da, double db, double dc) {
      const CosineTriple plus(t.a + da, t.b + db, t.c + dc);
      const CosineTriple minus(t.a - da, t.b - db, t.c - dc);
      return (sphere::area_from_cosines(plus) - sphere::area_from_cosines(minus)) / (2.0 * h);
    };
    CHECK(std::abs(w.da - fd(h, 0, 0)) <= 1e-5 * std::max(1.0, std::abs(w.da)));
    CHECK(std::abs(w.db - fd(0, h, 0)) <= 1e-5 * std::max(1.0, std::abs(w.db)));
    CHECK(std::abs(w.dc - fd(0, 0, h)) <= 1e-5 * std::max(1.0, std::abs(w.dc)));
  }
}

TEST_CASE("flat triangle stationarity of the misaligned pair") {
  for (double theta : {M_PI / 3.0, M_PI / 4.0, M_PI / 6.0}) {
    const auto f = flat(theta);
    const auto t = sphere::pairwise_cosines(f.x, f.y, f.z);
    const auto w = area_partials(t);
    CHECK(std::abs(w.da) < 1e-10);

    const auto [u_xy, u_xz] = edgewise_pulls(f.x, f.y, f.z);
    CHECK(norm(u_xy) < 1e-10);
    CHECK(norm(u_xz) > 1e-3);  // the pull acts along the (x, z) edge only
  }
}

TEST_CASE("area partials reject degenerate triangles") {
  CHECK_THROWS_AS(area_partials(CosineTriple(1.0, 1.0, 1.0)), DegenerateTriangle);
  const auto v = normalize(Vec{0.1, 0.9, -0.2});
  CHECK_THROWS_AS(area_grad(v, v, v), DegenerateTriangle);
}

TEST_CASE("area gradient is tangent and matches finite differences") {
  Rng rng(29);
  for (int rep = 0; rep < 30; ++rep) {
    const auto x = random_unit(8, rng);
    const auto y = random_unit(8, rng);
    const auto z = random_unit(8, rng);
    if (sphere::triangle_area(x, y, z) < 1e-3) continue;
    const auto g = area_grad(x, y, z);

    CHECK(std::abs(dot(g.g_L, x.values())) < 1e-10);
    CHECK(std::abs(dot(g.g_I, y.values())) < 1e-10);
    CHECK(std::abs(dot(g.g_F, z.values())) < 1e-10);

    const auto fd = gradcheck::fd_tangent_grad(
        x, [&](const UnitEmbedding& p) { return sphere::triangle_area(p, y, z); });
    CHECK(gradcheck::rel_error(g.g_L, fd) < 1e-4);
  }
}

TEST_CASE("energy gradient reductions") {
  EnergyParams p;
  p.alpha = 1.0;

  // Coincident points: zero area subgradient, zero tangent pull.
  const auto v = normalize(Vec{2.0, -1.0, 0.5});
  const auto g0 = energy_grad(v, v, v, p);
  CHECK(norm(g0.g_L) == 0.0);
  CHECK(norm(g0.g_I) == 0.0);
  CHECK(norm(g0.g_F) == 0.0);

  // alpha = 0 equals the bare area gradient.
  Rng rng(31);
  const auto x = random_unit(5, rng);
  const auto y = random_unit(5, rng);
  const auto z = random_unit(5, rng);
  p.alpha = 0.0;
  const auto ge = energy_grad(x, y, z, p);
  const auto ga = area_grad(x, y, z);
  CHECK(ge.g_L == ga.g_L);
  CHECK(ge.g_I == ga.g_I);
  CHECK(ge.g_F == ga.g_F);
}

TEST_CASE("energy gradient degeneracy policy") {
  EnergyParams p;
  const auto v = normalize(Vec{1.0, 1.0, 1.0});

  p.alpha = 0.0;
  CHECK_THROWS_AS(energy_grad(v, v, v, p), DegenerateTriangle);
  CHECK_NOTHROW(energy_grad(v, v, v, p, DegeneracyPolicy::ZeroArea));

  // Degenerate area with an active cosine term still yields the pair pull.
  p.alpha = 1.0;
  const auto x = basis(3, 0);
  const auto g = energy_grad(x, x, basis(3, 1), p);  // collapsed (x, x) edge, pair (L, F)
  CHECK(norm(g.g_L) > 0.9);  // -alpha * P_x(e2) has norm 1
}

TEST_CASE("energy gradient matches finite differences") {
  Rng rng(37);
  EnergyParams p;
  p.alpha = 1.0;
  int done = 0;
  while (done < 20) {
    const auto x = random_unit(8, rng);
    const auto y = random_unit(8, rng);
    const auto z = random_unit(8, rng);
    if (sphere::triangle_area(x, y, z) < 1e-3) continue;
    ++done;
    const auto g = energy_grad(x, y, z, p);
    const auto fd_z = gradcheck::fd_tangent_grad(
        z, [&](const UnitEmbedding& q) { return nrg::energy(x, y, q, p); });
    CHECK(gradcheck::rel_error(g.g_F, fd_z) < 1e-4);
  }
}

TEST_CASE("edgewise pulls sum to the negative area gradient") {
  Rng rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_unit(4, rng);
    const auto y = random_unit(4, rng);
    const auto z = random_unit(4, rng);
    if (sphere::triangle_area(x, y, z) < 1e-4) continue;
    const auto [u_xy, u_xz] = edgewise_pulls(x, y, z);
    const auto g = area_grad(x, y, z);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(std::abs(u_xy[i] + u_xz[i] + g.g_L[i]) < 1e-10);
  }
}

TEST_CASE("mirrored configuration gives equal pull magnitudes") {
  const double phi = 0.9;
  const auto x = basis(3, 0);
  const auto y = normalize(Vec{std::cos(phi), std::sin(phi), 0.0});
  const auto z = normalize(Vec{std::cos(phi), -std::sin(phi), 0.0});
  const auto [u_xy, u_xz] = edgewise_pulls(x, y, z);
  CHECK(norm(u_xy) == doctest::Approx(norm(u_xz)).epsilon(1e-12));
}

TEST_CASE("cancellation ratio") {
  const Vec e1{1.0, 0.0, 0.0};
  const Vec e2{0.0, 1.0, 0.0};
  const Vec neg_e1{-1.0, 0.0, 0.0};
  CHECK(energy::cancellation_ratio(e1, e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(energy::cancellation_ratio(e1, neg_e1) == doctest::Approx(0.0));
  CHECK(energy::cancellation_ratio(e1, e2) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(energy::cancellation_ratio(Vec{0.0, 0.0}, Vec{0.0, 0.0}), BothZero);
}

TEST_CASE("ascent rate and ascent property") {
  const auto e1 = basis(3, 0);
  const auto e2 = basis(3, 1);
  CHECK(ascent_rate(e1, e1) == 0.0);
  CHECK(ascent_rate(e1, e2) == 1.0);
  CHECK(ascent_rate(e1, normalize(Vec{-1.0, 0.0, 0.0})) == 0.0);

  Rng rng(43);
  const double eta = 1e-4;
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_unit(6, rng);
    const auto y = random_unit(6, rng);
    const double before = dot(x.values(), y.values());
    Vec stepped = x.values();
    add_scaled(stepped, eta, sphere::tangent_project(x, y.values()));
    const double after = dot(normalize(stepped).values(), y.values());
    if (ascent_rate(x, y) > 1e-12) {
      CHECK(after > before);
    } else {
      CHECK(std::abs(after - before) < 1e-9);
    }
  }
}

TEST_CASE("cosine distance identity") {
  const auto e1 = basis(3, 0);
  const auto e2 = basis(3, 1);
  auto [lhs1, rhs1] = cosine_distance_check(e1, e2);
  CHECK(lhs1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rhs1 == doctest::Approx(1.0).epsilon(1e-15));

  auto [lhs2, rhs2] = cosine_distance_check(e1, e1);
  CHECK(lhs2 == 0.0);
  CHECK(rhs2 == 0.0);

  auto [lhs3, rhs3] = cosine_distance_check(e1, normalize(Vec{-1.0, 0.0, 0.0}));
  CHECK(lhs3 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rhs3 == doctest::Approx(2.0).epsilon(1e-15));

  Rng rng(47);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = random_unit(8, rng);
    const auto y = random_unit(8, rng);
    auto [lhs, rhs] = cosine_distance_check(x, y);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("gradcheck harness passes at library tolerances") {
  gradcheck::Options opt;
  opt.trials = 10;
  opt.seed = 99;
  const auto rep = gradcheck::run(opt);
  CHECK(rep.worst_area < 1e-4);
  CHECK(rep.worst_energy < 1e-4);
  CHECK(rep.worst_loss < 1e-4);
}
