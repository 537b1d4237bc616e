#include <doctest.h>

#include <stdexcept>
#include <array>
#include <random>

#include "edgems/metrics.hpp"

using namespace edgems;

namespace {

FineGrid make_fine(int n) { return FineGrid{n, n, 1.0 / n}; }

Vector random_nodal(const FineGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector v(g.node_count());
  for (int p = 0; p < g.node_count(); ++p)
    v[p] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.3;
  return v;
}

// independent oracle: edge-midpoint quadrature (exact for P1 squares)
double quadrature_weighted_l2_sq(const FineGrid& g, const CoefficientField& f,
                                 const Vector& w) {
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      for (int t = 0; t < 2; ++t) {
        const auto tri = g.triangle_nodes(i, j, t);
        for (int e = 0; e < 3; ++e) {
          const double mid = 0.5 * (w[tri[e]] + w[tri[(e + 1) % 3]]);
          acc += f.cell(i, j) * (0.5 * g.h * g.h) / 3.0 * mid * mid;
        }
      }
    }
  }
  return acc;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("identical and scaled inputs") {
  const FineGrid g = make_fine(4);
  const CoefficientField f = constant_field(g, 2.0);
  const Vector u = random_nodal(g, 1);
  CHECK(weighted_l2_error(g, f, u, u) == 0.0);
  CHECK(energy_error(g, f, u, u) == 0.0);
  CHECK(weighted_l2_error(g, f, 2.0 * u, u) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(energy_error(g, f, Vector::Zero(g.node_count()), u) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("weighted L2 form matches the quadrature oracle") {
  const FineGrid g = make_fine(2);
  const CoefficientField f = synthetic_field(g, SyntheticKind::Mixed, 30, 5);
  const Vector u = random_nodal(g, 7);
  const Vector v = random_nodal(g, 8);
  const Vector d = u - v;
  CHECK(weighted_l2_product(g, f, d, d) ==
        doctest::Approx(quadrature_weighted_l2_sq(g, f, d)).epsilon(1e-12));
}

TEST_CASE("errors are invariant under coefficient scaling") {
  const FineGrid g = make_fine(8);
  CoefficientField f = synthetic_field(g, SyntheticKind::Inclusions, 1e3, 9);
  CoefficientField fc = f;
  for (double& v : fc.value) v *= 42.0;
  fc.min_value *= 42.0;
  fc.max_value *= 42.0;
  const Vector u = random_nodal(g, 2), ref = random_nodal(g, 3);
  CHECK(weighted_l2_error(g, f, u, ref) ==
        doctest::Approx(weighted_l2_error(g, fc, u, ref)).epsilon(1e-13));
  CHECK(energy_error(g, f, u, ref) ==
        doctest::Approx(energy_error(g, fc, u, ref)).epsilon(1e-13));
}

TEST_CASE("trivial reference is an error") {
  const FineGrid g = make_fine(4);
  const CoefficientField f = constant_field(g, 1.0);
  const Vector zero = Vector::Zero(g.node_count());
  CHECK_THROWS_AS(weighted_l2_error(g, f, random_nodal(g, 4), zero),
                  std::runtime_error);
  CHECK_THROWS_AS(energy_error(g, f, random_nodal(g, 4), zero),
                  std::runtime_error);
}

TEST_CASE("broken errors agree with conforming ones on conforming input") {
  const GridPair grids = build_grids(2, 4);
  const CoefficientField f =
      synthetic_field(grids.fine, SyntheticKind::Channels, 100, 6);
  const Vector u = random_nodal(grids.fine, 11);
  const Vector ref = random_nodal(grids.fine, 12);
  // split u into per-cell blocks
  const int n = grids.coarse.refinement;
  std::vector<Vector> cells(grids.coarse.cell_count(),
                            Vector::Zero((n + 1) * (n + 1)));
  for (int ky = 0; ky < grids.coarse.nx; ++ky)
    for (int kx = 0; kx < grids.coarse.nx; ++kx)
      for (int lj = 0; lj <= n; ++lj)
        for (int li = 0; li <= n; ++li)
          cells[grids.coarse.cell_index(kx, ky)][lj * (n + 1) + li] =
              u[grids.fine.node_index(kx * n + li, ky * n + lj)];
  CHECK(weighted_l2_error_broken(grids, f, cells, ref) ==
        doctest::Approx(weighted_l2_error(grids.fine, f, u, ref)).epsilon(1e-12));
  CHECK(energy_error_broken(grids, f, cells, ref) ==
        doctest::Approx(energy_error(grids.fine, f, u, ref)).epsilon(1e-12));
}

TEST_SUITE_END();
