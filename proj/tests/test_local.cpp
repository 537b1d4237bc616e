#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <random>

#include "edgems/local_problems.hpp"
#include "edgems/metrics.hpp"

using namespace edgems;

namespace {

Vector random_boundary_data(const NeighborhoodDofs& dofs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector data = Vector::Zero(dofs.count());
  for (int l : dofs.boundary)
    if (dofs.node_class[l] == NodeClass::Boundary)
      data[l] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return data;
}

}  // namespace

TEST_SUITE_BEGIN("local");

TEST_CASE("pou: boundary data of each coarse cell is the bilinear trace") {
  const GridPair grids = build_grids(4, 4);
  const CoefficientField field =
      synthetic_field(grids.fine, SyntheticKind::Mixed, 1e3, 13);
  const PouBasis pou = build_pou(grids, field);
  const FineGrid& fine = grids.fine;
  const int n = grids.coarse.refinement;

  // chi of node (1,1) along the bottom edge of coarse cell (1,1): affine 0->1
  const PouFunction& chi = pou.chi[grids.coarse.node_index(1, 1)];
  for (int k = 0; k <= n; ++k) {
    const double expected = 1.0 - static_cast<double>(k) / n;
    CHECK(chi.value_at(n + k, n) == doctest::Approx(expected).epsilon(1e-12));
  }
  // delta property at coarse nodes is exact
  for (int cj = 0; cj <= grids.coarse.nx; ++cj)
    for (int ci = 0; ci <= grids.coarse.nx; ++ci) {
      const double v = chi.value_at(ci * n, cj * n);
      CHECK(v == (ci == 1 && cj == 1 ? 1.0 : 0.0));
    }
  // range
  for (const PouFunction& c : pou.chi) {
    CHECK(c.values.minCoeff() >= -1e-10);
    CHECK(c.values.maxCoeff() <= 1.0 + 1e-10);
  }
  // partition of unity at every fine node
  Vector sum = Vector::Zero(fine.node_count());
  for (const PouFunction& c : pou.chi)
    for (int lj = 0; lj < c.rows; ++lj)
      for (int li = 0; li < c.cols; ++li)
        sum[fine.node_index(c.ia + li, c.ja + lj)] += c.values[lj * c.cols + li];
  CHECK((sum.array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("pou: chi avoids gradients inside a high-contrast inclusion") {
  const GridPair grids = build_grids(2, 8);  // coarse cell = 8x8 fine cells
  CoefficientField field = constant_field(grids.fine, 1.0);
  // inclusion strictly inside coarse cell (0,0)
  for (int j = 2; j <= 5; ++j)
    for (int i = 2; i <= 5; ++i) field.value[j * grids.fine.nx + i] = 1e6;
  field.max_value = 1e6;
  const PouBasis pou = build_pou(grids, field);

  const PouFunction& chi = pou.chi[grids.coarse.node_index(0, 0)];
  PouFunction bilinear = chi;
  for (int lj = 0; lj < chi.rows; ++lj)
    for (int li = 0; li < chi.cols; ++li) {
      const double tx = (chi.ia + li) * grids.fine.h / grids.coarse.H;
      const double ty = (chi.ja + lj) * grids.fine.h / grids.coarse.H;
      bilinear.values[lj * chi.cols + li] =
          (tx <= 1.0 && ty <= 1.0) ? (1.0 - tx) * (1.0 - ty) : 0.0;
    }

  const auto inclusion_energy = [&](const PouFunction& f) {
    double acc = 0.0;
    for (int j = 2; j <= 5; ++j) {
      for (int i = 2; i <= 5; ++i) {
        for (int t = 0; t < 2; ++t) {
          const auto tri = grids.fine.triangle_nodes(i, j, t);
          const auto g = tri_gradient(t, f.local_value(grids.fine, tri[0]),
                                      f.local_value(grids.fine, tri[1]),
                                      f.local_value(grids.fine, tri[2]),
                                      grids.fine.h);
          acc += field.cell(i, j) * 0.5 * grids.fine.h * grids.fine.h *
                 (g[0] * g[0] + g[1] * g[1]);
        }
      }
    }
    return acc;
  };
  CHECK(inclusion_energy(chi) < inclusion_energy(bilinear));
}

TEST_CASE("harmonic extension of constants and affine data") {
  const GridPair grids = build_grids(4, 4);
  const int node = grids.coarse.node_index(2, 2);
  const CoefficientField rough =
      synthetic_field(grids.fine, SyntheticKind::Inclusions, 1e4, 4);
  NeighborhoodOperator op(grids, rough, node);
  const auto& dofs = op.dofs();

  Vector data = Vector::Zero(dofs.count());
  for (int l : dofs.boundary) data[l] = 0.75;
  const Vector ext = op.harmonic_extend(data);
  CHECK((ext.array() - 0.75).abs().maxCoeff() <= 1e-12);

  const CoefficientField unit = constant_field(grids.fine, 1.0);
  NeighborhoodOperator op1(grids, unit, node);
  Vector affine_data = Vector::Zero(dofs.count());
  const auto affine = [](double x, double y) { return 2.0 * x - 0.5 * y + 0.1; };
  for (int l : dofs.boundary) {
    const auto xy = grids.fine.node_xy(dofs.to_global[l]);
    affine_data[l] = affine(xy[0], xy[1]);
  }
  const Vector affine_ext = op1.harmonic_extend(affine_data);
  for (int l = 0; l < dofs.count(); ++l) {
    const auto xy = grids.fine.node_xy(dofs.to_global[l]);
    CHECK(affine_ext[l] == doctest::Approx(affine(xy[0], xy[1])).epsilon(1e-12));
  }
}

TEST_CASE("harmonic extension: discrete maximum principle and linearity") {
  const GridPair grids = build_grids(4, 4);
  const CoefficientField field =
      synthetic_field(grids.fine, SyntheticKind::Mixed, 1e4, 23);
  NeighborhoodOperator op(grids, field, grids.coarse.node_index(1, 2));
  const auto& dofs = op.dofs();

  const Vector g1 = random_boundary_data(dofs, 100);
  const Vector g2 = random_boundary_data(dofs, 200);
  const Vector e1 = op.harmonic_extend(g1);
  CHECK(e1.minCoeff() >= g1.minCoeff() - 1e-10);
  CHECK(e1.maxCoeff() <= g1.maxCoeff() + 1e-10);

  const Vector combo = op.harmonic_extend(0.3 * g1 - 1.7 * g2);
  const Vector by_parts = 0.3 * e1 - 1.7 * op.harmonic_extend(g2);
  CHECK((combo - by_parts).cwiseAbs().maxCoeff() <=
        1e-12 * by_parts.cwiseAbs().maxCoeff());
}

TEST_CASE("steklov: unit coefficient has a zero mode with constant trace") {
  const GridPair grids = build_grids(4, 4);
  const CoefficientField field = constant_field(grids.fine, 1.0);
  const auto dec = steklov_eigens(grids, field, grids.coarse.node_index(2, 2), 6);

  CHECK(dec.eigenvalues[0] <= 1e-9);
  for (int k = 1; k < dec.eigenvalues.size(); ++k) {
    CHECK(dec.eigenvalues[k] >= dec.eigenvalues[k - 1]);
    CHECK(dec.eigenvalues[k] >= -1e-10);
  }
  const auto v0 = dec.boundary_vectors.col(0);
  const double cosine =
      std::abs(v0.sum()) / (std::sqrt(static_cast<double>(v0.size())) * v0.norm());
  CHECK(cosine >= 1.0 - 1e-8);
}

TEST_CASE("steklov: eigenvalues scale linearly with kappa") {
  const GridPair grids = build_grids(4, 4);
  const int node = grids.coarse.node_index(1, 1);
  const CoefficientField base =
      synthetic_field(grids.fine, SyntheticKind::Inclusions, 1e3, 8);
  CoefficientField scaled = base;
  for (double& v : scaled.value) v *= 4.5;
  scaled.min_value *= 4.5;
  scaled.max_value *= 4.5;

  const auto d1 = steklov_eigens(grids, base, node, 8);
  const auto d2 = steklov_eigens(grids, scaled, node, 8);
  const double lmax = d1.eigenvalues.maxCoeff();
  for (int k = 0; k < 8; ++k)
    CHECK(std::abs(d2.eigenvalues[k] - 4.5 * d1.eigenvalues[k]) <=
          1e-8 * 4.5 * lmax);
}

TEST_CASE("steklov: extensions satisfy the weak eigen identity") {
  const GridPair grids = build_grids(4, 4);
  const CoefficientField field =
      synthetic_field(grids.fine, SyntheticKind::Mixed, 1e2, 31);
  NeighborhoodOperator op(grids, field, grids.coarse.node_index(2, 1));
  const auto dec = op.steklov_eigens(5);
  // eigenvectors are boundary-mass orthonormal, so a(v,v) = lambda
  for (int k = 0; k < 5; ++k) {
    const Vector v = dec.extensions.col(k);
    const double energy = v.dot(op.patch_stiffness() * v);
    const double lambda = dec.eigenvalues[k];
    if (lambda > 1e-8)
      CHECK(energy == doctest::Approx(lambda).epsilon(1e-8));
    else
      CHECK(std::abs(energy - lambda) <= 1e-10);
  }
}

TEST_CASE("steklov: count above the boundary DOF limit is rejected") {
  const GridPair grids = build_grids(2, 2);
  const CoefficientField field = constant_field(grids.fine, 1.0);
  CHECK_THROWS_AS(steklov_eigens(grids, field, 0, 50), std::invalid_argument);
}

TEST_CASE("local source: compatibility, zero mean, and symmetry") {
  const GridPair grids = build_grids(4, 4);
  const CoefficientField field = constant_field(grids.fine, 1.0);
  const PouBasis pou = build_pou(grids, field);
  const WeightedCoefficient weighted = weighted_coefficient(grids, field, pou);

  const int node = grids.coarse.node_index(2, 2);
  NeighborhoodOperator op(grids, field, node);
  const LocalSourceSolution sol = op.local_source(weighted);
  CHECK(sol.compatibility <= 1e-12);

  // imposed mean-zero constraint
  const auto& dofs = op.dofs();
  const FineGrid& fine = grids.fine;
  double mean = 0.0;
  const Neighborhood& nb = op.neighborhood();
  for (int j = nb.ja; j < nb.jb; ++j)
    for (int i = nb.ia; i < nb.ib; ++i)
      for (int t = 0; t < 2; ++t) {
        const auto tri = fine.triangle_nodes(i, j, t);
        for (int a = 0; a < 3; ++a) {
          const auto ij = fine.node_ij(tri[a]);
          mean += 0.5 * fine.h * fine.h / 3.0 *
                  sol.values[dofs.local_index(ij[0], ij[1])];
        }
      }
  CHECK(std::abs(mean) <= 1e-12);

  // the coefficient, source, and flux share the exact symmetries of the
  // fixed-diagonal triangulation: 180-degree rotation and both diagonal
  // reflections of the patch
  const int w = dofs.cols;
  const auto at = [&](int li, int lj) { return sol.values[lj * w + li]; };
  const double scale = sol.values.cwiseAbs().maxCoeff();
  for (int lj = 0; lj < dofs.rows; ++lj) {
    for (int li = 0; li < w; ++li) {
      CHECK(at(li, lj) ==
            doctest::Approx(at(w - 1 - li, dofs.rows - 1 - lj)).scale(scale).epsilon(1e-9));
      CHECK(at(li, lj) == doctest::Approx(at(lj, li)).scale(scale).epsilon(1e-9));
      CHECK(at(li, lj) ==
            doctest::Approx(at(dofs.rows - 1 - lj, w - 1 - li)).scale(scale).epsilon(1e-9));
    }
  }
}

TEST_CASE("local source: truncated patches pin the dD part") {
  const GridPair grids = build_grids(4, 4);
  const CoefficientField field =
      synthetic_field(grids.fine, SyntheticKind::Mixed, 1e4, 2);
  const PouBasis pou = build_pou(grids, field);
  const WeightedCoefficient weighted = weighted_coefficient(grids, field, pou);
  NeighborhoodOperator op(grids, field, 0);  // corner neighborhood
  const LocalSourceSolution sol = op.local_source(weighted);
  CHECK(sol.compatibility <= 1e-12);
  for (int l = 0; l < op.dofs().count(); ++l)
    if (op.dofs().node_class[l] == NodeClass::BoundaryFixed)
      CHECK(sol.values[l] == 0.0);
}

TEST_CASE("local source: degenerate weighted coefficient is reported") {
  const GridPair grids = build_grids(2, 2);
  const CoefficientField field = constant_field(grids.fine, 1.0);
  const WeightedCoefficient zero =
      make_weighted(grids.fine.nx, grids.fine.ny,
                    std::vector<double>(grids.fine.cell_count(), 0.0));
  NeighborhoodOperator op(grids, field, grids.coarse.node_index(1, 1));
  CHECK_THROWS_WITH_AS(op.local_source(zero),
                       doctest::Contains("degenerate weighted source"),
                       std::runtime_error);
}

TEST_SUITE_END();
