#include "edgems/metrics.hpp"

#include <cmath>

#include "edgems/common.hpp"

namespace edgems {

namespace {

// int_T (sum u_a phi_a)(sum v_a phi_a) = area/12 (sum u_a v_a + sum u sum v)
double tri_mass_product(double area, const double u[3], const double v[3]) {
  const double su = u[0] + u[1] + u[2], sv = v[0] + v[1] + v[2];
  return area / 12.0 * (u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + su * sv);
}

void check_sizes(const FineGrid& grid, const CoefficientField& field,
                 const Vector& u, const Vector& v, const char* who) {
  EDGEMS_REQUIRE(field.nx == grid.nx && field.ny == grid.ny,
                 std::string(who) + ": field does not match the grid");
  EDGEMS_REQUIRE(u.size() == grid.node_count() && v.size() == grid.node_count(),
                 std::string(who) + ": vectors must be nodal on the fine grid");
}

}  // namespace

double energy_product(const FineGrid& grid, const CoefficientField& field,
                      const Vector& u, const Vector& v) {
  check_sizes(grid, field, u, v, "energy_product");
  const double area = 0.5 * grid.h * grid.h;
  double acc = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double kappa = field.cell(i, j);
      for (int t = 0; t < 2; ++t) {
        const auto tri = grid.triangle_nodes(i, j, t);
        const auto gu =
            tri_gradient(t, u[tri[0]], u[tri[1]], u[tri[2]], grid.h);
        const auto gv =
            tri_gradient(t, v[tri[0]], v[tri[1]], v[tri[2]], grid.h);
        acc += kappa * area * (gu[0] * gv[0] + gu[1] * gv[1]);
      }
    }
  }
  return acc;
}

double weighted_l2_product(const FineGrid& grid, const CoefficientField& field,
                           const Vector& u, const Vector& v) {
  check_sizes(grid, field, u, v, "weighted_l2_product");
  const double area = 0.5 * grid.h * grid.h;
  double acc = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double kappa = field.cell(i, j);
      for (int t = 0; t < 2; ++t) {
        const auto tri = grid.triangle_nodes(i, j, t);
        const double uu[3] = {u[tri[0]], u[tri[1]], u[tri[2]]};
        const double vv[3] = {v[tri[0]], v[tri[1]], v[tri[2]]};
        acc += kappa * tri_mass_product(area, uu, vv);
      }
    }
  }
  return acc;
}

double weighted_l2_error(const FineGrid& grid, const CoefficientField& field,
                         const Vector& u, const Vector& ref) {
  const Vector d = u - ref;
  const double den = weighted_l2_product(grid, field, ref, ref);
  EDGEMS_CHECK(den > 0.0, "weighted_l2_error: trivial reference");
  return std::sqrt(weighted_l2_product(grid, field, d, d) / den);
}

double energy_error(const FineGrid& grid, const CoefficientField& field,
                    const Vector& u, const Vector& ref) {
  const Vector d = u - ref;
  const double den = energy_product(grid, field, ref, ref);
  EDGEMS_CHECK(den > 0.0, "energy_error: trivial reference");
  return std::sqrt(energy_product(grid, field, d, d) / den);
}

namespace {

// Accumulate the broken numerator over one coarse cell; `mass` switches
// between the weighted L2 and the energy form.
double broken_cell_numerator(const GridPair& grids,
                             const CoefficientField& field,
                             const Vector& u_cell, const Vector& ref, int kx,
                             int ky, bool mass) {
  const FineGrid& fine = grids.fine;
  const int n = grids.coarse.refinement;
  const int i0 = kx * n, j0 = ky * n;
  const int cols = n + 1;
  const double area = 0.5 * fine.h * fine.h;
  double acc = 0.0;
  for (int j = j0; j < j0 + n; ++j) {
    for (int i = i0; i < i0 + n; ++i) {
      const double kappa = field.cell(i, j);
      for (int t = 0; t < 2; ++t) {
        const auto tri = fine.triangle_nodes(i, j, t);
        double d[3];
        for (int a = 0; a < 3; ++a) {
          const auto ij = fine.node_ij(tri[a]);
          d[a] = u_cell[(ij[1] - j0) * cols + (ij[0] - i0)] - ref[tri[a]];
        }
        if (mass) {
          acc += kappa * tri_mass_product(area, d, d);
        } else {
          const auto g = tri_gradient(t, d[0], d[1], d[2], fine.h);
          acc += kappa * area * (g[0] * g[0] + g[1] * g[1]);
        }
      }
    }
  }
  return acc;
}

double broken_error(const GridPair& grids, const CoefficientField& field,
                    const std::vector<Vector>& u_cells, const Vector& ref,
                    bool mass) {
  const CoarseGrid& coarse = grids.coarse;
  EDGEMS_REQUIRE(static_cast<int>(u_cells.size()) == coarse.cell_count(),
                 "broken error: one nodal block per coarse cell expected");
  double num = 0.0;
  for (int ky = 0; ky < coarse.nx; ++ky)
    for (int kx = 0; kx < coarse.nx; ++kx)
      num += broken_cell_numerator(grids, field,
                                   u_cells[coarse.cell_index(kx, ky)], ref, kx,
                                   ky, mass);
  const double den = mass
                         ? weighted_l2_product(grids.fine, field, ref, ref)
                         : energy_product(grids.fine, field, ref, ref);
  EDGEMS_CHECK(den > 0.0, "broken error: trivial reference");
  return std::sqrt(num / den);
}

}  // namespace

double weighted_l2_error_broken(const GridPair& grids,
                                const CoefficientField& field,
                                const std::vector<Vector>& u_cells,
                                const Vector& ref) {
  return broken_error(grids, field, u_cells, ref, true);
}

double energy_error_broken(const GridPair& grids, const CoefficientField& field,
                           const std::vector<Vector>& u_cells,
                           const Vector& ref) {
  return broken_error(grids, field, u_cells, ref, false);
}

}  // namespace edgems
