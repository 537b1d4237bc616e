#pragma once

#include <vector>

#include "edgems/coefficient.hpp"
#include "edgems/fem.hpp"
#include "edgems/grid.hpp"

namespace edgems {

/// a(u,v) = int kappa grad u . grad v, exact per triangle.
double energy_product(const FineGrid& grid, const CoefficientField& field,
                      const Vector& u, const Vector& v);

/// (kappa u, v), exact P1 mass per triangle.
double weighted_l2_product(const FineGrid& grid, const CoefficientField& field,
                           const Vector& u, const Vector& v);

/// e_L2 = |kappa^1/2 (u - ref)| / |kappa^1/2 ref|
double weighted_l2_error(const FineGrid& grid, const CoefficientField& field,
                         const Vector& u, const Vector& ref);

/// e_H1 = sqrt(a(u-ref, u-ref) / a(ref, ref))
double energy_error(const FineGrid& grid, const CoefficientField& field,
                    const Vector& u, const Vector& ref);

// Broken (elementwise) variants for nonconforming u given per coarse cell,
// nodal values row-major over each cell's fine-node window.
double weighted_l2_error_broken(const GridPair& grids,
                                const CoefficientField& field,
                                const std::vector<Vector>& u_cells,
                                const Vector& ref);
double energy_error_broken(const GridPair& grids, const CoefficientField& field,
                           const std::vector<Vector>& u_cells,
                           const Vector& ref);

}  // namespace edgems
