#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <utility>
#include <vector>

#include "edgems/coefficient.hpp"
#include "edgems/fem.hpp"
#include "edgems/grid.hpp"
#include "edgems/wavelets.hpp"

namespace edgems {

/// One partition-of-unity function chi_i, stored over its neighborhood
/// window (row-major, zero implied outside).
struct PouFunction {
  int coarse_node = -1;
  int ia = 0, ja = 0, cols = 0, rows = 0;
  Vector values;

  double value_at(int gi, int gj) const {
    if (gi < ia || gi >= ia + cols || gj < ja || gj >= ja + rows) return 0.0;
    return values[(gj - ja) * cols + (gi - ia)];
  }
  double local_value(const FineGrid& fine, int global_node) const {
    return value_at(global_node % (fine.nx + 1), global_node / (fine.nx + 1));
  }
};

struct PouBasis {
  std::vector<PouFunction> chi;  ///< one per coarse node, row-major order
};

/// kappa-harmonic partition of unity: per coarse cell, Dirichlet problems
/// with bilinear boundary data glue into chi_i. A final normalization pass
/// divides by the nodal sum so that sum_i chi_i = 1 at machine precision.
PouBasis build_pou(const GridPair& grids, const CoefficientField& field,
                   int workers = 1);

struct SteklovDecomposition {
  Vector eigenvalues;                ///< ascending
  Eigen::MatrixXd boundary_vectors;  ///< free boundary dofs x count,
                                     ///< orthonormal in the boundary mass
  Eigen::MatrixXd extensions;        ///< patch nodes x count
  std::vector<int> free_boundary;    ///< local indices of free boundary dofs
};

struct LocalSourceSolution {
  Vector values;              ///< patch nodes, mean-zero on interior patches
  double compatibility = 0.0; ///< |total source load - total flux load|
};

/// Discrete operator of one coarse neighborhood: patch stiffness, interior
/// factorization and boundary mass. Immutable after construction; distinct
/// instances can be used concurrently.
class NeighborhoodOperator {
 public:
  NeighborhoodOperator(const GridPair& grids, const CoefficientField& field,
                       int coarse_node);

  const NeighborhoodDofs& dofs() const { return dofs_; }
  const Neighborhood& neighborhood() const {
    return grids_.coarse.neighborhoods[node_];
  }
  const SparseMat& patch_stiffness() const { return A_; }

  /// Solves -div(kappa grad v) = 0 in omega_i with v = data on the patch
  /// boundary. `boundary_values` is a patch-length vector; only Boundary
  /// entries are read and BoundaryFixed nodes are pinned to zero.
  Vector harmonic_extend(const Vector& boundary_values) const;

  /// Boundary Schur complement S = A_BB - A_BI A_II^-1 A_IB against the
  /// boundary P1 mass, solved densely; eigenvectors are extended
  /// kappa-harmonically into the patch.
  SteklovDecomposition steklov_eigens(int count) const;

  /// The special source solution v^i: unit weighted interior source against
  /// uniform boundary outflow. Pure-Neumann patches fix the nullspace with a
  /// mean-zero constraint; truncated patches are pinned to zero on dD.
  LocalSourceSolution local_source(const WeightedCoefficient& weighted) const;

  /// Nodal Dirichlet data of one edge-wavelet basis function, zero-extended
  /// to the other edges. Haar (per-segment) values are converted to nodal
  /// ones by averaging the two adjacent segment values at every boundary
  /// node; hierarchical values are already nodal.
  Vector wavelet_boundary_data(int edge, const EdgeBasisSet& basis,
                               int function) const;

  NeighborhoodOperator(const NeighborhoodOperator&) = delete;
  NeighborhoodOperator& operator=(const NeighborhoodOperator&) = delete;

 private:
  const GridPair& grids_;
  const CoefficientField& field_;
  int node_;
  NeighborhoodDofs dofs_;
  SparseMat A_;                 // full patch stiffness
  std::vector<int> loc2int_;    // local -> interior index or -1
  std::vector<int> loc2freeb_;  // local -> free-boundary index or -1
  std::vector<int> free_boundary_;
  SparseMat A_IB_;
  Eigen::SimplicialLDLT<SparseMat> interior_ldlt_;
  SparseMat M_b_;  // boundary mass on free boundary dofs
  // per local boundary node: adjacent (edge, segment) pairs
  std::vector<std::vector<std::pair<int, int>>> segment_adjacency_;
};

// Convenience wrappers matching the per-operation contracts. Each builds the
// neighborhood operator on the fly.
Vector harmonic_extend(const GridPair& grids, const CoefficientField& field,
                       int coarse_node, const Vector& boundary_values);
SteklovDecomposition steklov_eigens(const GridPair& grids,
                                    const CoefficientField& field,
                                    int coarse_node, int count);
LocalSourceSolution local_source(const GridPair& grids,
                                 const CoefficientField& field,
                                 const WeightedCoefficient& weighted,
                                 int coarse_node);

}  // namespace edgems
