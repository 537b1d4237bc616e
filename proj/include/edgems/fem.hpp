#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <vector>

#include "edgems/coefficient.hpp"
#include "edgems/grid.hpp"

namespace edgems {

using SparseMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Gradient of the P1 function with vertex values (a0,a1,a2) on triangle
/// type t (0 = below the cell diagonal, 1 = above) of a square cell of side h.
/// Vertex order matches FineGrid::triangle_nodes.
inline std::array<double, 2> tri_gradient(int t, double a0, double a1,
                                          double a2, double h) {
  if (t == 0) return {(a1 - a0) / h, (a2 - a1) / h};
  return {(a1 - a2) / h, (a2 - a0) / h};
}

/// Symmetric sparse operator with load vector and Dirichlet bookkeeping.
/// The matrix always covers the full DOF set; constraints are eliminated
/// inside solve().
struct SparseSystem {
  SparseMat matrix;
  Vector load;
  std::vector<int> constrained;  ///< constrained DOF ids, ascending
  Vector constrained_values;     ///< prescribed values, same order
};

struct SolveInfo {
  bool direct = true;
  int iterations = 0;
  double residual = 0.0;  ///< final relative residual on the free block
};

/// Stiffness A_pq = sum_T kappa_T int_T grad phi_p . grad phi_q, exact for
/// cellwise-constant kappa.
SparseMat assemble_stiffness(const FineGrid& grid,
                             const CoefficientField& field);

/// kappa-weighted P1 mass matrix (exact per triangle); used by the metrics.
SparseMat assemble_mass(const FineGrid& grid, const CoefficientField& field);

/// Load vector of the P1 interpolant of f (exact per-triangle quadrature).
Vector assemble_load(const FineGrid& grid,
                     const std::function<double(double, double)>& f);
Vector assemble_load(const FineGrid& grid, const Vector& nodal_f);

/// Solve the constrained SPD system. Free DOFs get a residual of at most
/// tol * |reduced load|; constrained DOFs are set exactly. Small systems use
/// a sparse Cholesky factorization, large ones diagonally preconditioned CG.
Vector solve(const SparseSystem& system, double tol, SolveInfo* info = nullptr);

/// Fine-scale reference u_h: stiffness + load + homogeneous Dirichlet on dD,
/// solved to a 1e-10 relative residual.
Vector fine_reference(const FineGrid& grid, const CoefficientField& field,
                      const std::function<double(double, double)>& f,
                      double tol = 1e-10, SolveInfo* info = nullptr);

/// Nodal values of all dD nodes, ascending (homogeneous Dirichlet set).
std::vector<int> boundary_nodes(const FineGrid& grid);

/// Stiffness of the fine-cell block [ci0,ci1) x [cj0,cj1), with local node
/// indices running row-major over the block's node window.
SparseMat window_stiffness(const FineGrid& grid, const CoefficientField& field,
                           int ci0, int ci1, int cj0, int cj1);

/// Load vector of the same block for a globally given nodal f.
Vector window_load(const FineGrid& grid, const Vector& nodal_f, int ci0,
                   int ci1, int cj0, int cj1);

}  // namespace edgems
