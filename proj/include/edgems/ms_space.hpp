#pragma once

#include <limits>
#include <string>
#include <vector>

#include "edgems/coefficient.hpp"
#include "edgems/fem.hpp"
#include "edgems/grid.hpp"
#include "edgems/local_problems.hpp"
#include "edgems/wavelets.hpp"

namespace edgems {

enum class Oversampling { None, Half, Full };

struct BasisTag {
  enum class Kind { Spectral, Wavelet, Source, Msfem };
  int coarse_node = -1;
  Kind kind = Kind::Msfem;
  int index = 0;  ///< spectral mode / flat wavelet index, 0 otherwise
};

/// A conforming global basis function: chi_i times a local function, zero on
/// dD and outside its neighborhood window.
struct GlobalBasisFunction {
  int ia = 0, ja = 0, cols = 0, rows = 0;
  Vector values;  ///< row-major over the window
  BasisTag tag;

  double value_at(int gi, int gj) const {
    if (gi < ia || gi >= ia + cols || gj < ja || gj >= ja + rows) return 0.0;
    return values[(gj - ja) * cols + (gi - ia)];
  }
};

/// A nonconforming basis function of the oversampled MsFEM: independent nodal
/// values per coarse cell (row-major over the cell's fine-node window).
struct BrokenBasisFunction {
  std::vector<int> cells;          ///< coarse cell ids
  std::vector<Vector> cell_values; ///< one block per cell
  BasisTag tag;
};

struct MultiscaleSpace {
  std::vector<GlobalBasisFunction> functions;
  std::vector<BrokenBasisFunction> broken;
  /// Lambda = min_i of the first Steklov eigenvalue left out of the space
  /// (ESMsFEM only, NaN otherwise).
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  int pruned = 0;  ///< functions dropped by the dependence check
  std::vector<int> oversampling_fallbacks;  ///< cells where corner matching
                                            ///< degenerated

  bool conforming() const { return broken.empty(); }
  int dimension() const {
    return static_cast<int>(conforming() ? functions.size() : broken.size());
  }
};

/// Algorithm: per neighborhood, the nb-1 lowest Steklov modes plus the local
/// source solution v^i, each multiplied by chi_i. Reports
/// Lambda = min_i lambda_{nb+1}.
MultiscaleSpace build_esmsfem_space(const GridPair& grids,
                                    const CoefficientField& field, int nb,
                                    const PouBasis& pou,
                                    const WeightedCoefficient& weighted,
                                    int workers = 1);

/// Algorithm: per neighborhood, kappa-harmonic extensions of every edge
/// wavelet up to the given level (zero-extended to the other edges) plus v^i,
/// each multiplied by chi_i.
MultiscaleSpace build_wemsfem_space(const GridPair& grids,
                                    const CoefficientField& field,
                                    WaveletSpec spec, const PouBasis& pou,
                                    const WeightedCoefficient& weighted,
                                    int workers = 1);

/// Classical MsFEM: the pou functions themselves, or their oversampled
/// variants (K+ grown by n/2 or n fine cells, corner-matched and glued
/// nonconformingly).
MultiscaleSpace build_msfem_space(const GridPair& grids,
                                  const CoefficientField& field,
                                  Oversampling oversampling,
                                  const PouBasis& pou, int workers = 1);

struct CoarseSolution {
  Vector coefficients;
  Vector u;                    ///< fine nodal values (conforming spaces)
  std::vector<Vector> u_cells; ///< per-coarse-cell values (broken spaces)
  double tikhonov_shift = 0.0; ///< diagonal shift applied, 0 if none
};

/// Galerkin solve in the multiscale space: B_kl = a(psi_k, psi_l),
/// rhs_k = (f, psi_k), f given by its fine nodal values.
CoarseSolution coarse_solve(const GridPair& grids,
                            const CoefficientField& field,
                            const MultiscaleSpace& space,
                            const Vector& f_nodal);

/// max_k |(f, psi_k) - a(u_ms, psi_k)|: the residual of the normal equations
/// (equals max_k |a(u_h - u_ms, psi_k)| for conforming spaces).
double galerkin_residual(const GridPair& grids, const CoefficientField& field,
                         const MultiscaleSpace& space,
                         const CoarseSolution& solution, const Vector& f_nodal);

}  // namespace edgems
