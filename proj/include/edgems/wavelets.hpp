#pragma once

#include <Eigen/Dense>

#include "edgems/fem.hpp"

namespace edgems {

enum class WaveletKind { Haar, Hierarchical };

struct WaveletSpec {
  WaveletKind kind = WaveletKind::Haar;
  int level = 0;
};

/// Dimension of the level-l space on one edge: 2^l Haar functions (scaling
/// function plus 2^{m-1} wavelets per level m <= l), 2^l + 1 hierarchical
/// hats.
int wavelet_dim(WaveletSpec spec);

/// psi_{l,j}(x) = 2^{(l-1)/2} psi(2^{l-1} x - j) for l >= 1; the scaling
/// function phi (constant 1 on [0,1]) for l = 0. Dyadic breakpoints use the
/// half-open convention: each value is taken from the left-closed
/// subinterval.
double haar_function(int level, int j, double x);

/// Hierarchical hat 1 - |x/h_l - j| on its support; j must lie in B_l
/// (j in {0,1} for l = 0, odd 1 <= j <= 2^l - 1 otherwise).
double hierarchical_function(int level, int j, double x);

/// L2 coefficients of the Haar projection P_l of a piecewise-constant sample
/// vector (2^q equal cells on [0,1], q >= l). Coefficient order: phi, then
/// levels 1..l with j ascending.
Vector haar_project_coefficients(const Vector& samples, int level);

/// Evaluate a Haar coefficient vector back onto a piecewise-constant sample
/// grid of `sample_count` cells (a power of two >= 2^l).
Vector haar_reconstruct(const Vector& coefficients, int level,
                        int sample_count);

/// All level-l basis functions of one coarse edge, sampled on the reference
/// interval [0,1] at the edge's fine resolution. Haar functions are sampled
/// per fine segment (midpoints), hierarchical hats at fine nodes.
struct EdgeBasisSet {
  WaveletSpec spec;
  int segments = 0;        ///< fine segments along the edge
  Eigen::MatrixXd samples; ///< (segments or segments+1) x wavelet_dim(spec)
};

EdgeBasisSet edge_basis(int fine_segments, WaveletSpec spec);
EdgeBasisSet edge_basis(const CoarseEdge& edge, WaveletSpec spec);

}  // namespace edgems
