#include "edgems/local_problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <cmath>

#include "edgems/common.hpp"
#include "edgems/parallel.hpp"

namespace edgems {

namespace {

SparseMat extract_block(const SparseMat& A, const std::vector<int>& row_map,
                        const std::vector<int>& col_map, int rows, int cols) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < A.outerSize(); ++c) {
    if (col_map[c] < 0) continue;
    for (SparseMat::InnerIterator it(A, c); it; ++it) {
      if (row_map[it.row()] < 0) continue;
      trips.emplace_back(row_map[it.row()], col_map[c], it.value());
    }
  }
  SparseMat B(rows, cols);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

}  // namespace

PouBasis build_pou(const GridPair& grids, const CoefficientField& field,
                   int workers) {
  const FineGrid& fine = grids.fine;
  const CoarseGrid& coarse = grids.coarse;
  EDGEMS_REQUIRE(field.nx == fine.nx && field.ny == fine.ny,
                 "build_pou: field does not match the fine grid");
  const int n = coarse.refinement;
  const int m = n + 1;  // nodes per coarse-cell axis

  // One solve block per coarse cell: the four corner problems share a
  // factorization and differ only in Dirichlet data.
  struct CellSolution {
    std::array<Vector, 4> corner;  // (m*m) nodal values, corner order
                                   // (0,0),(1,0),(0,1),(1,1)
  };
  std::vector<CellSolution> cell_solutions(coarse.cell_count());

  parallel_for(coarse.cell_count(), workers, [&](int cell) {
    const int kx = cell % coarse.nx, ky = cell / coarse.nx;
    const int i0 = kx * n, j0 = ky * n;
    SparseMat A = window_stiffness(fine, field, i0, i0 + n, j0, j0 + n);

    std::vector<int> loc2int(m * m, -1), interior;
    for (int lj = 1; lj < m - 1; ++lj)
      for (int li = 1; li < m - 1; ++li) {
        loc2int[lj * m + li] = static_cast<int>(interior.size());
        interior.push_back(lj * m + li);
      }
    const int ni = static_cast<int>(interior.size());
    SparseMat A_II = extract_block(A, loc2int, loc2int, ni, ni);
    Eigen::SimplicialLDLT<SparseMat> ldlt(A_II);
    EDGEMS_CHECK(ldlt.info() == Eigen::Success,
                 "build_pou: singular local system");

    CellSolution& sol = cell_solutions[cell];
    for (int c = 0; c < 4; ++c) {
      const double cx = c & 1 ? 1.0 : 0.0, cy = c & 2 ? 1.0 : 0.0;
      Vector g = Vector::Zero(m * m);
      for (int lj = 0; lj < m; ++lj) {
        for (int li = 0; li < m; ++li) {
          if (li != 0 && li != m - 1 && lj != 0 && lj != m - 1) continue;
          const double tx = static_cast<double>(li) / n;
          const double ty = static_cast<double>(lj) / n;
          g[lj * m + li] = (cx == 1.0 ? tx : 1.0 - tx) *
                           (cy == 1.0 ? ty : 1.0 - ty);
        }
      }
      Vector rhs = Vector::Zero(ni);
      // move Dirichlet data to the right-hand side
      for (int col = 0; col < A.outerSize(); ++col) {
        if (g[col] == 0.0) continue;
        for (SparseMat::InnerIterator it(A, col); it; ++it) {
          const int r = loc2int[it.row()];
          if (r >= 0) rhs[r] -= it.value() * g[col];
        }
      }
      Vector x_int = ldlt.solve(rhs);
      Vector full = g;
      for (int k = 0; k < ni; ++k) full[interior[k]] = x_int[k];
      sol.corner[c] = std::move(full);
    }
  });

  // Scatter the per-cell solutions into chi patches.
  PouBasis pou;
  pou.chi.resize(coarse.node_count());
  for (int c = 0; c < coarse.node_count(); ++c) {
    const Neighborhood& nb = coarse.neighborhoods[c];
    PouFunction& chi = pou.chi[c];
    chi.coarse_node = c;
    chi.ia = nb.ia;
    chi.ja = nb.ja;
    chi.cols = nb.node_cols();
    chi.rows = nb.node_rows();
    chi.values = Vector::Zero(chi.cols * chi.rows);
  }
  for (int cell = 0; cell < coarse.cell_count(); ++cell) {
    const int kx = cell % coarse.nx, ky = cell / coarse.nx;
    const int i0 = kx * n, j0 = ky * n;
    for (int c = 0; c < 4; ++c) {
      const int ci = kx + (c & 1), cj = ky + ((c >> 1) & 1);
      PouFunction& chi = pou.chi[coarse.node_index(ci, cj)];
      const Vector& vals = cell_solutions[cell].corner[c];
      for (int lj = 0; lj < m; ++lj)
        for (int li = 0; li < m; ++li)
          chi.values[(j0 + lj - chi.ja) * chi.cols + (i0 + li - chi.ia)] =
              vals[lj * m + li];
    }
  }

  // Normalization pass: divide by the nodal sum to repair solver drift.
  Vector sum = Vector::Zero(fine.node_count());
  for (const PouFunction& chi : pou.chi)
    for (int lj = 0; lj < chi.rows; ++lj)
      for (int li = 0; li < chi.cols; ++li)
        sum[fine.node_index(chi.ia + li, chi.ja + lj)] +=
            chi.values[lj * chi.cols + li];
  for (int p = 0; p < fine.node_count(); ++p)
    EDGEMS_CHECK(sum[p] > 0.5, "build_pou: partition-of-unity sum degenerate");
  for (PouFunction& chi : pou.chi)
    for (int lj = 0; lj < chi.rows; ++lj)
      for (int li = 0; li < chi.cols; ++li)
        chi.values[lj * chi.cols + li] /=
            sum[fine.node_index(chi.ia + li, chi.ja + lj)];
  return pou;
}

NeighborhoodOperator::NeighborhoodOperator(const GridPair& grids,
                                           const CoefficientField& field,
                                           int coarse_node)
    : grids_(grids), field_(field), node_(coarse_node) {
  EDGEMS_REQUIRE(field.nx == grids.fine.nx && field.ny == grids.fine.ny,
                 "NeighborhoodOperator: field does not match the fine grid");
  dofs_ = neighborhood_dofs(grids, coarse_node);
  const Neighborhood& nb = neighborhood();
  const FineGrid& fine = grids.fine;

  // local indexing of window_stiffness matches NeighborhoodDofs::local_index
  A_ = window_stiffness(fine, field, nb.ia, nb.ib, nb.ja, nb.jb);

  loc2int_.assign(dofs_.count(), -1);
  loc2freeb_.assign(dofs_.count(), -1);
  for (std::size_t k = 0; k < dofs_.interior.size(); ++k)
    loc2int_[dofs_.interior[k]] = static_cast<int>(k);
  for (int l : dofs_.boundary) {
    if (dofs_.node_class[l] == NodeClass::Boundary) {
      loc2freeb_[l] = static_cast<int>(free_boundary_.size());
      free_boundary_.push_back(l);
    }
  }
  const int ni = static_cast<int>(dofs_.interior.size());
  const int nb_free = static_cast<int>(free_boundary_.size());

  SparseMat A_II = extract_block(A_, loc2int_, loc2int_, ni, ni);
  A_IB_ = extract_block(A_, loc2int_, loc2freeb_, ni, nb_free);
  interior_ldlt_.compute(A_II);
  EDGEMS_CHECK(interior_ldlt_.info() == Eigen::Success,
               "NeighborhoodOperator: interior factorization failed");

  // Boundary P1 mass over the edge segments, restricted to free dofs; also
  // record the segment adjacency used for Haar boundary data.
  segment_adjacency_.resize(dofs_.count());
  std::vector<Eigen::Triplet<double>> mass;
  const double h = fine.h;
  for (std::size_t e = 0; e < dofs_.edge_nodes.size(); ++e) {
    const auto& nodes = dofs_.edge_nodes[e];
    for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
      const int p = nodes[s], q = nodes[s + 1];
      segment_adjacency_[p].emplace_back(static_cast<int>(e),
                                         static_cast<int>(s));
      segment_adjacency_[q].emplace_back(static_cast<int>(e),
                                         static_cast<int>(s));
      const int fp = loc2freeb_[p], fq = loc2freeb_[q];
      if (fp >= 0) mass.emplace_back(fp, fp, h / 3.0);
      if (fq >= 0) mass.emplace_back(fq, fq, h / 3.0);
      if (fp >= 0 && fq >= 0) {
        mass.emplace_back(fp, fq, h / 6.0);
        mass.emplace_back(fq, fp, h / 6.0);
      }
    }
  }
  M_b_.resize(nb_free, nb_free);
  M_b_.setFromTriplets(mass.begin(), mass.end());
}

Vector NeighborhoodOperator::harmonic_extend(
    const Vector& boundary_values) const {
  EDGEMS_REQUIRE(boundary_values.size() == dofs_.count(),
                 "harmonic_extend: boundary data must be patch-sized");
  const int ni = static_cast<int>(dofs_.interior.size());
  Vector rhs = Vector::Zero(ni);
  for (int col = 0; col < A_.outerSize(); ++col) {
    if (loc2freeb_[col] < 0 || boundary_values[col] == 0.0) continue;
    for (SparseMat::InnerIterator it(A_, col); it; ++it) {
      const int r = loc2int_[it.row()];
      if (r >= 0) rhs[r] -= it.value() * boundary_values[col];
    }
  }
  Vector x_int = interior_ldlt_.solve(rhs);
  Vector out = Vector::Zero(dofs_.count());
  for (int l : free_boundary_) out[l] = boundary_values[l];
  for (int k = 0; k < ni; ++k) out[dofs_.interior[k]] = x_int[k];
  return out;
}

SteklovDecomposition NeighborhoodOperator::steklov_eigens(int count) const {
  const int nb_free = static_cast<int>(free_boundary_.size());
  EDGEMS_REQUIRE(count >= 1 && count <= nb_free,
                 "steklov_eigens: count exceeds boundary DOF count");
  const int ni = static_cast<int>(dofs_.interior.size());

  Eigen::MatrixXd X(ni, nb_free);
  {
    Eigen::MatrixXd rhs = Eigen::MatrixXd(A_IB_);
    X = interior_ldlt_.solve(rhs);
  }
  Eigen::MatrixXd S =
      Eigen::MatrixXd(extract_block(A_, loc2freeb_, loc2freeb_, nb_free,
                                    nb_free)) -
      Eigen::MatrixXd(A_IB_).transpose() * X;
  S = 0.5 * (S + S.transpose().eval());  // symmetrize roundoff

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      S, Eigen::MatrixXd(M_b_), Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  EDGEMS_CHECK(eig.info() == Eigen::Success,
               "steklov_eigens: eigensolver failed on neighborhood " +
                   std::to_string(node_));

  SteklovDecomposition dec;
  dec.free_boundary = free_boundary_;
  dec.eigenvalues = eig.eigenvalues().head(count);
  dec.boundary_vectors = eig.eigenvectors().leftCols(count);
  // deterministic sign: first significant component positive
  for (int k = 0; k < count; ++k) {
    auto col = dec.boundary_vectors.col(k);
    const double scale = col.cwiseAbs().maxCoeff();
    for (int r = 0; r < col.size(); ++r) {
      if (std::abs(col[r]) > 1e-12 * scale) {
        if (col[r] < 0) col = -col;
        break;
      }
    }
  }
  dec.extensions.resize(dofs_.count(), count);
  Eigen::MatrixXd interior_part = -X * dec.boundary_vectors;
  for (int k = 0; k < count; ++k) {
    Vector v = Vector::Zero(dofs_.count());
    for (int b = 0; b < nb_free; ++b)
      v[free_boundary_[b]] = dec.boundary_vectors(b, k);
    for (int r = 0; r < ni; ++r)
      v[dofs_.interior[r]] = interior_part(r, k);
    dec.extensions.col(k) = v;
  }
  return dec;
}

LocalSourceSolution NeighborhoodOperator::local_source(
    const WeightedCoefficient& weighted) const {
  const Neighborhood& nb = neighborhood();
  const FineGrid& fine = grids_.fine;
  EDGEMS_REQUIRE(weighted.nx == fine.nx && weighted.ny == fine.ny,
                 "local_source: weighted coefficient does not match the grid");

  const double h = fine.h;
  const double area = 0.5 * h * h;
  double total_weight = 0.0;
  for (int j = nb.ja; j < nb.jb; ++j)
    for (int i = nb.ia; i < nb.ib; ++i)
      total_weight += weighted.cell(i, j) * h * h;
  EDGEMS_CHECK(total_weight > 0.0,
               "local_source: degenerate weighted source (integral of the "
               "weighted coefficient vanishes on neighborhood " +
                   std::to_string(node_) + ")");

  Vector b_src = Vector::Zero(dofs_.count());
  for (int j = nb.ja; j < nb.jb; ++j) {
    for (int i = nb.ia; i < nb.ib; ++i) {
      const double w = weighted.cell(i, j) / total_weight * area / 3.0;
      for (int t = 0; t < 2; ++t) {
        const auto tri = fine.triangle_nodes(i, j, t);
        for (int a = 0; a < 3; ++a) {
          const auto ij = fine.node_ij(tri[a]);
          b_src[dofs_.local_index(ij[0], ij[1])] += w;
        }
      }
    }
  }
  const double perimeter = nb.edge_length();
  Vector b_flux = Vector::Zero(dofs_.count());
  for (const auto& edge : dofs_.edge_nodes) {
    for (std::size_t s = 0; s + 1 < edge.size(); ++s) {
      b_flux[edge[s]] += 0.5 * h / perimeter;
      b_flux[edge[s + 1]] += 0.5 * h / perimeter;
    }
  }

  LocalSourceSolution sol;
  sol.compatibility = std::abs(b_src.sum() - b_flux.sum());
  EDGEMS_CHECK(sol.compatibility <= 1e-12,
               "local_source: Neumann compatibility violated");
  const Vector b = b_src - b_flux;

  const bool pinned = free_boundary_.size() != dofs_.boundary.size();
  if (pinned) {
    // truncated patch: zero on the dD part makes the problem definite
    std::vector<int> loc2free(dofs_.count(), -1), free_nodes;
    for (int l = 0; l < dofs_.count(); ++l) {
      if (dofs_.node_class[l] != NodeClass::BoundaryFixed) {
        loc2free[l] = static_cast<int>(free_nodes.size());
        free_nodes.push_back(l);
      }
    }
    const int nf = static_cast<int>(free_nodes.size());
    SparseMat A_ff = extract_block(A_, loc2free, loc2free, nf, nf);
    Eigen::SimplicialLDLT<SparseMat> ldlt(A_ff);
    EDGEMS_CHECK(ldlt.info() == Eigen::Success,
                 "local_source: factorization failed");
    Vector b_f(nf);
    for (int k = 0; k < nf; ++k) b_f[k] = b[free_nodes[k]];
    Vector x = ldlt.solve(b_f);
    sol.values = Vector::Zero(dofs_.count());
    for (int k = 0; k < nf; ++k) sol.values[free_nodes[k]] = x[k];
    return sol;
  }

  // Pure-Neumann patch: augment with the mean-zero constraint int_omega v = 0.
  const int nl = dofs_.count();
  Vector mean_weight = Vector::Zero(nl);
  for (int j = nb.ja; j < nb.jb; ++j) {
    for (int i = nb.ia; i < nb.ib; ++i) {
      for (int t = 0; t < 2; ++t) {
        const auto tri = fine.triangle_nodes(i, j, t);
        for (int a = 0; a < 3; ++a) {
          const auto ij = fine.node_ij(tri[a]);
          mean_weight[dofs_.local_index(ij[0], ij[1])] += area / 3.0;
        }
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A_.nonZeros() + 2 * nl);
  for (int c = 0; c < A_.outerSize(); ++c)
    for (SparseMat::InnerIterator it(A_, c); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), c, it.value());
  for (int l = 0; l < nl; ++l) {
    trips.emplace_back(nl, l, mean_weight[l]);
    trips.emplace_back(l, nl, mean_weight[l]);
  }
  SparseMat Aug(nl + 1, nl + 1);
  Aug.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SparseMat> lu(Aug);
  EDGEMS_CHECK(lu.info() == Eigen::Success,
               "local_source: saddle-point factorization failed");
  Vector rhs = Vector::Zero(nl + 1);
  rhs.head(nl) = b;
  Vector x = lu.solve(rhs);
  EDGEMS_CHECK(x.allFinite(), "local_source: non-finite solution");
  sol.values = x.head(nl);
  return sol;
}

Vector NeighborhoodOperator::wavelet_boundary_data(int edge,
                                                   const EdgeBasisSet& basis,
                                                   int function) const {
  EDGEMS_REQUIRE(edge >= 0 &&
                     edge < static_cast<int>(dofs_.edge_nodes.size()),
                 "wavelet_boundary_data: edge index out of range");
  EDGEMS_REQUIRE(function >= 0 && function < basis.samples.cols(),
                 "wavelet_boundary_data: function index out of range");
  const auto& nodes = dofs_.edge_nodes[edge];
  EDGEMS_REQUIRE(basis.segments == static_cast<int>(nodes.size()) - 1,
                 "wavelet_boundary_data: basis resolution does not match edge");

  Vector data = Vector::Zero(dofs_.count());
  if (basis.spec.kind == WaveletKind::Hierarchical) {
    for (std::size_t q = 0; q < nodes.size(); ++q)
      data[nodes[q]] = basis.samples(static_cast<int>(q), function);
  } else {
    // P0 per-segment values; every boundary node takes the mean of its
    // adjacent segment values, with zero-extended data on the other edges.
    for (int l : dofs_.boundary) {
      const auto& adj = segment_adjacency_[l];
      if (adj.empty()) continue;
      double acc = 0.0;
      for (const auto& [e, s] : adj)
        if (e == edge) acc += basis.samples(s, function);
      data[l] = acc / static_cast<double>(adj.size());
    }
  }
  for (int l : dofs_.boundary)
    if (dofs_.node_class[l] == NodeClass::BoundaryFixed) data[l] = 0.0;
  return data;
}

Vector harmonic_extend(const GridPair& grids, const CoefficientField& field,
                       int coarse_node, const Vector& boundary_values) {
  return NeighborhoodOperator(grids, field, coarse_node)
      .harmonic_extend(boundary_values);
}

SteklovDecomposition steklov_eigens(const GridPair& grids,
                                    const CoefficientField& field,
                                    int coarse_node, int count) {
  return NeighborhoodOperator(grids, field, coarse_node).steklov_eigens(count);
}

LocalSourceSolution local_source(const GridPair& grids,
                                 const CoefficientField& field,
                                 const WeightedCoefficient& weighted,
                                 int coarse_node) {
  return NeighborhoodOperator(grids, field, coarse_node)
      .local_source(weighted);
}

}  // namespace edgems
