#include "edgems/ms_space.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "edgems/common.hpp"
#include "edgems/parallel.hpp"

namespace edgems {

namespace {

struct NbResult {
  std::vector<GlobalBasisFunction> functions;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int pruned = 0;
};

// chi_i times a local patch function, clipped to zero on dD so the global
// function is admissible in H^1_0.
Vector product_values(const FineGrid& fine, const PouFunction& chi,
                      const NeighborhoodDofs& dofs, const Vector& local) {
  Vector v(dofs.count());
  for (int lj = 0; lj < dofs.rows; ++lj) {
    for (int li = 0; li < dofs.cols; ++li) {
      const int gi = dofs.ia + li, gj = dofs.ja + lj;
      const int l = lj * dofs.cols + li;
      const bool on_dD = gi == 0 || gi == fine.nx || gj == 0 || gj == fine.ny;
      v[l] = on_dD ? 0.0 : chi.values[l] * local[l];
    }
  }
  return v;
}

GlobalBasisFunction wrap(const NeighborhoodDofs& dofs, Vector values,
                         BasisTag tag) {
  GlobalBasisFunction f;
  f.ia = dofs.ia;
  f.ja = dofs.ja;
  f.cols = dofs.cols;
  f.rows = dofs.rows;
  f.values = std::move(values);
  f.tag = tag;
  return f;
}

// Greedy dependence pruning against the energy Gram matrix: while the
// smallest relative eigenvalue is below 1e-12, drop the candidate carrying
// the largest weight in the null direction.
int prune_dependent(const SparseMat& A_patch, std::vector<Vector>& cand,
                    std::vector<BasisTag>& tags) {
  const int m = static_cast<int>(cand.size());
  if (m == 0) return 0;
  Eigen::MatrixXd G(m, m);
  std::vector<Vector> Av(m);
  for (int l = 0; l < m; ++l) Av[l] = A_patch * cand[l];
  for (int k = 0; k < m; ++k)
    for (int l = 0; l <= k; ++l) G(k, l) = G(l, k) = cand[k].dot(Av[l]);

  std::vector<int> alive(m);
  for (int k = 0; k < m; ++k) alive[k] = k;
  int dropped = 0;
  while (!alive.empty()) {
    const int ma = static_cast<int>(alive.size());
    Eigen::MatrixXd Gs(ma, ma);
    for (int k = 0; k < ma; ++k)
      for (int l = 0; l < ma; ++l) Gs(k, l) = G(alive[k], alive[l]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gs);
    const double lmax = es.eigenvalues()(ma - 1);
    if (lmax <= 0.0) {  // everything left is numerically zero
      dropped += ma;
      alive.clear();
      break;
    }
    if (ma == 1 || es.eigenvalues()(0) >= 1e-12 * lmax) break;
    const auto null_dir = es.eigenvectors().col(0);
    int drop_at = 0;
    for (int k = 1; k < ma; ++k)
      if (std::abs(null_dir[k]) >= std::abs(null_dir[drop_at])) drop_at = k;
    alive.erase(alive.begin() + drop_at);
    ++dropped;
  }
  std::vector<Vector> kept_c;
  std::vector<BasisTag> kept_t;
  kept_c.reserve(alive.size());
  for (int k : alive) {
    kept_c.push_back(std::move(cand[k]));
    kept_t.push_back(tags[k]);
  }
  cand = std::move(kept_c);
  tags = std::move(kept_t);
  return dropped;
}

void finalize_neighborhood(const FineGrid& fine, const PouFunction& chi,
                           const NeighborhoodDofs& dofs,
                           const SparseMat& A_patch,
                           std::vector<Vector> locals,
                           std::vector<BasisTag> tags, NbResult& out) {
  std::vector<Vector> products;
  products.reserve(locals.size());
  for (const Vector& l : locals)
    products.push_back(product_values(fine, chi, dofs, l));
  out.pruned = prune_dependent(A_patch, products, tags);
  for (std::size_t k = 0; k < products.size(); ++k)
    out.functions.push_back(wrap(dofs, std::move(products[k]), tags[k]));
}

MultiscaleSpace merge(std::vector<NbResult>& results, bool esmsfem) {
  MultiscaleSpace space;
  double lambda = std::numeric_limits<double>::infinity();
  for (NbResult& r : results) {
    space.pruned += r.pruned;
    if (esmsfem) lambda = std::min(lambda, r.lambda);
    for (GlobalBasisFunction& f : r.functions)
      space.functions.push_back(std::move(f));
  }
  if (esmsfem) space.lambda_min = lambda;
  return space;
}

}  // namespace

MultiscaleSpace build_esmsfem_space(const GridPair& grids,
                                    const CoefficientField& field, int nb,
                                    const PouBasis& pou,
                                    const WeightedCoefficient& weighted,
                                    int workers) {
  EDGEMS_REQUIRE(nb >= 1, "build_esmsfem_space: nb must be >= 1");
  const int N = grids.coarse.node_count();
  EDGEMS_REQUIRE(static_cast<int>(pou.chi.size()) == N,
                 "build_esmsfem_space: pou does not match the grid");
  std::vector<NbResult> results(N);
  parallel_for(N, workers, [&](int i) {
    NeighborhoodOperator op(grids, field, i);
    // lambda_{nb+1} is reported, so nb+1 eigenpairs are required
    const auto dec = op.steklov_eigens(nb + 1);
    const auto source = op.local_source(weighted);
    std::vector<Vector> locals;
    std::vector<BasisTag> tags;
    for (int k = 0; k + 1 < nb; ++k) {
      locals.push_back(dec.extensions.col(k));
      tags.push_back({i, BasisTag::Kind::Spectral, k});
    }
    locals.push_back(source.values);
    tags.push_back({i, BasisTag::Kind::Source, 0});
    results[i].lambda = dec.eigenvalues[nb];
    finalize_neighborhood(grids.fine, pou.chi[i], op.dofs(),
                          op.patch_stiffness(), std::move(locals),
                          std::move(tags), results[i]);
  });
  return merge(results, true);
}

MultiscaleSpace build_wemsfem_space(const GridPair& grids,
                                    const CoefficientField& field,
                                    WaveletSpec spec, const PouBasis& pou,
                                    const WeightedCoefficient& weighted,
                                    int workers) {
  const int N = grids.coarse.node_count();
  EDGEMS_REQUIRE(static_cast<int>(pou.chi.size()) == N,
                 "build_wemsfem_space: pou does not match the grid");
  std::vector<NbResult> results(N);
  parallel_for(N, workers, [&](int i) {
    NeighborhoodOperator op(grids, field, i);
    const auto& dofs = op.dofs();
    std::vector<Vector> locals;
    std::vector<BasisTag> tags;
    int flat = 0;
    for (std::size_t e = 0; e < dofs.edge_nodes.size(); ++e) {
      const int segments =
          static_cast<int>(dofs.edge_nodes[e].size()) - 1;
      const EdgeBasisSet basis = edge_basis(segments, spec);
      for (int fn = 0; fn < basis.samples.cols(); ++fn) {
        const Vector data =
            op.wavelet_boundary_data(static_cast<int>(e), basis, fn);
        locals.push_back(op.harmonic_extend(data));
        tags.push_back({i, BasisTag::Kind::Wavelet, flat++});
      }
    }
    const auto source = op.local_source(weighted);
    locals.push_back(source.values);
    tags.push_back({i, BasisTag::Kind::Source, 0});
    finalize_neighborhood(grids.fine, pou.chi[i], dofs, op.patch_stiffness(),
                          std::move(locals), std::move(tags), results[i]);
  });
  return merge(results, false);
}

namespace {

// Oversampled local problems of one coarse cell: kappa-harmonic solves with
// bilinear data on the enlarged patch, restricted to K and corner-matched.
struct CellBasis {
  std::array<Vector, 4> corner;  // (n+1)^2 blocks, corner order
                                 // (0,0),(1,0),(0,1),(1,1)
  bool fallback = false;
};

CellBasis oversampled_cell_basis(const GridPair& grids,
                                 const CoefficientField& field,
                                 const PouBasis& pou, int cell, int extend) {
  const FineGrid& fine = grids.fine;
  const CoarseGrid& coarse = grids.coarse;
  const int n = coarse.refinement;
  const int kx = cell % coarse.nx, ky = cell / coarse.nx;
  const int wi0 = std::max(kx * n - extend, 0);
  const int wi1 = std::min((kx + 1) * n + extend, fine.nx);
  const int wj0 = std::max(ky * n - extend, 0);
  const int wj1 = std::min((ky + 1) * n + extend, fine.ny);
  const int wcols = wi1 - wi0 + 1, wrows = wj1 - wj0 + 1;
  const int wcount = wcols * wrows;
  const auto wlocal = [&](int gi, int gj) {
    return (gj - wj0) * wcols + (gi - wi0);
  };

  SparseMat A = window_stiffness(fine, field, wi0, wi1, wj0, wj1);
  std::vector<int> loc2int(wcount, -1), interior;
  for (int lj = 1; lj < wrows - 1; ++lj)
    for (int li = 1; li < wcols - 1; ++li) {
      loc2int[lj * wcols + li] = static_cast<int>(interior.size());
      interior.push_back(lj * wcols + li);
    }
  const int ni = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < A.outerSize(); ++c) {
    if (loc2int[c] < 0) continue;
    for (SparseMat::InnerIterator it(A, c); it; ++it)
      if (loc2int[it.row()] >= 0)
        trips.emplace_back(loc2int[it.row()], loc2int[c], it.value());
  }
  SparseMat A_II(ni, ni);
  A_II.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SparseMat> ldlt(A_II);
  EDGEMS_CHECK(ldlt.info() == Eigen::Success,
               "build_msfem_space: oversampled factorization failed");

  const double x0 = wi0 * fine.h, x1 = wi1 * fine.h;
  const double y0 = wj0 * fine.h, y1 = wj1 * fine.h;
  std::array<Vector, 4> w_full;
  for (int m = 0; m < 4; ++m) {
    Vector g = Vector::Zero(wcount);
    for (int lj = 0; lj < wrows; ++lj) {
      for (int li = 0; li < wcols; ++li) {
        if (li != 0 && li != wcols - 1 && lj != 0 && lj != wrows - 1) continue;
        const double tx = (wi0 + li) * fine.h;
        const double ty = (wj0 + lj) * fine.h;
        const double fx = (tx - x0) / (x1 - x0), fy = (ty - y0) / (y1 - y0);
        g[lj * wcols + li] =
            (m & 1 ? fx : 1.0 - fx) * (m & 2 ? fy : 1.0 - fy);
      }
    }
    Vector rhs = Vector::Zero(ni);
    for (int c = 0; c < A.outerSize(); ++c) {
      if (g[c] == 0.0) continue;
      for (SparseMat::InnerIterator it(A, c); it; ++it)
        if (loc2int[it.row()] >= 0) rhs[loc2int[it.row()]] -= it.value() * g[c];
    }
    Vector x_int = ldlt.solve(rhs);
    for (int k = 0; k < ni; ++k) g[interior[k]] = x_int[k];
    w_full[m] = std::move(g);
  }

  // restrict to K and match the nodal basis at K's four corners
  const int ki0 = kx * n, kj0 = ky * n;
  const int kcols = n + 1;
  std::array<Vector, 4> wK;
  for (int m = 0; m < 4; ++m) {
    wK[m].resize(kcols * kcols);
    for (int lj = 0; lj <= n; ++lj)
      for (int li = 0; li <= n; ++li)
        wK[m][lj * kcols + li] = w_full[m][wlocal(ki0 + li, kj0 + lj)];
  }
  Eigen::Matrix4d V;
  const int corner_local[4] = {0, n, n * kcols, n * kcols + n};
  for (int jc = 0; jc < 4; ++jc)
    for (int m = 0; m < 4; ++m) V(jc, m) = wK[m][corner_local[jc]];

  CellBasis out;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(V);
  if (lu.rank() < 4) {
    out.fallback = true;
    for (int jc = 0; jc < 4; ++jc) {
      const int ci = kx + (jc & 1), cj = ky + ((jc >> 1) & 1);
      const PouFunction& chi = pou.chi[coarse.node_index(ci, cj)];
      Vector v(kcols * kcols);
      for (int lj = 0; lj <= n; ++lj)
        for (int li = 0; li <= n; ++li)
          v[lj * kcols + li] = chi.value_at(ki0 + li, kj0 + lj);
      out.corner[jc] = std::move(v);
    }
    return out;
  }
  const Eigen::Matrix4d C = lu.inverse();
  for (int jc = 0; jc < 4; ++jc) {
    Vector v = Vector::Zero(kcols * kcols);
    for (int m = 0; m < 4; ++m) v += C(m, jc) * wK[m];
    out.corner[jc] = std::move(v);
  }
  return out;
}

}  // namespace

MultiscaleSpace build_msfem_space(const GridPair& grids,
                                  const CoefficientField& field,
                                  Oversampling oversampling,
                                  const PouBasis& pou, int workers) {
  const FineGrid& fine = grids.fine;
  const CoarseGrid& coarse = grids.coarse;
  const int N = coarse.node_count();
  EDGEMS_REQUIRE(static_cast<int>(pou.chi.size()) == N,
                 "build_msfem_space: pou does not match the grid");

  MultiscaleSpace space;
  if (oversampling == Oversampling::None) {
    for (int i = 0; i < N; ++i) {
      const NeighborhoodDofs dofs = neighborhood_dofs(grids, i);
      Vector local = Vector::Ones(dofs.count());
      space.functions.push_back(
          wrap(dofs, product_values(fine, pou.chi[i], dofs, local),
               {i, BasisTag::Kind::Msfem, 0}));
    }
    return space;
  }

  const int n = coarse.refinement;
  const int extend = oversampling == Oversampling::Half ? n / 2 : n;
  std::vector<CellBasis> cell_basis(coarse.cell_count());
  parallel_for(coarse.cell_count(), workers, [&](int cell) {
    cell_basis[cell] = oversampled_cell_basis(grids, field, pou, cell, extend);
  });
  for (int cell = 0; cell < coarse.cell_count(); ++cell)
    if (cell_basis[cell].fallback) space.oversampling_fallbacks.push_back(cell);

  const int kcols = n + 1;
  for (int i = 0; i < N; ++i) {
    const auto ij = coarse.node_ij(i);
    BrokenBasisFunction f;
    f.tag = {i, BasisTag::Kind::Msfem, 0};
    const Neighborhood& nb = coarse.neighborhoods[i];
    for (int cell : nb.coarse_cells) {
      const int kx = cell % coarse.nx, ky = cell / coarse.nx;
      const int corner = (ij[0] - kx) + 2 * (ij[1] - ky);
      Vector vals = cell_basis[cell].corner[corner];
      // admissibility: clip dD nodes
      for (int lj = 0; lj <= n; ++lj) {
        for (int li = 0; li <= n; ++li) {
          const int gi = kx * n + li, gj = ky * n + lj;
          if (gi == 0 || gi == fine.nx || gj == 0 || gj == fine.ny)
            vals[lj * kcols + li] = 0.0;
        }
      }
      f.cells.push_back(cell);
      f.cell_values.push_back(std::move(vals));
    }
    space.broken.push_back(std::move(f));
  }
  return space;
}

namespace {

// Solve the reduced SPD system with a sparse factorization; on failure retry
// once with the tiny Tikhonov shift, then report the near-dependent indices.
Vector solve_reduced(const SparseMat& B, const Vector& rhs, double* shift_out) {
  const int dim = static_cast<int>(B.rows());
  auto attempt = [&](double shift, Vector& out) -> bool {
    SparseMat Bs = B;
    if (shift > 0.0) {
      SparseMat I(dim, dim);
      I.setIdentity();
      Bs = B + shift * I;
    }
    Eigen::SimplicialLDLT<SparseMat> ldlt(Bs);
    if (ldlt.info() != Eigen::Success) return false;
    out = ldlt.solve(rhs);
    out += ldlt.solve(rhs - Bs * out);  // one refinement pass
    return out.allFinite();
  };
  Vector c;
  if (attempt(0.0, c)) {
    *shift_out = 0.0;
    return c;
  }
  double trace = 0.0;
  for (int k = 0; k < dim; ++k) trace += B.coeff(k, k);
  const double shift = 1e-14 * trace / dim;
  if (attempt(shift, c)) {
    *shift_out = shift;
    return c;
  }
  std::string dependents;
  double dmax = 0.0;
  for (int k = 0; k < dim; ++k) dmax = std::max(dmax, B.coeff(k, k));
  for (int k = 0; k < dim; ++k)
    if (B.coeff(k, k) <= 1e-14 * dmax)
      dependents += (dependents.empty() ? "" : ", ") + std::to_string(k);
  throw std::runtime_error(
      "coarse_solve: reduced system numerically singular after pruning" +
      (dependents.empty() ? std::string()
                          : "; near-dependent basis indices: " + dependents));
}

bool windows_intersect(const GlobalBasisFunction& a, int ia, int ja, int ib,
                       int jb) {
  return !(a.ia + a.cols - 1 < ia || ib < a.ia || a.ja + a.rows - 1 < ja ||
           jb < a.ja);
}

}  // namespace

CoarseSolution coarse_solve(const GridPair& grids,
                            const CoefficientField& field,
                            const MultiscaleSpace& space,
                            const Vector& f_nodal) {
  const FineGrid& fine = grids.fine;
  EDGEMS_REQUIRE(space.dimension() > 0, "coarse_solve: empty space");
  EDGEMS_REQUIRE(f_nodal.size() == fine.node_count(),
                 "coarse_solve: f must be nodal on the fine grid");

  CoarseSolution sol;
  if (space.conforming()) {
    const auto& funcs = space.functions;
    const int dim = static_cast<int>(funcs.size());
    const SparseMat A = assemble_stiffness(fine, field);
    const Vector b = assemble_load(fine, f_nodal);

    Vector rhs(dim);
    for (int k = 0; k < dim; ++k) {
      const auto& f = funcs[k];
      double acc = 0.0;
      for (int lj = 0; lj < f.rows; ++lj)
        for (int li = 0; li < f.cols; ++li)
          acc += f.values[lj * f.cols + li] *
                 b[fine.node_index(f.ia + li, f.ja + lj)];
      rhs[k] = acc;
    }

    // candidate pairs: functions of nearby coarse nodes (supports overlap
    // only for nodes at most two apart); test-injected functions without a
    // node fall back to checking everything
    std::vector<std::vector<int>> node_funcs;
    std::vector<int> unbucketed;
    const int coarse_nodes = grids.coarse.node_count();
    node_funcs.resize(coarse_nodes);
    for (int k = 0; k < dim; ++k) {
      const int node = funcs[k].tag.coarse_node;
      if (node >= 0 && node < coarse_nodes)
        node_funcs[node].push_back(k);
      else
        unbucketed.push_back(k);
    }
    std::vector<int> candidates;
    const auto gather_candidates = [&](int l) {
      candidates.clear();
      const int node = funcs[l].tag.coarse_node;
      if (node < 0 || node >= coarse_nodes) {
        for (int k = 0; k < dim; ++k) candidates.push_back(k);
        return;
      }
      candidates = unbucketed;
      const auto ij = grids.coarse.node_ij(node);
      for (int dj = -2; dj <= 2; ++dj) {
        for (int di = -2; di <= 2; ++di) {
          const int ci = ij[0] + di, cj = ij[1] + dj;
          if (ci < 0 || ci > grids.coarse.nx || cj < 0 || cj > grids.coarse.nx)
            continue;
          const auto& bucket = node_funcs[grids.coarse.node_index(ci, cj)];
          candidates.insert(candidates.end(), bucket.begin(), bucket.end());
        }
      }
    };

    std::vector<Eigen::Triplet<double>> trips;
    for (int l = 0; l < dim; ++l) {
      const auto& fl = funcs[l];
      // A * psi_l lives on the window grown by one node ring
      const int eia = std::max(fl.ia - 1, 0);
      const int eja = std::max(fl.ja - 1, 0);
      const int eib = std::min(fl.ia + fl.cols, fine.nx);
      const int ejb = std::min(fl.ja + fl.rows, fine.ny);
      const int ecols = eib - eia + 1;
      Vector Y = Vector::Zero(ecols * (ejb - eja + 1));
      for (int lj = 0; lj < fl.rows; ++lj) {
        for (int li = 0; li < fl.cols; ++li) {
          const double val = fl.values[lj * fl.cols + li];
          if (val == 0.0) continue;
          const int col = fine.node_index(fl.ia + li, fl.ja + lj);
          for (SparseMat::InnerIterator it(A, col); it; ++it) {
            const int gi = static_cast<int>(it.row()) % (fine.nx + 1);
            const int gj = static_cast<int>(it.row()) / (fine.nx + 1);
            if (gi < eia || gi > eib || gj < eja || gj > ejb) continue;
            Y[(gj - eja) * ecols + (gi - eia)] += it.value() * val;
          }
        }
      }
      gather_candidates(l);
      for (int k : candidates) {
        if (k > l) continue;
        const auto& fk = funcs[k];
        if (!windows_intersect(fk, eia, eja, eib, ejb)) continue;
        const int i0 = std::max(fk.ia, eia), i1 = std::min(fk.ia + fk.cols - 1, eib);
        const int j0 = std::max(fk.ja, eja), j1 = std::min(fk.ja + fk.rows - 1, ejb);
        double acc = 0.0;
        for (int gj = j0; gj <= j1; ++gj)
          for (int gi = i0; gi <= i1; ++gi)
            acc += fk.values[(gj - fk.ja) * fk.cols + (gi - fk.ia)] *
                   Y[(gj - eja) * ecols + (gi - eia)];
        if (acc != 0.0) {
          trips.emplace_back(k, l, acc);
          if (k != l) trips.emplace_back(l, k, acc);
        }
      }
    }
    SparseMat B(dim, dim);
    B.setFromTriplets(trips.begin(), trips.end());
    sol.coefficients = solve_reduced(B, rhs, &sol.tikhonov_shift);

    sol.u = Vector::Zero(fine.node_count());
    for (int k = 0; k < dim; ++k) {
      const auto& f = funcs[k];
      const double c = sol.coefficients[k];
      for (int lj = 0; lj < f.rows; ++lj)
        for (int li = 0; li < f.cols; ++li)
          sol.u[fine.node_index(f.ia + li, f.ja + lj)] +=
              c * f.values[lj * f.cols + li];
    }
    return sol;
  }

  // broken (oversampled MsFEM) path: cellwise forms
  const CoarseGrid& coarse = grids.coarse;
  const int n = coarse.refinement;
  const int dim = static_cast<int>(space.broken.size());
  std::vector<std::vector<std::pair<int, int>>> active(coarse.cell_count());
  for (int k = 0; k < dim; ++k) {
    const auto& f = space.broken[k];
    for (std::size_t s = 0; s < f.cells.size(); ++s)
      active[f.cells[s]].emplace_back(k, static_cast<int>(s));
  }
  Eigen::MatrixXd Bd = Eigen::MatrixXd::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  for (int cell = 0; cell < coarse.cell_count(); ++cell) {
    if (active[cell].empty()) continue;
    const int kx = cell % coarse.nx, ky = cell / coarse.nx;
    const SparseMat A_K = window_stiffness(fine, field, kx * n, (kx + 1) * n,
                                           ky * n, (ky + 1) * n);
    const Vector lb = window_load(fine, f_nodal, kx * n, (kx + 1) * n, ky * n,
                                  (ky + 1) * n);
    for (const auto& [k1, s1] : active[cell]) {
      const Vector& v1 = space.broken[k1].cell_values[s1];
      rhs[k1] += v1.dot(lb);
      const Vector Av1 = A_K * v1;
      for (const auto& [k2, s2] : active[cell]) {
        if (k2 > k1) continue;
        const double acc = space.broken[k2].cell_values[s2].dot(Av1);
        Bd(k1, k2) += acc;
        if (k1 != k2) Bd(k2, k1) += acc;
      }
    }
  }
  sol.coefficients = solve_reduced(Bd.sparseView(), rhs, &sol.tikhonov_shift);
  sol.u_cells.assign(coarse.cell_count(), Vector::Zero((n + 1) * (n + 1)));
  for (int k = 0; k < dim; ++k) {
    const auto& f = space.broken[k];
    for (std::size_t s = 0; s < f.cells.size(); ++s)
      sol.u_cells[f.cells[s]] += sol.coefficients[k] * f.cell_values[s];
  }
  return sol;
}

double galerkin_residual(const GridPair& grids, const CoefficientField& field,
                         const MultiscaleSpace& space,
                         const CoarseSolution& solution,
                         const Vector& f_nodal) {
  const FineGrid& fine = grids.fine;
  double res = 0.0;
  if (space.conforming()) {
    const SparseMat A = assemble_stiffness(fine, field);
    const Vector b = assemble_load(fine, f_nodal);
    const Vector r = b - A * solution.u;
    for (const auto& f : space.functions) {
      double acc = 0.0;
      for (int lj = 0; lj < f.rows; ++lj)
        for (int li = 0; li < f.cols; ++li)
          acc += f.values[lj * f.cols + li] *
                 r[fine.node_index(f.ia + li, f.ja + lj)];
      res = std::max(res, std::abs(acc));
    }
    return res;
  }
  const CoarseGrid& coarse = grids.coarse;
  const int n = coarse.refinement;
  Vector r = Vector::Zero(space.broken.size());
  for (int cell = 0; cell < coarse.cell_count(); ++cell) {
    const int kx = cell % coarse.nx, ky = cell / coarse.nx;
    const SparseMat A_K = window_stiffness(fine, field, kx * n, (kx + 1) * n,
                                           ky * n, (ky + 1) * n);
    const Vector lb = window_load(fine, f_nodal, kx * n, (kx + 1) * n, ky * n,
                                  (ky + 1) * n);
    const Vector res_cell = lb - A_K * solution.u_cells[cell];
    for (std::size_t k = 0; k < space.broken.size(); ++k) {
      const auto& f = space.broken[k];
      for (std::size_t s = 0; s < f.cells.size(); ++s)
        if (f.cells[s] == cell) r[k] += f.cell_values[s].dot(res_cell);
    }
  }
  return r.cwiseAbs().maxCoeff();
}

}  // namespace edgems
