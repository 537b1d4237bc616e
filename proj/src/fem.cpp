#include "edgems/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "edgems/common.hpp"

namespace edgems {

namespace {

// Element stiffness for the two triangle types with kappa = 1; independent of
// h in 2D. Vertex order matches FineGrid::triangle_nodes.
constexpr double kElem0[3][3] = {{0.5, -0.5, 0.0},
                                 {-0.5, 1.0, -0.5},
                                 {0.0, -0.5, 0.5}};
constexpr double kElem1[3][3] = {{0.5, 0.0, -0.5},
                                 {0.0, 0.5, -0.5},
                                 {-0.5, -0.5, 1.0}};

void check_field(const FineGrid& grid, const CoefficientField& field,
                 const char* who) {
  EDGEMS_REQUIRE(field.nx == grid.nx && field.ny == grid.ny,
                 std::string(who) + ": field does not match the grid");
}

// Split a full system into the free block, takeing prescribed values to the
// right-hand side.
struct Reduced {
  SparseMat A;
  Vector b;
  std::vector<int> free_of_full;  // free index -> full index
};

Reduced reduce(const SparseSystem& sys) {
  const int n = static_cast<int>(sys.matrix.rows());
  std::vector<int> full_to_free(n, -1);
  std::vector<double> prescribed(n, 0.0);
  std::vector<char> is_constrained(n, 0);
  for (std::size_t k = 0; k < sys.constrained.size(); ++k) {
    is_constrained[sys.constrained[k]] = 1;
    prescribed[sys.constrained[k]] = sys.constrained_values[k];
  }
  Reduced r;
  for (int p = 0; p < n; ++p) {
    if (!is_constrained[p]) {
      full_to_free[p] = static_cast<int>(r.free_of_full.size());
      r.free_of_full.push_back(p);
    }
  }
  const int nf = static_cast<int>(r.free_of_full.size());
  r.b = Vector::Zero(nf);
  for (int p = 0; p < nf; ++p) r.b[p] = sys.load[r.free_of_full[p]];

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.matrix.nonZeros());
  for (int col = 0; col < n; ++col) {
    for (SparseMat::InnerIterator it(sys.matrix, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (is_constrained[row]) continue;
      if (is_constrained[col]) {
        r.b[full_to_free[row]] -= it.value() * prescribed[col];
      } else {
        trips.emplace_back(full_to_free[row], full_to_free[col], it.value());
      }
    }
  }
  r.A.resize(nf, nf);
  r.A.setFromTriplets(trips.begin(), trips.end());
  return r;
}

}  // namespace

std::vector<int> boundary_nodes(const FineGrid& grid) {
  std::vector<int> nodes;
  for (int p = 0; p < grid.node_count(); ++p)
    if (grid.node_on_boundary(p)) nodes.push_back(p);
  return nodes;
}

SparseMat assemble_stiffness(const FineGrid& grid,
                             const CoefficientField& field) {
  check_field(grid, field, "assemble_stiffness");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(grid.cell_count()) * 18);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double kappa = field.cell(i, j);
      for (int t = 0; t < 2; ++t) {
        const auto tri = grid.triangle_nodes(i, j, t);
        const auto& E = t == 0 ? kElem0 : kElem1;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            trips.emplace_back(tri[a], tri[b], kappa * E[a][b]);
      }
    }
  }
  SparseMat A(grid.node_count(), grid.node_count());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SparseMat assemble_mass(const FineGrid& grid, const CoefficientField& field) {
  check_field(grid, field, "assemble_mass");
  const double area = 0.5 * grid.h * grid.h;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(grid.cell_count()) * 18);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double w = field.cell(i, j) * area / 12.0;
      for (int t = 0; t < 2; ++t) {
        const auto tri = grid.triangle_nodes(i, j, t);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            trips.emplace_back(tri[a], tri[b], w * (a == b ? 2.0 : 1.0));
      }
    }
  }
  SparseMat M(grid.node_count(), grid.node_count());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Vector assemble_load(const FineGrid& grid, const Vector& nodal_f) {
  EDGEMS_REQUIRE(nodal_f.size() == grid.node_count(),
                 "assemble_load: nodal vector length mismatch");
  const double area = 0.5 * grid.h * grid.h;
  Vector b = Vector::Zero(grid.node_count());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      for (int t = 0; t < 2; ++t) {
        const auto tri = grid.triangle_nodes(i, j, t);
        const double s = nodal_f[tri[0]] + nodal_f[tri[1]] + nodal_f[tri[2]];
        for (int a = 0; a < 3; ++a)
          b[tri[a]] += area / 12.0 * (nodal_f[tri[a]] + s);
      }
    }
  }
  return b;
}

Vector assemble_load(const FineGrid& grid,
                     const std::function<double(double, double)>& f) {
  Vector nodal(grid.node_count());
  for (int p = 0; p < grid.node_count(); ++p) {
    const auto xy = grid.node_xy(p);
    nodal[p] = f(xy[0], xy[1]);
  }
  return assemble_load(grid, nodal);
}

Vector solve(const SparseSystem& sys, double tol, SolveInfo* info) {
  EDGEMS_REQUIRE(sys.matrix.rows() == sys.matrix.cols() &&
                     sys.load.size() == sys.matrix.rows(),
                 "solve: inconsistent system");
  EDGEMS_REQUIRE(sys.constrained.size() ==
                     static_cast<std::size_t>(sys.constrained_values.size()),
                 "solve: constraint bookkeeping mismatch");

  Reduced r = reduce(sys);
  const int nf = static_cast<int>(r.free_of_full.size());
  EDGEMS_CHECK(nf > 0, "solve: no free DOFs");

  // Local problems stay below this size and get a direct factorization; the
  // global fine solve runs diagonally preconditioned CG.
  constexpr int kDirectLimit = 20000;
  Vector x_free;
  SolveInfo si;
  const double bnorm = r.b.norm();
  if (nf <= kDirectLimit) {
    Eigen::SimplicialLDLT<SparseMat> ldlt(r.A);
    EDGEMS_CHECK(ldlt.info() == Eigen::Success,
                 "solve: sparse factorization failed");
    x_free = ldlt.solve(r.b);
    si.direct = true;
    si.residual = bnorm == 0.0 ? 0.0 : (r.A * x_free - r.b).norm() / bnorm;
  } else {
    Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(r.A);
    cg.setTolerance(tol);
    cg.setMaxIterations(50000);
    x_free = cg.solve(r.b);
    si.direct = false;
    si.iterations = static_cast<int>(cg.iterations());
    si.residual = cg.error();
    if (cg.info() != Eigen::Success)
      throw std::runtime_error(
          "solve: conjugate gradient did not converge within " +
          std::to_string(cg.maxIterations()) +
          " iterations (relative residual " + std::to_string(cg.error()) + ")");
  }
  EDGEMS_CHECK(x_free.allFinite(), "solve: non-finite solution");

  Vector x = Vector::Zero(sys.matrix.rows());
  for (int p = 0; p < nf; ++p) x[r.free_of_full[p]] = x_free[p];
  for (std::size_t k = 0; k < sys.constrained.size(); ++k)
    x[sys.constrained[k]] = sys.constrained_values[k];
  if (info) *info = si;
  return x;
}

SparseMat window_stiffness(const FineGrid& grid, const CoefficientField& field,
                           int ci0, int ci1, int cj0, int cj1) {
  check_field(grid, field, "window_stiffness");
  const int cols = ci1 - ci0 + 1;
  const int count = cols * (cj1 - cj0 + 1);
  const auto local = [&](int gi, int gj) {
    return (gj - cj0) * cols + (gi - ci0);
  };
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(ci1 - ci0) * (cj1 - cj0) * 18);
  for (int j = cj0; j < cj1; ++j) {
    for (int i = ci0; i < ci1; ++i) {
      const double kappa = field.cell(i, j);
      for (int t = 0; t < 2; ++t) {
        const int li[3] = {local(i, j),
                           t == 0 ? local(i + 1, j) : local(i + 1, j + 1),
                           t == 0 ? local(i + 1, j + 1) : local(i, j + 1)};
        const auto& E = t == 0 ? kElem0 : kElem1;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            trips.emplace_back(li[a], li[b], kappa * E[a][b]);
      }
    }
  }
  SparseMat A(count, count);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Vector window_load(const FineGrid& grid, const Vector& nodal_f, int ci0,
                   int ci1, int cj0, int cj1) {
  EDGEMS_REQUIRE(nodal_f.size() == grid.node_count(),
                 "window_load: nodal vector length mismatch");
  const int cols = ci1 - ci0 + 1;
  const double area = 0.5 * grid.h * grid.h;
  Vector b = Vector::Zero(cols * (cj1 - cj0 + 1));
  const auto local = [&](int gi, int gj) {
    return (gj - cj0) * cols + (gi - ci0);
  };
  for (int j = cj0; j < cj1; ++j) {
    for (int i = ci0; i < ci1; ++i) {
      for (int t = 0; t < 2; ++t) {
        const auto tri = grid.triangle_nodes(i, j, t);
        const double s = nodal_f[tri[0]] + nodal_f[tri[1]] + nodal_f[tri[2]];
        for (int a = 0; a < 3; ++a) {
          const auto ij = grid.node_ij(tri[a]);
          b[local(ij[0], ij[1])] += area / 12.0 * (nodal_f[tri[a]] + s);
        }
      }
    }
  }
  return b;
}

Vector fine_reference(const FineGrid& grid, const CoefficientField& field,
                      const std::function<double(double, double)>& f,
                      double tol, SolveInfo* info) {
  SparseSystem sys;
  sys.matrix = assemble_stiffness(grid, field);
  sys.load = assemble_load(grid, f);
  sys.constrained = boundary_nodes(grid);
  sys.constrained_values = Vector::Zero(sys.constrained.size());
  return solve(sys, tol, info);
}

}  // namespace edgems
