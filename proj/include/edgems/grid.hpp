#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace edgems {

/// Structured fine mesh over [0,1]^2: nx*ny square cells of side h, each cell
/// split into two P1 triangles along its bottom-left -> top-right diagonal.
/// Nodes and cells are numbered row-major with row 0 at y=0.
struct FineGrid {
  int nx = 0;  ///< cells along x
  int ny = 0;  ///< cells along y
  double h = 0.0;

  int node_count() const { return (nx + 1) * (ny + 1); }
  int cell_count() const { return nx * ny; }
  int node_index(int i, int j) const { return j * (nx + 1) + i; }
  int cell_index(int i, int j) const { return j * nx + i; }

  std::array<int, 2> node_ij(int p) const {
    return {p % (nx + 1), p / (nx + 1)};
  }
  std::array<double, 2> node_xy(int p) const {
    const auto ij = node_ij(p);
    return {ij[0] * h, ij[1] * h};
  }
  bool node_on_boundary(int p) const {
    const auto ij = node_ij(p);
    return ij[0] == 0 || ij[0] == nx || ij[1] == 0 || ij[1] == ny;
  }

  /// Vertex node ids of triangle `t` (0 = below the diagonal, 1 = above) of
  /// cell (i,j). Vertices are listed counterclockwise.
  std::array<int, 3> triangle_nodes(int i, int j, int t) const {
    const int v00 = node_index(i, j);
    const int v10 = node_index(i + 1, j);
    const int v01 = node_index(i, j + 1);
    const int v11 = node_index(i + 1, j + 1);
    return t == 0 ? std::array<int, 3>{v00, v10, v11}
                  : std::array<int, 3>{v00, v11, v01};
  }
};

/// One boundary segment Gamma_{i,k} of a coarse neighborhood: an axis-aligned
/// run of fine edges. Nodes are ordered canonically (left->right for
/// horizontal edges, bottom->top for vertical ones) and include both
/// endpoints, so the edge has nodes.size()-1 fine segments.
struct CoarseEdge {
  std::vector<int> nodes;  ///< global fine-node ids, canonical order
  bool horizontal = false;
  double length = 0.0;  ///< 2H for a full side, H for a truncated piece

  int segment_count() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Coarse neighborhood omega_i: the union of coarse cells sharing coarse node
/// i. Always a rectangle on this structured mesh; stored as its fine-node
/// window [ia..ib] x [ja..jb].
struct Neighborhood {
  int coarse_node = -1;
  int ia = 0, ib = 0;  ///< fine-node column range, inclusive
  int ja = 0, jb = 0;  ///< fine-node row range, inclusive
  bool truncated = false;           ///< coarse node lies on the domain boundary
  std::vector<int> coarse_cells;    ///< coarse-cell ids forming omega_i
  std::vector<CoarseEdge> edges;    ///< Gamma_{i,k}; for truncated
                                    ///< neighborhoods only the segments off
                                    ///< the domain boundary

  int node_cols() const { return ib - ia + 1; }
  int node_rows() const { return jb - ja + 1; }
  int node_count() const { return node_cols() * node_rows(); }
  /// Total length of the edges (the |d omega_i| used by the local source
  /// problem; excludes any part of d omega_i on dD for truncated patches).
  double edge_length() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.length;
    return s;
  }
};

/// Coarse mesh over [0,1]^2 with per-node neighborhoods.
struct CoarseGrid {
  int nx = 0;  ///< coarse cells per axis
  double H = 0.0;
  int refinement = 0;  ///< fine cells per coarse cell per axis (n = H/h)

  int node_count() const { return (nx + 1) * (nx + 1); }
  int cell_count() const { return nx * nx; }
  int node_index(int ci, int cj) const { return cj * (nx + 1) + ci; }
  int cell_index(int ci, int cj) const { return cj * nx + ci; }
  std::array<int, 2> node_ij(int c) const { return {c % (nx + 1), c / (nx + 1)}; }
  bool node_on_boundary(int c) const {
    const auto ij = node_ij(c);
    return ij[0] == 0 || ij[0] == nx || ij[1] == 0 || ij[1] == nx;
  }

  std::vector<Neighborhood> neighborhoods;  ///< one per coarse node, row-major
};

struct GridPair {
  FineGrid fine;
  CoarseGrid coarse;
};

/// Build nested coarse/fine grids: nx_coarse coarse cells per axis, each
/// refined into `refinement` x `refinement` fine cells. `refinement` must be a
/// power of two (>= 2) so that dyadic wavelet breakpoints land on fine nodes.
GridPair build_grids(int nx_coarse, int refinement);

/// Node classes within a neighborhood patch.
enum class NodeClass : std::uint8_t {
  Interior = 0,       ///< strictly inside omega_i
  Boundary = 1,       ///< on d omega_i, carries local boundary data
  BoundaryFixed = 2,  ///< on d omega_i and on dD (truncated patches): pinned 0
};

/// Local degree-of-freedom map of one neighborhood: a bijection between the
/// fine nodes of the closed patch and local indices (row-major over the
/// patch window), plus the interior/boundary partition and per-edge ordered
/// node lists in local indexing.
struct NeighborhoodDofs {
  int ia = 0, ja = 0;  ///< window origin (fine-node indices)
  int cols = 0, rows = 0;

  std::vector<int> to_global;          ///< local -> global fine node
  std::vector<NodeClass> node_class;   ///< per local node
  std::vector<int> interior;           ///< local indices, ascending
  std::vector<int> boundary;           ///< local indices on d omega_i (both classes)
  std::vector<std::vector<int>> edge_nodes;  ///< per edge, local indices, ordered

  int count() const { return cols * rows; }
  int local_index(int gi, int gj) const { return (gj - ja) * cols + (gi - ia); }
};

NeighborhoodDofs neighborhood_dofs(const GridPair& grids, int coarse_node);

}  // namespace edgems
