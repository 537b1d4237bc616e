#include "edgems/grid.hpp"

#include <algorithm>

#include "edgems/common.hpp"

namespace edgems {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Collect the fine nodes of an axis-aligned edge, canonical orientation.
CoarseEdge make_edge(const FineGrid& fine, bool horizontal, int fixed, int lo,
                     int hi) {
  CoarseEdge e;
  e.horizontal = horizontal;
  e.length = (hi - lo) * fine.h;
  e.nodes.reserve(hi - lo + 1);
  for (int t = lo; t <= hi; ++t)
    e.nodes.push_back(horizontal ? fine.node_index(t, fixed)
                                 : fine.node_index(fixed, t));
  return e;
}

// The four sides of the patch rectangle in the fixed order bottom, top,
// left, right. For truncated neighborhoods sides lying on dD are dropped and
// any remaining side of two coarse-cell lengths is split at the coarse node
// into two pieces of length H.
void build_edges(const FineGrid& fine, Neighborhood& nb, int n) {
  struct Side {
    bool horizontal;
    int fixed, lo, hi;
    bool on_dD;
  };
  const Side sides[4] = {
      {true, nb.ja, nb.ia, nb.ib, nb.ja == 0},        // bottom
      {true, nb.jb, nb.ia, nb.ib, nb.jb == fine.ny},  // top
      {false, nb.ia, nb.ja, nb.jb, nb.ia == 0},       // left
      {false, nb.ib, nb.ja, nb.jb, nb.ib == fine.nx}  // right
  };
  for (const Side& s : sides) {
    if (nb.truncated) {
      if (s.on_dD) continue;
      if (s.hi - s.lo == 2 * n) {
        const int mid = s.lo + n;
        nb.edges.push_back(make_edge(fine, s.horizontal, s.fixed, s.lo, mid));
        nb.edges.push_back(make_edge(fine, s.horizontal, s.fixed, mid, s.hi));
        continue;
      }
    }
    nb.edges.push_back(make_edge(fine, s.horizontal, s.fixed, s.lo, s.hi));
  }
}

}  // namespace

GridPair build_grids(int nx_coarse, int refinement) {
  EDGEMS_REQUIRE(nx_coarse >= 2, "build_grids: nx_coarse must be >= 2");
  EDGEMS_REQUIRE(refinement >= 2 && is_power_of_two(refinement),
                 "build_grids: refinement factor must be a power of two >= 2 "
                 "so wavelet levels align with fine edges");

  GridPair g;
  g.fine.nx = nx_coarse * refinement;
  g.fine.ny = nx_coarse * refinement;
  g.fine.h = 1.0 / g.fine.nx;

  CoarseGrid& c = g.coarse;
  c.nx = nx_coarse;
  c.H = 1.0 / nx_coarse;
  c.refinement = refinement;
  c.neighborhoods.resize(c.node_count());

  const int n = refinement;
  for (int cj = 0; cj <= c.nx; ++cj) {
    for (int ci = 0; ci <= c.nx; ++ci) {
      Neighborhood& nb = c.neighborhoods[c.node_index(ci, cj)];
      nb.coarse_node = c.node_index(ci, cj);
      nb.truncated = c.node_on_boundary(nb.coarse_node);
      const int cx0 = std::max(ci - 1, 0), cx1 = std::min(ci + 1, c.nx);
      const int cy0 = std::max(cj - 1, 0), cy1 = std::min(cj + 1, c.nx);
      for (int y = cy0; y < cy1; ++y)
        for (int x = cx0; x < cx1; ++x)
          nb.coarse_cells.push_back(c.cell_index(x, y));
      nb.ia = cx0 * n;
      nb.ib = cx1 * n;
      nb.ja = cy0 * n;
      nb.jb = cy1 * n;
      build_edges(g.fine, nb, n);
    }
  }
  return g;
}

NeighborhoodDofs neighborhood_dofs(const GridPair& grids, int coarse_node) {
  const CoarseGrid& c = grids.coarse;
  EDGEMS_REQUIRE(coarse_node >= 0 && coarse_node < c.node_count(),
                 "neighborhood_dofs: coarse node index out of range");
  const Neighborhood& nb = c.neighborhoods[coarse_node];
  const FineGrid& fine = grids.fine;

  NeighborhoodDofs d;
  d.ia = nb.ia;
  d.ja = nb.ja;
  d.cols = nb.node_cols();
  d.rows = nb.node_rows();
  d.to_global.resize(d.count());
  d.node_class.resize(d.count());

  for (int j = nb.ja; j <= nb.jb; ++j) {
    for (int i = nb.ia; i <= nb.ib; ++i) {
      const int l = d.local_index(i, j);
      d.to_global[l] = fine.node_index(i, j);
      const bool on_patch_boundary =
          i == nb.ia || i == nb.ib || j == nb.ja || j == nb.jb;
      if (!on_patch_boundary) {
        d.node_class[l] = NodeClass::Interior;
        d.interior.push_back(l);
        continue;
      }
      const bool on_dD = i == 0 || i == fine.nx || j == 0 || j == fine.ny;
      // Only truncated patches pin their dD part; for interior coarse nodes
      // the whole patch boundary carries local data and the homogeneous
      // Dirichlet condition is applied when global basis functions are formed.
      d.node_class[l] = (nb.truncated && on_dD) ? NodeClass::BoundaryFixed
                                                : NodeClass::Boundary;
      d.boundary.push_back(l);
    }
  }

  d.edge_nodes.reserve(nb.edges.size());
  for (const CoarseEdge& e : nb.edges) {
    std::vector<int> local;
    local.reserve(e.nodes.size());
    for (int g : e.nodes) {
      const int gi = g % (fine.nx + 1), gj = g / (fine.nx + 1);
      local.push_back(d.local_index(gi, gj));
    }
    d.edge_nodes.push_back(std::move(local));
  }
  return d;
}

}  // namespace edgems
