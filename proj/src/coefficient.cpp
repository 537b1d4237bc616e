#include "edgems/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "edgems/common.hpp"
#include "edgems/fem.hpp"
#include "edgems/local_problems.hpp"

namespace edgems {

namespace {

struct Rect {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

// mt19937_64 output is pinned by the standard; std::uniform_real_distribution
// is not, so draw doubles from raw bits to stay reproducible across platforms.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

CoefficientField rasterize(const FineGrid& grid, const std::vector<Rect>& rects,
                           double contrast) {
  CoefficientField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.value.assign(grid.cell_count(), 1.0);
  bool any = false;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = (i + 0.5) * grid.h, y = (j + 0.5) * grid.h;
      for (const Rect& r : rects) {
        if (r.contains(x, y)) {
          f.value[j * grid.nx + i] = contrast;
          any = true;
          break;
        }
      }
    }
  }
  if (!any && contrast > 1.0 && !rects.empty()) {
    // Guarantee the advertised contrast even on grids too coarse to resolve
    // any feature: mark the cell holding the first rectangle's center.
    const Rect& r = rects.front();
    const int i = std::clamp(
        static_cast<int>(0.5 * (r.x0 + r.x1) * grid.nx), 0, grid.nx - 1);
    const int j = std::clamp(
        static_cast<int>(0.5 * (r.y0 + r.y1) * grid.ny), 0, grid.ny - 1);
    f.value[j * grid.nx + i] = contrast;
  }
  const auto [mn, mx] = std::minmax_element(f.value.begin(), f.value.end());
  f.min_value = *mn;
  f.max_value = *mx;
  return f;
}

std::vector<Rect> random_inclusions(std::mt19937_64& rng, int count) {
  std::vector<Rect> rects;
  rects.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double w = uniform(rng, 0.04, 0.14);
    const double h = uniform(rng, 0.04, 0.14);
    const double x0 = uniform(rng, 0.02, 0.98 - w);
    const double y0 = uniform(rng, 0.02, 0.98 - h);
    rects.push_back({x0, y0, x0 + w, y0 + h});
  }
  return rects;
}

std::vector<Rect> random_channels(std::mt19937_64& rng, int count) {
  std::vector<Rect> rects;
  rects.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double t = uniform(rng, 0.012, 0.03);
    const bool horizontal = (rng() & 1u) == 0;
    const double c0 = uniform(rng, 0.05, 0.95 - t);
    const double lo = uniform(rng, 0.0, 0.2);
    const double hi = uniform(rng, 0.8, 1.0);
    if (horizontal)
      rects.push_back({lo, c0, hi, c0 + t});
    else
      rects.push_back({c0, lo, c0 + t, hi});
  }
  return rects;
}

const std::vector<Rect>& model1_rects() {
  static const std::vector<Rect> rects = {
      // long thin channels
      {0.05, 0.20, 0.95, 0.23},
      {0.00, 0.50, 0.72, 0.53},
      {0.28, 0.76, 1.00, 0.79},
      {0.62, 0.06, 0.65, 0.66},
      // scattered inclusions
      {0.10, 0.08, 0.18, 0.14},
      {0.80, 0.10, 0.88, 0.16},
      {0.34, 0.30, 0.42, 0.38},
      {0.55, 0.33, 0.61, 0.40},
      {0.12, 0.60, 0.20, 0.68},
      {0.45, 0.60, 0.53, 0.66},
      {0.83, 0.55, 0.90, 0.63},
      {0.25, 0.88, 0.33, 0.94},
      {0.68, 0.86, 0.76, 0.92},
      {0.08, 0.36, 0.14, 0.44},
  };
  return rects;
}

const std::vector<Rect>& model3_rects() {
  static const std::vector<Rect> rects = {
      {0.10, 0.10, 0.30, 0.30},
      {0.65, 0.12, 0.88, 0.32},
      {0.40, 0.42, 0.60, 0.62},
      {0.12, 0.68, 0.34, 0.88},
      {0.66, 0.64, 0.90, 0.90},
      {0.00, 0.47, 1.00, 0.50},
  };
  return rects;
}

}  // namespace

CoefficientField constant_field(const FineGrid& grid, double value) {
  EDGEMS_REQUIRE(value > 0.0, "constant_field: value must be positive");
  CoefficientField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.value.assign(grid.cell_count(), value);
  f.min_value = f.max_value = value;
  return f;
}

CoefficientField synthetic_field(const FineGrid& grid, SyntheticKind kind,
                                 double contrast, std::uint64_t seed) {
  EDGEMS_REQUIRE(contrast >= 1.0, "synthetic_field: contrast must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Rect> rects;
  switch (kind) {
    case SyntheticKind::Inclusions:
      rects = random_inclusions(rng, 12);
      break;
    case SyntheticKind::Channels:
      rects = random_channels(rng, 4);
      break;
    case SyntheticKind::Mixed: {
      rects = random_inclusions(rng, 6);
      auto ch = random_channels(rng, 3);
      rects.insert(rects.end(), ch.begin(), ch.end());
      break;
    }
  }
  return rasterize(grid, rects, contrast);
}

CoefficientField preset_field(const FineGrid& grid, const std::string& name,
                              double contrast) {
  EDGEMS_REQUIRE(contrast >= 1.0, "preset_field: contrast must be >= 1");
  if (name == "model1-analogue") return rasterize(grid, model1_rects(), contrast);
  if (name == "model3-analogue") return rasterize(grid, model3_rects(), contrast);
  throw std::invalid_argument("preset_field: unknown preset '" + name +
                              "' (known: model1-analogue, model3-analogue)");
}

std::vector<std::string> preset_names() {
  return {"model1-analogue", "model3-analogue"};
}

CoefficientField load_raster(const FineGrid& grid, const std::string& path) {
  std::ifstream in(path);
  EDGEMS_REQUIRE(in.good(), "load_raster: cannot open '" + path + "'");
  int rnx = 0, rny = 0;
  if (!(in >> rnx >> rny) || rnx <= 0 || rny <= 0)
    throw std::invalid_argument("load_raster: malformed header in '" + path +
                                "' (expected 'nx ny' with positive counts)");
  std::vector<double> raster(static_cast<std::size_t>(rnx) * rny);
  for (std::size_t k = 0; k < raster.size(); ++k) {
    if (!(in >> raster[k]))
      throw std::invalid_argument(
          "load_raster: expected " + std::to_string(raster.size()) +
          " values, file ended after " + std::to_string(k));
    if (!(raster[k] > 0.0))
      throw std::invalid_argument("load_raster: nonpositive value at index " +
                                  std::to_string(k));
  }
  std::string extra;
  if (in >> extra)
    throw std::invalid_argument(
        "load_raster: trailing data after " + std::to_string(raster.size()) +
        " values; raster size does not match its header");

  CoefficientField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.value.resize(grid.cell_count());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = (i + 0.5) * grid.h, y = (j + 0.5) * grid.h;
      const int ri = std::min(static_cast<int>(x * rnx), rnx - 1);
      const int rj = std::min(static_cast<int>(y * rny), rny - 1);
      f.value[j * grid.nx + i] = raster[static_cast<std::size_t>(rj) * rnx + ri];
    }
  }
  const auto [mn, mx] = std::minmax_element(f.value.begin(), f.value.end());
  f.min_value = *mn;
  f.max_value = *mx;
  return f;
}

void write_raster(const CoefficientField& field, std::ostream& out) {
  out << field.nx << ' ' << field.ny << '\n';
  char buf[32];
  for (int j = 0; j < field.ny; ++j) {
    for (int i = 0; i < field.nx; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", field.cell(i, j));
      out << buf << (i + 1 == field.nx ? '\n' : ' ');
    }
  }
}

WeightedCoefficient make_weighted(int nx, int ny, std::vector<double> values) {
  EDGEMS_REQUIRE(static_cast<int>(values.size()) == nx * ny,
                 "make_weighted: value count does not match grid");
  WeightedCoefficient w;
  w.nx = nx;
  w.ny = ny;
  w.value = std::move(values);
  w.inverse.resize(w.value.size());
  for (std::size_t k = 0; k < w.value.size(); ++k)
    w.inverse[k] = w.value[k] == 0.0 ? 1.0 : 1.0 / w.value[k];
  return w;
}

WeightedCoefficient weighted_coefficient(const GridPair& grids,
                                         const CoefficientField& field,
                                         const PouBasis& pou) {
  const FineGrid& fine = grids.fine;
  const CoarseGrid& coarse = grids.coarse;
  EDGEMS_REQUIRE(field.nx == fine.nx && field.ny == fine.ny,
                 "weighted_coefficient: field does not match the fine grid");
  EDGEMS_REQUIRE(static_cast<int>(pou.chi.size()) == coarse.node_count(),
                 "weighted_coefficient: partition of unity does not match the "
                 "coarse grid");

  const int n = coarse.refinement;
  const double H2 = coarse.H * coarse.H;
  std::vector<double> values(fine.cell_count());

  for (int j = 0; j < fine.ny; ++j) {
    for (int i = 0; i < fine.nx; ++i) {
      // the 4 coarse corner nodes of the coarse cell containing this fine cell
      const int kx = i / n, ky = j / n;
      const int corners[4] = {
          coarse.node_index(kx, ky), coarse.node_index(kx + 1, ky),
          coarse.node_index(kx, ky + 1), coarse.node_index(kx + 1, ky + 1)};
      double cell_value = 0.0;
      for (int t = 0; t < 2; ++t) {
        const auto tri = fine.triangle_nodes(i, j, t);
        double grad_sq_sum = 0.0;
        for (int c : corners) {
          const PouFunction& chi = pou.chi[c];
          const auto g = tri_gradient(
              t, chi.local_value(fine, tri[0]), chi.local_value(fine, tri[1]),
              chi.local_value(fine, tri[2]), fine.h);
          grad_sq_sum += g[0] * g[0] + g[1] * g[1];
        }
        cell_value += 0.5 * H2 * field.value[j * fine.nx + i] * grad_sq_sum;
      }
      values[j * fine.nx + i] = cell_value;
    }
  }
  return make_weighted(fine.nx, fine.ny, std::move(values));
}

}  // namespace edgems
