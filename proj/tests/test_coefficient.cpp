#include <doctest.h>

#include <stdexcept>
#include <array>
#include <cstdio>
#include <fstream>

#include "edgems/coefficient.hpp"
#include "edgems/fem.hpp"
#include "edgems/local_problems.hpp"

using namespace edgems;

namespace {

FineGrid make_fine(int n) { return FineGrid{n, n, 1.0 / n}; }

std::string write_temp(const std::string& text) {
  static int counter = 0;
  std::string path = "raster_test_" + std::to_string(counter++) + ".txt";
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("coefficient");

TEST_CASE("constant fields") {
  const FineGrid g = make_fine(8);
  const CoefficientField f = constant_field(g, 1.0);
  CHECK(f.min_value == 1.0);
  CHECK(f.max_value == 1.0);
  CHECK(f.contrast() == 1.0);
  const CoefficientField big = constant_field(g, 1e4);
  CHECK(big.contrast() == 1.0);
  CHECK(constant_field(g, 5.0).value == constant_field(g, 5.0).value);
  CHECK_THROWS_AS(constant_field(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(constant_field(g, -2.0), std::invalid_argument);
}

TEST_CASE("synthetic fields") {
  const FineGrid g = make_fine(32);
  const CoefficientField f =
      synthetic_field(g, SyntheticKind::Inclusions, 1e4, 7);
  CHECK(f.min_value == 1.0);
  CHECK(f.max_value == 1e4);
  CHECK(f.contrast() == 1e4);

  const CoefficientField flat = synthetic_field(g, SyntheticKind::Channels, 1.0, 3);
  CHECK(flat.contrast() == 1.0);
  CHECK(flat.max_value == 1.0);

  const CoefficientField again =
      synthetic_field(g, SyntheticKind::Inclusions, 1e2, 7);
  const CoefficientField same =
      synthetic_field(g, SyntheticKind::Inclusions, 1e2, 7);
  CHECK(again.value == same.value);
  CHECK_THROWS_AS(synthetic_field(g, SyntheticKind::Mixed, 0.5, 1),
                  std::invalid_argument);
}

TEST_CASE("synthetic contrast guaranteed on coarse grids") {
  // grids too coarse to hit a feature center still advertise the contrast
  const FineGrid g = make_fine(4);
  const CoefficientField f =
      synthetic_field(g, SyntheticKind::Inclusions, 1e4, 11);
  CHECK(f.contrast() == 1e4);
}

TEST_CASE("presets") {
  const FineGrid g = make_fine(64);
  for (const auto& name : preset_names()) {
    const CoefficientField f = preset_field(g, name, 1e4);
    CHECK(f.min_value == 1.0);
    CHECK(f.max_value == 1e4);
  }
  CHECK_THROWS_AS(preset_field(g, "nope"), std::invalid_argument);
}

TEST_CASE("raster ingestion replicates blocks") {
  const std::string path = write_temp("2 2\n1 10\n100 1000\n");
  const FineGrid g = make_fine(4);
  const CoefficientField f = load_raster(g, path);
  // row 0 is the bottom of the domain
  const std::array<double, 4> expected = {1.0, 10.0, 100.0, 1000.0};
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      CHECK(f.cell(i, j) == expected[(j / 2) * 2 + i / 2]);
  std::remove(path.c_str());
}

TEST_CASE("raster of equal values matches a constant field") {
  const std::string path = write_temp("2 2\n3 3\n3 3\n");
  const FineGrid g = make_fine(8);
  CHECK(load_raster(g, path).value == constant_field(g, 3.0).value);
  std::remove(path.c_str());
}

TEST_CASE("raster errors") {
  const FineGrid g = make_fine(4);
  const std::string zero = write_temp("2 2\n1 0\n1 1\n");
  CHECK_THROWS_AS(load_raster(g, zero), std::invalid_argument);
  std::remove(zero.c_str());
  const std::string header = write_temp("-2 2\n1 1\n");
  CHECK_THROWS_AS(load_raster(g, header), std::invalid_argument);
  std::remove(header.c_str());
  const std::string lacking = write_temp("2 2\n1 2 3\n");
  CHECK_THROWS_AS(load_raster(g, lacking), std::invalid_argument);
  std::remove(lacking.c_str());
  const std::string extra = write_temp("2 2\n1 2 3 4 5\n");
  CHECK_THROWS_AS(load_raster(g, extra), std::invalid_argument);
  std::remove(extra.c_str());
  CHECK_THROWS_AS(load_raster(g, "no_such_file.txt"), std::invalid_argument);
}

TEST_CASE("inverse convention on vanishing weighted coefficient") {
  const WeightedCoefficient w = make_weighted(2, 1, {0.0, 4.0});
  CHECK(w.inverse[0] == 1.0);
  CHECK(w.inverse[1] == 0.25);
}

// oracle: rebuild H^2 sum_i |grad chi_i|^2 per triangle straight from the chi
// values and compare against the weighted coefficient
TEST_CASE("weighted coefficient matches hand assembly") {
  const GridPair grids = build_grids(2, 2);
  const CoefficientField field = constant_field(grids.fine, 1.0);
  const PouBasis pou = build_pou(grids, field);
  const WeightedCoefficient w = weighted_coefficient(grids, field, pou);

  const FineGrid& fine = grids.fine;
  const double H2 = grids.coarse.H * grids.coarse.H;
  for (int j = 0; j < fine.ny; ++j) {
    for (int i = 0; i < fine.nx; ++i) {
      double cell = 0.0;
      for (int t = 0; t < 2; ++t) {
        const auto tri = fine.triangle_nodes(i, j, t);
        double sum = 0.0;
        for (const PouFunction& chi : pou.chi) {
          double v[3];
          for (int a = 0; a < 3; ++a) v[a] = chi.local_value(fine, tri[a]);
          // independent gradient evaluation from nodal coordinates
          std::array<std::array<double, 2>, 3> xy;
          for (int a = 0; a < 3; ++a) xy[a] = fine.node_xy(tri[a]);
          const double det =
              (xy[1][0] - xy[0][0]) * (xy[2][1] - xy[0][1]) -
              (xy[2][0] - xy[0][0]) * (xy[1][1] - xy[0][1]);
          const double gx = ((xy[1][1] - xy[2][1]) * v[0] +
                             (xy[2][1] - xy[0][1]) * v[1] +
                             (xy[0][1] - xy[1][1]) * v[2]) /
                            det;
          const double gy = ((xy[2][0] - xy[1][0]) * v[0] +
                             (xy[0][0] - xy[2][0]) * v[1] +
                             (xy[1][0] - xy[0][0]) * v[2]) /
                            det;
          sum += gx * gx + gy * gy;
        }
        cell += 0.5 * H2 * field.cell(i, j) * sum;
      }
      CHECK(w.cell(i, j) == doctest::Approx(cell).epsilon(1e-12));
    }
  }
}

TEST_CASE("weighted coefficient scales linearly in kappa") {
  const GridPair grids = build_grids(2, 4);
  CoefficientField field = synthetic_field(grids.fine, SyntheticKind::Mixed,
                                           1e2, 5);
  CoefficientField scaled = field;
  for (double& v : scaled.value) v *= 3.0;
  scaled.min_value *= 3.0;
  scaled.max_value *= 3.0;

  // chi is invariant under scaling kappa, so kappa~ scales exactly
  const PouBasis pou1 = build_pou(grids, field);
  const PouBasis pou2 = build_pou(grids, scaled);
  const WeightedCoefficient w1 = weighted_coefficient(grids, field, pou1);
  const WeightedCoefficient w2 = weighted_coefficient(grids, scaled, pou2);
  for (std::size_t k = 0; k < w1.value.size(); ++k)
    CHECK(w2.value[k] == doctest::Approx(3.0 * w1.value[k]).epsilon(1e-11));
}

TEST_CASE("cached bounds equal a brute-force scan") {
  const FineGrid g = make_fine(16);
  const CoefficientField f = synthetic_field(g, SyntheticKind::Mixed, 1e3, 9);
  double mn = f.value[0], mx = f.value[0];
  for (double v : f.value) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(f.min_value == mn);
  CHECK(f.max_value == mx);
  CHECK(f.contrast() == mx / mn);
}

TEST_CASE("mismatched grid rejected") {
  const GridPair grids = build_grids(2, 2);
  const CoefficientField other = constant_field(make_fine(8), 1.0);
  const PouBasis pou = build_pou(grids, constant_field(grids.fine, 1.0));
  CHECK_THROWS_AS(weighted_coefficient(grids, other, pou),
                  std::invalid_argument);
}

TEST_SUITE_END();
