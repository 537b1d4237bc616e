#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgems/grid.hpp"

namespace edgems {

/// Permeability kappa, constant per fine cell (row-major, row 0 at bottom).
struct CoefficientField {
  int nx = 0, ny = 0;
  std::vector<double> value;
  double min_value = 0.0;
  double max_value = 0.0;

  double contrast() const { return max_value / min_value; }
  double cell(int i, int j) const { return value[j * nx + i]; }
};

CoefficientField constant_field(const FineGrid& grid, double value);

enum class SyntheticKind { Channels, Inclusions, Mixed };

/// Deterministic synthetic high-contrast field: background 1, axis-aligned
/// rectangular features of value `contrast`. The geometry is drawn in
/// continuous coordinates from the seed, then rasterized by cell-center
/// membership, so a given seed produces the same shapes at every resolution.
CoefficientField synthetic_field(const FineGrid& grid, SyntheticKind kind,
                                 double contrast, std::uint64_t seed);

/// Named fixed-geometry fields standing in for the published test models.
CoefficientField preset_field(const FineGrid& grid, const std::string& name,
                              double contrast = 1e4);
std::vector<std::string> preset_names();

/// Read a raster file ("nx ny" header then nx*ny positive values, row-major,
/// row 0 at bottom) and resample it to the fine grid by nearest-cell lookup.
CoefficientField load_raster(const FineGrid& grid, const std::string& path);

/// Dump a field in the raster text format accepted by load_raster.
void write_raster(const CoefficientField& field, std::ostream& out);

/// Weighted coefficient kappa~ = H^2 kappa sum_i |grad chi_i|^2 per fine cell
/// (triangle values averaged), and its inverse with the convention
/// kappa~^{-1} = 1 wherever kappa~ = 0.
struct WeightedCoefficient {
  int nx = 0, ny = 0;
  std::vector<double> value;
  std::vector<double> inverse;

  double cell(int i, int j) const { return value[j * nx + i]; }
};

WeightedCoefficient make_weighted(int nx, int ny, std::vector<double> values);

struct PouBasis;  // local_problems.hpp

WeightedCoefficient weighted_coefficient(const GridPair& grids,
                                         const CoefficientField& field,
                                         const PouBasis& pou);

}  // namespace edgems
