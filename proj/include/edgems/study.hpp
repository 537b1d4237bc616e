#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "edgems/coefficient.hpp"
#include "edgems/ms_space.hpp"
#include "edgems/wavelets.hpp"

namespace edgems {

inline constexpr const char* kVersion = "0.1.0";

/// Build a field from a descriptor: constant:<v>, preset:<name>[:<contrast>],
/// synthetic:<kind>:<contrast>:<seed>, raster:<path>.
CoefficientField make_field(const FineGrid& grid, const std::string& spec);

struct StudyConfig {
  std::string field = "constant:1";
  std::string force = "constant:1";
  int fine = 64;                  ///< fine cells per axis
  std::vector<int> coarse = {8};  ///< coarse cells per axis (H = 1/value)
  std::vector<std::string> methods = {"wemsfem"};
  std::vector<int> levels = {0};
  std::vector<WaveletKind> wavelets = {WaveletKind::Haar};
  std::vector<int> nb = {2};
  std::vector<Oversampling> oversampling = {Oversampling::None};
  double tol = 1e-10;
  int workers = 0;  ///< 0 = available parallelism
  bool timings = false;  ///< real wall-clock in the seconds column; off by
                         ///< default so identical runs emit identical bytes
  std::string out = ".";
};

/// Parse the key = value configuration text ('#' comments allowed).
StudyConfig parse_config_text(const std::string& text);
StudyConfig load_config(const std::string& path);

/// Every H must divide the fine resolution with a power-of-two factor that
/// also supports the requested wavelet levels; throws std::invalid_argument.
void validate_config(const StudyConfig& config);

/// FNV-1a over the canonical serialization of the semantic fields (field,
/// force, fine, H list, methods, parameters, tol). Output-only settings do
/// not contribute.
std::uint64_t config_hash(const StudyConfig& config);

struct StudyRow {
  std::string method;
  double H = 0.0;
  int param = -1;  ///< level or N_b; -1 leaves the column empty
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double e_l2 = std::numeric_limits<double>::quiet_NaN();
  double e_h1 = std::numeric_limits<double>::quiet_NaN();
  int dim = 0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::uint64_t hash = 0;
  std::string version = kVersion;
  bool any_failed = false;
};

/// Run the sweep: one fine reference per study, then one row per
/// configuration point. Solver failures mark the row and the run continues.
StudyReport run_study(const StudyConfig& config);

void emit_csv(const StudyReport& report, std::ostream& out);
void emit_json(const StudyReport& report, const StudyConfig& config,
               std::ostream& out);

}  // namespace edgems
