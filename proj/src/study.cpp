#include "edgems/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "edgems/common.hpp"
#include "edgems/local_problems.hpp"
#include "edgems/metrics.hpp"
#include "edgems/parallel.hpp"

namespace edgems {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(':', pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    EDGEMS_REQUIRE(used == s.size(), what + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument(what + ": cannot parse number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  const int i = static_cast<int>(std::lround(v));
  EDGEMS_REQUIRE(std::abs(v - i) < 1e-9, what + ": expected an integer, got '" + s + "'");
  return i;
}

// H values may be fractions like 1/16 or decimals like 0.0625.
int parse_coarse_count(const std::string& s) {
  const auto slash = s.find('/');
  double H = 0.0;
  if (slash != std::string::npos) {
    const double num = parse_number(s.substr(0, slash), "H");
    const double den = parse_number(s.substr(slash + 1), "H");
    EDGEMS_REQUIRE(num > 0 && den > 0, "H: fraction must be positive");
    H = num / den;
  } else {
    H = parse_number(s, "H");
  }
  EDGEMS_REQUIRE(H > 0 && H < 1, "H: must lie in (0,1), got '" + s + "'");
  const double inv = 1.0 / H;
  const int n = static_cast<int>(std::lround(inv));
  EDGEMS_REQUIRE(std::abs(inv - n) < 1e-9 * inv,
                 "H = " + s + " does not give an integer coarse cell count");
  return n;
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

CoefficientField make_field(const FineGrid& grid, const std::string& spec) {
  const auto parts = split_colon(trim(spec));
  const std::string& kind = parts[0];
  if (kind == "constant") {
    EDGEMS_REQUIRE(parts.size() <= 2, "field: constant takes one value");
    const double v = parts.size() == 2 ? parse_number(parts[1], "field") : 1.0;
    return constant_field(grid, v);
  }
  if (kind == "preset") {
    EDGEMS_REQUIRE(parts.size() >= 2 && parts.size() <= 3,
                   "field: preset:<name>[:<contrast>]");
    const double contrast =
        parts.size() == 3 ? parse_number(parts[2], "field contrast") : 1e4;
    return preset_field(grid, parts[1], contrast);
  }
  if (kind == "synthetic") {
    EDGEMS_REQUIRE(parts.size() == 4,
                   "field: synthetic:<kind>:<contrast>:<seed>");
    SyntheticKind sk;
    if (parts[1] == "channels")
      sk = SyntheticKind::Channels;
    else if (parts[1] == "inclusions")
      sk = SyntheticKind::Inclusions;
    else if (parts[1] == "mixed")
      sk = SyntheticKind::Mixed;
    else
      throw std::invalid_argument("field: unknown synthetic kind '" + parts[1] +
                                  "' (channels|inclusions|mixed)");
    const double contrast = parse_number(parts[2], "field contrast");
    const auto seed =
        static_cast<std::uint64_t>(parse_number(parts[3], "field seed"));
    return synthetic_field(grid, sk, contrast, seed);
  }
  if (kind == "raster") {
    EDGEMS_REQUIRE(parts.size() >= 2, "field: raster:<path>");
    // paths may contain ':'; keep everything after the prefix
    return load_raster(grid, trim(spec).substr(7));
  }
  throw std::invalid_argument("field: unknown descriptor '" + spec +
                              "' (constant|preset|synthetic|raster)");
}

StudyConfig parse_config_text(const std::string& text) {
  StudyConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    EDGEMS_REQUIRE(eq != std::string::npos,
                   "config line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    EDGEMS_REQUIRE(!value.empty(), "config: empty value for '" + key + "'");

    if (key == "field") {
      cfg.field = value;
    } else if (key == "force") {
      cfg.force = value;
    } else if (key == "fine") {
      cfg.fine = parse_int(value, "fine");
    } else if (key == "H") {
      cfg.coarse.clear();
      for (const auto& tok : split_ws(value))
        cfg.coarse.push_back(parse_coarse_count(tok));
    } else if (key == "coarse") {
      cfg.coarse.clear();
      for (const auto& tok : split_ws(value))
        cfg.coarse.push_back(parse_int(tok, "coarse"));
    } else if (key == "methods") {
      cfg.methods = split_ws(value);
      for (const auto& m : cfg.methods)
        EDGEMS_REQUIRE(m == "msfem" || m == "esmsfem" || m == "wemsfem",
                       "config: unknown method '" + m + "'");
    } else if (key == "levels") {
      cfg.levels.clear();
      for (const auto& tok : split_ws(value))
        cfg.levels.push_back(parse_int(tok, "levels"));
    } else if (key == "wavelets") {
      cfg.wavelets.clear();
      for (const auto& tok : split_ws(value)) {
        if (tok == "haar")
          cfg.wavelets.push_back(WaveletKind::Haar);
        else if (tok == "hierarchical")
          cfg.wavelets.push_back(WaveletKind::Hierarchical);
        else
          throw std::invalid_argument("config: unknown wavelet kind '" + tok +
                                      "' (haar|hierarchical)");
      }
    } else if (key == "nb") {
      cfg.nb.clear();
      for (const auto& tok : split_ws(value))
        cfg.nb.push_back(parse_int(tok, "nb"));
    } else if (key == "oversampling") {
      cfg.oversampling.clear();
      for (const auto& tok : split_ws(value)) {
        if (tok == "none")
          cfg.oversampling.push_back(Oversampling::None);
        else if (tok == "half")
          cfg.oversampling.push_back(Oversampling::Half);
        else if (tok == "full")
          cfg.oversampling.push_back(Oversampling::Full);
        else
          throw std::invalid_argument("config: unknown oversampling '" + tok +
                                      "' (none|half|full)");
      }
    } else if (key == "tol") {
      cfg.tol = parse_number(value, "tol");
    } else if (key == "workers") {
      cfg.workers = parse_int(value, "workers");
    } else if (key == "timings") {
      if (value == "true" || value == "1")
        cfg.timings = true;
      else if (value == "false" || value == "0")
        cfg.timings = false;
      else
        throw std::invalid_argument("config: timings must be true or false");
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  EDGEMS_REQUIRE(in.good(), "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(const StudyConfig& cfg) {
  EDGEMS_REQUIRE(cfg.fine >= 4, "config: fine resolution must be >= 4");
  EDGEMS_REQUIRE(!cfg.coarse.empty(), "config: no H values");
  EDGEMS_REQUIRE(!cfg.methods.empty(), "config: no methods");
  EDGEMS_REQUIRE(cfg.tol > 0, "config: tol must be positive");
  int max_level = 0;
  for (int l : cfg.levels) {
    EDGEMS_REQUIRE(l >= 0, "config: wavelet level must be >= 0");
    max_level = std::max(max_level, l);
  }
  for (int nb : cfg.nb) EDGEMS_REQUIRE(nb >= 1, "config: nb must be >= 1");
  const bool wants_wemsfem =
      std::find(cfg.methods.begin(), cfg.methods.end(), "wemsfem") !=
      cfg.methods.end();
  for (int c : cfg.coarse) {
    EDGEMS_REQUIRE(c >= 2, "config: H must be at most 1/2");
    EDGEMS_REQUIRE(cfg.fine % c == 0,
                   "config: H = 1/" + std::to_string(c) +
                       " does not divide the fine resolution " +
                       std::to_string(cfg.fine));
    const int n = cfg.fine / c;
    EDGEMS_REQUIRE(n >= 2 && is_power_of_two(n),
                   "config: refinement factor " + std::to_string(n) +
                       " for H = 1/" + std::to_string(c) +
                       " must be a power of two >= 2");
    if (wants_wemsfem)
      EDGEMS_REQUIRE((1 << max_level) <= n,
                     "config: wavelet level " + std::to_string(max_level) +
                         " needs at least 2^level fine intervals per "
                         "truncated edge, but H = 1/" +
                         std::to_string(c) + " gives only " +
                         std::to_string(n));
  }
}

std::uint64_t config_hash(const StudyConfig& cfg) {
  std::ostringstream s;
  s << "field=" << cfg.field << ";force=" << cfg.force << ";fine=" << cfg.fine
    << ";coarse=";
  for (int c : cfg.coarse) s << c << ',';
  s << ";methods=";
  for (const auto& m : cfg.methods) s << m << ',';
  s << ";levels=";
  for (int l : cfg.levels) s << l << ',';
  s << ";wavelets=";
  for (auto w : cfg.wavelets) s << (w == WaveletKind::Haar ? "haar," : "hier,");
  s << ";nb=";
  for (int v : cfg.nb) s << v << ',';
  s << ";oversampling=";
  for (auto o : cfg.oversampling) s << static_cast<int>(o) << ',';
  char tol[32];
  std::snprintf(tol, sizeof(tol), "%.17g", cfg.tol);
  s << ";tol=" << tol;

  // FNV-1a, 64 bit
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct MethodPoint {
  std::string method;
  int param = -1;
  // exactly one of these describes the space to build
  int level = -1;
  WaveletKind wavelet = WaveletKind::Haar;
  int nb = 0;
  Oversampling oversampling = Oversampling::None;
  enum class Kind { Msfem, Esmsfem, Wemsfem } kind = Kind::Msfem;
};

std::vector<MethodPoint> enumerate_points(const StudyConfig& cfg) {
  std::vector<MethodPoint> points;
  for (const std::string& m : cfg.methods) {
    if (m == "msfem") {
      for (Oversampling os : cfg.oversampling) {
        MethodPoint p;
        p.kind = MethodPoint::Kind::Msfem;
        p.oversampling = os;
        p.method = os == Oversampling::None   ? "msfem-none"
                   : os == Oversampling::Half ? "msfem-half"
                                              : "msfem-full";
        points.push_back(p);
      }
    } else if (m == "esmsfem") {
      for (int nb : cfg.nb) {
        MethodPoint p;
        p.kind = MethodPoint::Kind::Esmsfem;
        p.nb = nb;
        p.param = nb;
        p.method = "esmsfem";
        points.push_back(p);
      }
    } else {
      for (WaveletKind w : cfg.wavelets) {
        for (int l : cfg.levels) {
          MethodPoint p;
          p.kind = MethodPoint::Kind::Wemsfem;
          p.wavelet = w;
          p.level = l;
          p.param = l;
          p.method = w == WaveletKind::Haar ? "wemsfem-haar"
                                            : "wemsfem-hierarchical";
          points.push_back(p);
        }
      }
    }
  }
  return points;
}

}  // namespace

StudyReport run_study(const StudyConfig& cfg) {
  validate_config(cfg);
  StudyReport report;
  report.hash = config_hash(cfg);

  FineGrid fine;
  fine.nx = cfg.fine;
  fine.ny = cfg.fine;
  fine.h = 1.0 / cfg.fine;
  const CoefficientField field = make_field(fine, cfg.field);

  const auto force_parts = split_colon(cfg.force);
  EDGEMS_REQUIRE(force_parts[0] == "constant",
                 "config: only constant force descriptors are supported");
  const double fvalue =
      force_parts.size() > 1 ? parse_number(force_parts[1], "force") : 1.0;
  const Vector f_nodal = Vector::Constant(fine.node_count(), fvalue);

  using clock = std::chrono::steady_clock;
  const auto elapsed = [](clock::time_point t0) {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  // one fine reference per study; every method row reuses it
  const Vector u_h = fine_reference(
      fine, field, [&](double, double) { return fvalue; }, cfg.tol);

  const auto points = enumerate_points(cfg);
  for (int coarse_nx : cfg.coarse) {
    const GridPair grids = build_grids(coarse_nx, cfg.fine / coarse_nx);
    const PouBasis pou = build_pou(grids, field, cfg.workers);
    WeightedCoefficient weighted;
    const bool needs_weighted =
        std::find(cfg.methods.begin(), cfg.methods.end(), "esmsfem") !=
            cfg.methods.end() ||
        std::find(cfg.methods.begin(), cfg.methods.end(), "wemsfem") !=
            cfg.methods.end();
    if (needs_weighted) weighted = weighted_coefficient(grids, field, pou);

    for (const MethodPoint& p : points) {
      StudyRow row;
      row.method = p.method;
      row.H = grids.coarse.H;
      row.param = p.param;
      const auto t0 = clock::now();
      try {
        MultiscaleSpace space;
        switch (p.kind) {
          case MethodPoint::Kind::Msfem:
            space = build_msfem_space(grids, field, p.oversampling, pou,
                                      cfg.workers);
            break;
          case MethodPoint::Kind::Esmsfem:
            space =
                build_esmsfem_space(grids, field, p.nb, pou, weighted,
                                    cfg.workers);
            row.lambda = space.lambda_min;
            break;
          case MethodPoint::Kind::Wemsfem:
            space = build_wemsfem_space(grids, field, {p.wavelet, p.level},
                                        pou, weighted, cfg.workers);
            break;
        }
        const CoarseSolution sol = coarse_solve(grids, field, space, f_nodal);
        row.dim = space.dimension();
        if (space.conforming()) {
          row.e_l2 = weighted_l2_error(fine, field, sol.u, u_h);
          row.e_h1 = energy_error(fine, field, sol.u, u_h);
        } else {
          row.e_l2 = weighted_l2_error_broken(grids, field, sol.u_cells, u_h);
          row.e_h1 = energy_error_broken(grids, field, sol.u_cells, u_h);
        }
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        report.any_failed = true;
      }
      if (cfg.timings) row.seconds = elapsed(t0);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void emit_csv(const StudyReport& report, std::ostream& out) {
  out << "method,H,level_or_Nb,Lambda,e_L2,e_H1,dim,seconds\n";
  for (const StudyRow& r : report.rows) {
    out << r.method << ',' << format_double(r.H) << ',';
    if (r.param >= 0) out << r.param;
    out << ',';
    if (!std::isnan(r.lambda)) out << format_double(r.lambda);
    out << ',';
    if (!r.failed) out << format_double(r.e_l2);
    out << ',';
    if (!r.failed) out << format_double(r.e_h1);
    out << ',' << r.dim << ',' << format_double(r.seconds) << '\n';
  }
}

void emit_json(const StudyReport& report, const StudyConfig& cfg,
               std::ostream& out) {
  nlohmann::json j;
  j["version"] = report.version;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(report.hash));
  j["config_hash"] = hash;
  j["any_failed"] = report.any_failed;
  nlohmann::json jc;
  jc["field"] = cfg.field;
  jc["force"] = cfg.force;
  jc["fine"] = cfg.fine;
  jc["coarse"] = cfg.coarse;
  jc["methods"] = cfg.methods;
  jc["levels"] = cfg.levels;
  jc["nb"] = cfg.nb;
  jc["tol"] = cfg.tol;
  j["config"] = jc;
  j["rows"] = nlohmann::json::array();
  for (const StudyRow& r : report.rows) {
    nlohmann::json jr;
    jr["method"] = r.method;
    jr["H"] = r.H;
    if (r.param >= 0) jr["level_or_Nb"] = r.param;
    if (!std::isnan(r.lambda)) jr["Lambda"] = r.lambda;
    if (!r.failed) {
      jr["e_L2"] = r.e_l2;
      jr["e_H1"] = r.e_h1;
    }
    jr["dim"] = r.dim;
    jr["seconds"] = r.seconds;
    jr["failed"] = r.failed;
    if (r.failed) jr["error"] = r.error;
    j["rows"].push_back(jr);
  }
  out << j.dump(2) << '\n';
}

}  // namespace edgems
