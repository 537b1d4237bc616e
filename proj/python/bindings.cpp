#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "edgems/local_problems.hpp"
#include "edgems/metrics.hpp"
#include "edgems/ms_space.hpp"
#include "edgems/study.hpp"
#include "edgems/wavelets.hpp"

namespace py = pybind11;
using namespace edgems;

namespace {

py::array_t<double> nodal_to_array(const FineGrid& g, const Vector& u) {
  py::array_t<double> out({g.ny + 1, g.nx + 1});
  auto r = out.mutable_unchecked<2>();
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) r(j, i) = u[g.node_index(i, j)];
  return out;
}

py::array_t<double> cells_to_array(const CoefficientField& f) {
  py::array_t<double> out({f.ny, f.nx});
  auto r = out.mutable_unchecked<2>();
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) r(j, i) = f.cell(i, j);
  return out;
}

WaveletKind parse_wavelet(const std::string& name) {
  if (name == "haar") return WaveletKind::Haar;
  if (name == "hierarchical") return WaveletKind::Hierarchical;
  throw std::invalid_argument("wavelet must be 'haar' or 'hierarchical'");
}

Oversampling parse_oversampling(const std::string& name) {
  if (name == "none") return Oversampling::None;
  if (name == "half") return Oversampling::Half;
  if (name == "full") return Oversampling::Full;
  throw std::invalid_argument("oversampling must be 'none', 'half' or 'full'");
}

struct MethodResult {
  double e_l2 = 0.0;
  double e_h1 = 0.0;
  int dim = 0;
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  py::object u;
};

MethodResult solve_multiscale(const GridPair& grids,
                              const CoefficientField& field,
                              const std::string& method, int level,
                              const std::string& wavelet, int nb,
                              const std::string& oversampling, double force,
                              int workers) {
  const Vector f_nodal =
      Vector::Constant(grids.fine.node_count(), force);
  const PouBasis pou = build_pou(grids, field, workers);

  MultiscaleSpace space;
  if (method == "wemsfem") {
    const WeightedCoefficient w = weighted_coefficient(grids, field, pou);
    space = build_wemsfem_space(grids, field, {parse_wavelet(wavelet), level},
                                pou, w, workers);
  } else if (method == "esmsfem") {
    const WeightedCoefficient w = weighted_coefficient(grids, field, pou);
    space = build_esmsfem_space(grids, field, nb, pou, w, workers);
  } else if (method == "msfem") {
    space = build_msfem_space(grids, field, parse_oversampling(oversampling),
                              pou, workers);
  } else {
    throw std::invalid_argument("method must be wemsfem, esmsfem or msfem");
  }

  const CoarseSolution sol = coarse_solve(grids, field, space, f_nodal);
  const Vector u_h = fine_reference(
      grids.fine, field, [force](double, double) { return force; });

  MethodResult r;
  r.dim = space.dimension();
  r.lambda_min = space.lambda_min;
  if (space.conforming()) {
    r.e_l2 = weighted_l2_error(grids.fine, field, sol.u, u_h);
    r.e_h1 = energy_error(grids.fine, field, sol.u, u_h);
    r.u = nodal_to_array(grids.fine, sol.u);
  } else {
    r.e_l2 = weighted_l2_error_broken(grids, field, sol.u_cells, u_h);
    r.e_h1 = energy_error_broken(grids, field, sol.u_cells, u_h);
    r.u = py::none();
  }
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Edge multiscale finite element methods for elliptic problems with "
      "high-contrast coefficients";

  py::class_<GridPair>(m, "GridPair")
      .def_property_readonly(
          "fine_cells", [](const GridPair& g) { return g.fine.nx; })
      .def_property_readonly(
          "coarse_cells", [](const GridPair& g) { return g.coarse.nx; })
      .def_property_readonly("H",
                             [](const GridPair& g) { return g.coarse.H; })
      .def_property_readonly("h", [](const GridPair& g) { return g.fine.h; })
      .def_property_readonly(
          "refinement", [](const GridPair& g) { return g.coarse.refinement; })
      .def("__repr__", [](const GridPair& g) {
        std::ostringstream s;
        s << "GridPair(coarse=" << g.coarse.nx << ", fine=" << g.fine.nx
          << ")";
        return s.str();
      });

  py::class_<CoefficientField>(m, "CoefficientField")
      .def_property_readonly("min",
                             [](const CoefficientField& f) { return f.min_value; })
      .def_property_readonly("max",
                             [](const CoefficientField& f) { return f.max_value; })
      .def_property_readonly(
          "contrast", [](const CoefficientField& f) { return f.contrast(); })
      .def("values", &cells_to_array,
           "cell values as an (ny, nx) array, row 0 at the bottom");

  py::class_<MethodResult>(m, "MethodResult")
      .def_readonly("e_l2", &MethodResult::e_l2)
      .def_readonly("e_h1", &MethodResult::e_h1)
      .def_readonly("dim", &MethodResult::dim)
      .def_readonly("lambda_min", &MethodResult::lambda_min)
      .def_readonly("u", &MethodResult::u)
      .def("__repr__", [](const MethodResult& r) {
        std::ostringstream s;
        s << "MethodResult(e_l2=" << r.e_l2 << ", e_h1=" << r.e_h1
          << ", dim=" << r.dim << ")";
        return s.str();
      });

  m.def("make_grid", &build_grids, py::arg("coarse_cells"),
        py::arg("refinement"),
        "nested coarse/fine grids over the unit square");

  m.def(
      "constant_field",
      [](const GridPair& g, double v) { return constant_field(g.fine, v); },
      py::arg("grid"), py::arg("value") = 1.0);
  m.def(
      "synthetic_field",
      [](const GridPair& g, const std::string& kind, double contrast,
         std::uint64_t seed) {
        SyntheticKind k;
        if (kind == "channels")
          k = SyntheticKind::Channels;
        else if (kind == "inclusions")
          k = SyntheticKind::Inclusions;
        else if (kind == "mixed")
          k = SyntheticKind::Mixed;
        else
          throw std::invalid_argument(
              "kind must be channels, inclusions or mixed");
        return synthetic_field(g.fine, k, contrast, seed);
      },
      py::arg("grid"), py::arg("kind"), py::arg("contrast"), py::arg("seed"));
  m.def(
      "preset_field",
      [](const GridPair& g, const std::string& name, double contrast) {
        return preset_field(g.fine, name, contrast);
      },
      py::arg("grid"), py::arg("name"), py::arg("contrast") = 1e4);
  m.def(
      "load_raster",
      [](const GridPair& g, const std::string& path) {
        return load_raster(g.fine, path);
      },
      py::arg("grid"), py::arg("path"));
  m.def("preset_names", &preset_names);

  m.def(
      "fine_solve",
      [](const GridPair& g, const CoefficientField& field, double force,
         double tol) {
        const Vector u = fine_reference(
            g.fine, field, [force](double, double) { return force; }, tol);
        return nodal_to_array(g.fine, u);
      },
      py::arg("grid"), py::arg("field"), py::arg("force") = 1.0,
      py::arg("tol") = 1e-10,
      "fine-scale reference solution as an (ny+1, nx+1) nodal array");

  m.def("solve_multiscale", &solve_multiscale, py::arg("grid"),
        py::arg("field"), py::arg("method") = "wemsfem", py::arg("level") = 0,
        py::arg("wavelet") = "haar", py::arg("nb") = 2,
        py::arg("oversampling") = "none", py::arg("force") = 1.0,
        py::arg("workers") = 1,
        "build the requested multiscale space, solve the coarse problem and "
        "report errors against the fine reference");

  m.def("haar_function", &haar_function, py::arg("level"), py::arg("j"),
        py::arg("x"));
  m.def("hierarchical_function", &hierarchical_function, py::arg("level"),
        py::arg("j"), py::arg("x"));
  m.def(
      "haar_project",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> v,
         int level) {
        Vector samples(v.size());
        auto r = v.unchecked<1>();
        for (py::ssize_t k = 0; k < v.size(); ++k)
          samples[k] = r(k);
        const Vector c = haar_project_coefficients(samples, level);
        return py::array_t<double>(c.size(), c.data());
      },
      py::arg("samples"), py::arg("level"),
      "L2 coefficients of the Haar projection of piecewise-constant samples");
  m.def(
      "haar_reconstruct",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> c,
         int level, int samples) {
        Vector coeffs(c.size());
        auto r = c.unchecked<1>();
        for (py::ssize_t k = 0; k < c.size(); ++k) coeffs[k] = r(k);
        const Vector out = haar_reconstruct(coeffs, level, samples);
        return py::array_t<double>(out.size(), out.data());
      },
      py::arg("coefficients"), py::arg("level"), py::arg("samples"));

  m.def(
      "run_study",
      [](const std::string& config_text) {
        const StudyConfig cfg = parse_config_text(config_text);
        const StudyReport report = run_study(cfg);
        std::ostringstream csv;
        emit_csv(report, csv);
        py::list rows;
        for (const auto& r : report.rows) {
          py::dict d;
          d["method"] = r.method;
          d["H"] = r.H;
          if (r.param >= 0) d["level_or_Nb"] = r.param;
          if (!std::isnan(r.lambda)) d["Lambda"] = r.lambda;
          d["failed"] = r.failed;
          if (!r.failed) {
            d["e_L2"] = r.e_l2;
            d["e_H1"] = r.e_h1;
          }
          d["dim"] = r.dim;
          rows.append(d);
        }
        py::dict out;
        out["csv"] = csv.str();
        out["rows"] = rows;
        out["any_failed"] = report.any_failed;
        return out;
      },
      py::arg("config_text"),
      "run a study from configuration text; returns rows and the CSV");

  m.attr("__version__") = kVersion;
}
