#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "edgems/fem.hpp"
#include "edgems/metrics.hpp"
#include "edgems/study.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  int workers = -1;
  double tol = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool out_required) {
  cmd->add_option("--config", flags.config_path, "configuration file")
      ->required();
  auto* out = cmd->add_option("--out", flags.out, "output directory");
  if (out_required) out->required();
  cmd->add_option("--workers", flags.workers,
                  "worker threads (0 = available parallelism)");
  cmd->add_option("--tol", flags.tol, "solver tolerance override");
}

edgems::StudyConfig load(const CommonFlags& flags) {
  edgems::StudyConfig cfg = edgems::load_config(flags.config_path);
  if (!flags.out.empty()) cfg.out = flags.out;
  if (flags.workers >= 0) cfg.workers = flags.workers;
  if (flags.tol > 0) cfg.tol = flags.tol;
  return cfg;
}

int run_study_cmd(const CommonFlags& flags) {
  edgems::StudyConfig cfg = load(flags);
  edgems::StudyReport report = edgems::run_study(cfg);
  std::filesystem::create_directories(cfg.out);
  {
    std::ofstream csv(cfg.out + "/study.csv", std::ios::binary);
    edgems::emit_csv(report, csv);
  }
  {
    std::ofstream json(cfg.out + "/study.json", std::ios::binary);
    edgems::emit_json(report, cfg, json);
  }
  int failed = 0;
  for (const auto& r : report.rows)
    if (r.failed) {
      ++failed;
      std::cerr << "row failed: " << r.method << " H=" << r.H << ": "
                << r.error << "\n";
    }
  std::cout << "study: " << report.rows.size() << " rows (" << failed
            << " failed) -> " << cfg.out << "/study.csv\n";
  return failed == 0 ? 0 : 2;
}

int run_fine_solve(const CommonFlags& flags) {
  edgems::StudyConfig cfg = load(flags);
  edgems::validate_config(cfg);
  edgems::FineGrid fine;
  fine.nx = cfg.fine;
  fine.ny = cfg.fine;
  fine.h = 1.0 / cfg.fine;
  const auto field = edgems::make_field(fine, cfg.field);

  edgems::SolveInfo info;
  const auto t0 = std::chrono::steady_clock::now();
  const edgems::Vector u = edgems::fine_reference(
      fine, field, [](double, double) { return 1.0; }, cfg.tol, &info);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::filesystem::create_directories(cfg.out);
  {
    std::ofstream out(cfg.out + "/u_h.txt");
    out << fine.nx + 1 << ' ' << fine.ny + 1 << '\n';
    char buf[32];
    for (int j = 0; j <= fine.ny; ++j) {
      for (int i = 0; i <= fine.nx; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", u[fine.node_index(i, j)]);
        out << buf << (i == fine.nx ? '\n' : ' ');
      }
    }
  }
  nlohmann::json j;
  j["fine"] = cfg.fine;
  j["dofs"] = fine.node_count();
  j["field"] = cfg.field;
  j["contrast"] = field.contrast();
  j["direct"] = info.direct;
  j["iterations"] = info.iterations;
  j["residual"] = info.residual;
  j["energy"] = edgems::energy_product(fine, field, u, u);
  j["seconds"] = seconds;
  std::ofstream out(cfg.out + "/fine_solve.json");
  out << j.dump(2) << '\n';
  std::cout << "fine-solve: " << fine.node_count() << " dofs -> " << cfg.out
            << "/u_h.txt\n";
  return 0;
}

int run_field_preview(const CommonFlags& flags) {
  edgems::StudyConfig cfg = load(flags);
  edgems::FineGrid fine;
  fine.nx = cfg.fine;
  fine.ny = cfg.fine;
  fine.h = 1.0 / cfg.fine;
  const auto field = edgems::make_field(fine, cfg.field);
  if (flags.out.empty()) {
    edgems::write_raster(field, std::cout);
  } else {
    std::filesystem::create_directories(flags.out);
    std::ofstream out(flags.out + "/field.txt");
    edgems::write_raster(field, out);
    std::cout << "field-preview: " << fine.nx << "x" << fine.ny << " -> "
              << flags.out << "/field.txt\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "edge multiscale finite element toolkit for high-contrast "
      "elliptic problems"};
  app.require_subcommand(1);

  CommonFlags study_flags, fine_flags, preview_flags;
  auto* study = app.add_subcommand(
      "study", "run a convergence study and emit CSV/JSON tables");
  add_common(study, study_flags, false);
  auto* fine = app.add_subcommand(
      "fine-solve", "compute the fine-scale reference solution");
  add_common(fine, fine_flags, false);
  auto* preview = app.add_subcommand(
      "field-preview", "dump the coefficient field as a raster");
  add_common(preview, preview_flags, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (study->parsed()) return run_study_cmd(study_flags);
    if (fine->parsed()) return run_fine_solve(fine_flags);
    if (preview->parsed()) return run_field_preview(preview_flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
