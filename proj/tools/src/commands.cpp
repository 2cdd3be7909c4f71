#include "dihs_cli/commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "dihs/raw_io.hpp"
#include "dihs/tables.hpp"
#include "dihs_cli/pipeline.hpp"
#include "dihs_cli/report.hpp"

namespace dihs::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Maps exceptions to exit codes, printing one line on stderr.
template <class F>
int guarded(const char* cmd, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "dihs " << cmd << ": config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "dihs " << cmd << ": table error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ContractError& e) {
    std::cerr << "dihs " << cmd << ": invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const ModelError& e) {
    std::cerr << "dihs " << cmd << ": model error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "dihs " << cmd << ": I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "dihs " << cmd << ": I/O error: " << e.what() << "\n";
    return kIoError;
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::string iterations_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream s;
  s << "outer_iter,cost,grad_norm,rmse,wall_time_s,row_accesses,cg_iters,sum_block_scores,lambda_ridge\n";
  for (const auto& r : records)
    s << r.outer_iter << ',' << fmt(r.cost) << ',' << fmt(r.grad_norm) << ',' << fmt(r.rmse) << ','
      << fmt(r.wall_time_s) << ',' << r.row_accesses << ',' << r.cg_iters << ',' << fmt(r.sum_block_scores) << ','
      << fmt(r.lambda_ridge) << '\n';
  return s.str();
}

std::pair<double, double> window_of(std::span<const double> img) {
  double lo = 0.0, hi = 0.0;
  for (double v : img) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi};
}

}  // namespace

int cmd_simulate(const fs::path& config, const std::vector<std::string>& overrides) {
  return guarded("simulate", [&] {
    const RunConfig cfg = load_config(config, overrides);
    const Tables tables = load_tables(cfg);
    const Simulation sim = simulate(cfg, tables);
    const RadonGeometry geom = recon_geometry(cfg);

    double cmin = sim.counts.empty() ? 0.0 : sim.counts[0], cmax = cmin, csum = 0.0;
    for (double c : sim.counts) {
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      csum += c;
    }
    Json meta;
    meta["config"] = cfg.resolved;
    meta["dimensions"] = {{"image_side", cfg.image_side},
                          {"n_materials", cfg.n_materials()},
                          {"n_views", geom.n_views()},
                          {"n_detectors", geom.n_detectors},
                          {"n_bins", tables.binned.n_bins()},
                          {"n_energies", tables.spectrum.n_energies()},
                          {"layout_counts", "bin, view, detector (row-major)"},
                          {"layout_images", "material, row, column (row-major)"},
                          {"dtype", "float32 little-endian"}};
    meta["effective_mixing"] = Json::array();
    for (Eigen::Index b = 0; b < tables.mixing.rows(); ++b) {
      Json row = Json::array();
      for (Eigen::Index m = 0; m < tables.mixing.cols(); ++m) row.push_back(tables.mixing(b, m));
      meta["effective_mixing"].push_back(row);
    }
    meta["bin_energies_keV"] = tables.binned.energies;
    meta["counts_summary"] = {{"min", cmin}, {"max", cmax}, {"mean", csum / static_cast<double>(sim.counts.size())}};
    meta["artifacts"] = {{"counts", (cfg.output_dir / "counts.bin").string()},
                         {"truth", (cfg.output_dir / "truth.bin").string()}};

    make_dir(cfg.output_dir);
    write_raw_f32(cfg.output_dir / "counts.bin", sim.counts);
    write_raw_f32(cfg.output_dir / "truth.bin", sim.truth);
    write_text(cfg.output_dir / "meta.json", meta.dump(2) + "\n");
    std::cout << "simulate: " << sim.counts.size() << " counts (min " << cmin << ", max " << cmax << ") -> "
              << cfg.output_dir.string() << "\n";
    return int{kOk};
  });
}

int cmd_reconstruct(const fs::path& config, const std::vector<std::string>& overrides,
                    const std::optional<fs::path>& counts_path) {
  return guarded("reconstruct", [&] {
    const RunConfig cfg = load_config(config, overrides);
    const Tables tables = load_tables(cfg);
    const fs::path cpath = counts_path ? *counts_path : cfg.counts_file.value_or(cfg.output_dir / "counts.bin");
    const RadonGeometry geom = recon_geometry(cfg);
    const std::size_t n_counts = geom.n_rows() * tables.binned.n_bins();
    const Vector counts = read_raw_f32(cpath, n_counts);
    Vector truth;
    const fs::path tpath = cfg.truth_file.value_or(cpath.parent_path() / "truth.bin");
    if (fs::exists(tpath)) truth = read_raw_f32(tpath, cfg.image_side * cfg.image_side * cfg.n_materials());

    const Setup setup = build_setup(cfg, tables, counts);
    const SolveResult res = denoising_ihs(setup.problem, cfg.solver, Vector(setup.n, 0.0), truth);

    // summary
    const std::size_t npix = cfg.image_side * cfg.image_side;
    Json summary;
    summary["status"] = to_string(res.status);
    summary["exit_code"] = res.status == Termination::Stalled ? int{kSolverStall} : int{kOk};
    summary["outer_iterations"] = res.state.outer_iter;
    summary["final_cost"] = res.state.cost;
    summary["initial_cost"] = res.records.front().cost;
    summary["row_accesses"] = res.state.work.row_accesses;
    summary["operator_calls"] = res.state.work.operator_calls;
    summary["surrogate_row_accesses"] = res.state.work.surrogate_row_accesses;
    summary["full_row_count"] = setup.a->rows();
    summary["wall_time_s"] = res.records.back().wall_time_s;
    summary["mode"] = cfg.solver.full_hessian_mode ? "full" : "sketched";
    summary["counts_file"] = fs::absolute(cpath).string();
    if (!truth.empty()) {
      const RmseReport r = rmse(res.state.x, truth, cfg.n_materials());
      summary["rmse"] = {{"overall", r.overall}};
      for (std::size_t m = 0; m < cfg.n_materials(); ++m) summary["rmse"][cfg.materials[m]] = r.per_material[m];
    } else {
      summary["rmse"] = nullptr;
    }
    summary["preview_windows"] = Json::object();

    make_dir(cfg.output_dir);
    write_raw_f32(cfg.output_dir / "recon.bin", res.state.x);
    write_text(cfg.output_dir / "iterations.csv", iterations_csv(res.records));
    {
      std::ostringstream h;
      h << "view,angle_deg,touches\n";
      for (std::size_t v = 0; v < res.view_histogram.size(); ++v)
        h << v << ',' << fmt(geom.view_angles[v] * 180.0 / std::numbers::pi) << ',' << res.view_histogram[v] << '\n';
      write_text(cfg.output_dir / "view_histogram.csv", h.str());
    }
    for (std::size_t m = 0; m < cfg.n_materials(); ++m) {
      const std::span<const double> ref =
          truth.empty() ? std::span<const double>(res.state.x).subspan(m * npix, npix)
                        : std::span<const double>(truth).subspan(m * npix, npix);
      const auto [lo, hi] = window_of(ref);
      summary["preview_windows"][cfg.materials[m]] = {lo, hi};
      write_pgm(cfg.output_dir / ("recon_" + cfg.materials[m] + ".pgm"),
                std::span<const double>(res.state.x).subspan(m * npix, npix), cfg.image_side, lo, hi);
      if (!truth.empty())
        write_pgm(cfg.output_dir / ("truth_" + cfg.materials[m] + ".pgm"), ref, cfg.image_side, lo, hi);
    }
    summary["config"] = cfg.resolved;
    write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");

    std::cout << "reconstruct: " << to_string(res.status) << " after " << res.state.outer_iter
              << " iterations, cost " << res.state.cost << ", row accesses " << res.state.work.row_accesses;
    if (!truth.empty()) std::cout << ", rmse " << summary["rmse"]["overall"].get<double>();
    std::cout << " -> " << cfg.output_dir.string() << "\n";
    return res.status == Termination::Stalled ? int{kSolverStall} : int{kOk};
  });
}

int cmd_compare(const std::vector<fs::path>& runs, const fs::path& out_dir) {
  return guarded("compare", [&] {
    if (runs.size() < 2) throw ConfigError("compare needs at least two run directories");
    std::vector<RunSummary> loaded;
    for (const fs::path& dir : runs) loaded.push_back(load_run(dir));
    for (std::size_t k = 1; k < loaded.size(); ++k)
      if (loaded[k].phantom != loaded[0].phantom ||
          (!loaded[k].truth.empty() && !loaded[0].truth.empty() && loaded[k].truth != loaded[0].truth))
        throw ConfigError("runs " + loaded[0].name + " and " + loaded[k].name +
                          " use different phantoms; refusing to compare");
    make_dir(out_dir);
    write_text(out_dir / "comparison.csv", comparison_csv(loaded));
    write_text(out_dir / "cost_vs_work.svg", cost_vs_work_svg(loaded));
    write_text(out_dir / "rmse_table.md", rmse_table_md(loaded));
    std::cout << "compare: " << loaded.size() << " runs -> " << out_dir.string() << "\n";
    return int{kOk};
  });
}

int cmd_scores(const fs::path& config, const std::vector<std::string>& overrides, const std::optional<double>& lambda,
               bool exact, const std::optional<fs::path>& out) {
  return guarded("scores", [&] {
    RunConfig cfg = load_config(config, overrides);
    const Tables tables = load_tables(cfg);
    Vector counts;
    const fs::path cpath = cfg.counts_file.value_or(cfg.output_dir / "counts.bin");
    const RadonGeometry geom = recon_geometry(cfg);
    if (fs::exists(cpath))
      counts = read_raw_f32(cpath, geom.n_rows() * tables.binned.n_bins());
    else
      counts = simulate(cfg, tables).counts;

    cfg.scores = "fft";
    const Setup fft = build_setup(cfg, tables, counts);
    const double lam = lambda.value_or(fft.problem.reg->ridge_scalar(Vector(fft.n, 0.0), cfg.solver.seed));
    const ScoreEstimate est = fft.problem.scores(lam, cfg.solver.seed);
    Vector exact_scores;
    if (exact) {
      cfg.scores = "exact";
      exact_scores = build_setup(cfg, tables, counts).problem.scores(lam, 0).scores.per_block;
    }
    const double total = est.scores.total();
    double exact_total = 0.0;
    for (double v : exact_scores) exact_total += v;

    std::ostringstream s;
    s << "view,angle_deg,score,probability" << (exact ? ",exact_score,exact_probability" : "") << '\n';
    for (std::size_t v = 0; v < geom.n_views(); ++v) {
      s << v << ',' << fmt(geom.view_angles[v] * 180.0 / std::numbers::pi) << ',' << fmt(est.scores.per_block[v])
        << ',' << fmt(est.scores.per_block[v] / total);
      if (exact) s << ',' << fmt(exact_scores[v]) << ',' << fmt(exact_scores[v] / exact_total);
      s << '\n';
    }
    const fs::path target = out.value_or(cfg.output_dir / "scores.csv");
    make_dir(target.parent_path());
    write_text(target, s.str());
    std::cout << "scores: lambda " << lam << ", n_eff " << est.n_eff << " -> " << target.string() << "\n";
    return int{kOk};
  });
}

}  // namespace dihs::cli
