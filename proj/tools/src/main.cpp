#include <CLI11.hpp>
#include <iostream>

#include "dihs_cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sketched Newton-CG reconstruction for spectral CT (dihs)"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;

  auto* sim = app.add_subcommand("simulate", "render the phantom and simulate photon counts");
  sim->add_option("config", config, "run config (JSON)")->required();
  sim->add_option("overrides", overrides, "key.path=value overrides");

  std::string counts;
  auto* rec = app.add_subcommand("reconstruct", "run the solver on simulated counts");
  rec->add_option("config", config, "run config or a meta.json")->required();
  rec->add_option("overrides", overrides, "key.path=value overrides");
  rec->add_option("--counts", counts, "counts file (default: from meta.json or <output_dir>/counts.bin)");

  std::vector<std::string> runs;
  std::string out_dir;
  auto* cmp = app.add_subcommand("compare", "compare finished runs");
  cmp->add_option("runs", runs, "run directories")->required();
  cmp->add_option("--out", out_dir, "output directory")->required();

  double lambda = 0.0;
  bool exact = false;
  std::string scores_out;
  auto* sc = app.add_subcommand("scores", "dump the per-view leverage-score distribution");
  sc->add_option("config", config, "run config or a meta.json")->required();
  sc->add_option("overrides", overrides, "key.path=value overrides");
  auto* lam_opt = sc->add_option("--lambda", lambda, "ridge parameter (default: regularizer value at x = 0)");
  sc->add_flag("--exact", exact, "add exact scores from the dense operator (small problems only)");
  sc->add_option("--out", scores_out, "output CSV (default: <output_dir>/scores.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dihs::cli::kConfigError;
  }

  using namespace dihs::cli;
  if (*sim) return cmd_simulate(config, overrides);
  if (*rec)
    return cmd_reconstruct(config, overrides,
                           counts.empty() ? std::nullopt : std::optional<std::filesystem::path>(counts));
  if (*cmp) return cmd_compare({runs.begin(), runs.end()}, out_dir);
  return cmd_scores(config, overrides, *lam_opt ? std::optional<double>(lambda) : std::nullopt, exact,
                    scores_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(scores_out));
}
