#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dihs/common.hpp"
#include "dihs_cli/config.hpp"

namespace dihs::cli {

struct CurvePoint {
  int outer_iter = 0;
  double cost = 0.0;
  double row_accesses = 0.0;
  double rmse = 0.0;  ///< NaN when the run had no truth
};

/// A finished run directory (meta.json, summary.json, iterations.csv).
struct RunSummary {
  std::string name;
  std::filesystem::path dir;
  Json phantom;
  Vector truth;  ///< empty if truth.bin is absent
  std::string status;
  std::string mode;
  double final_cost = 0.0;
  double row_accesses = 0.0;
  std::vector<std::string> materials;
  Vector rmse_per_material;
  double rmse_overall = 0.0;  ///< NaN without truth
  std::vector<CurvePoint> curve;
};

RunSummary load_run(const std::filesystem::path& dir);

std::string comparison_csv(const std::vector<RunSummary>& runs);
/// Cost against cumulative view-row accesses, log cost axis.
std::string cost_vs_work_svg(const std::vector<RunSummary>& runs);
/// One row per run; deltas against the first run.
std::string rmse_table_md(const std::vector<RunSummary>& runs);

}  // namespace dihs::cli
