#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

#include "dihs/cg.hpp"
#include "dihs/regularizer.hpp"
#include "dihs/sketch.hpp"
#include "dihs/spectral_model.hpp"

namespace dihs {

struct SolverConfig {
  int max_outer = 20;
  int cg_max_iters = 30;
  double cg_rel_tol = 1e-3;
  double subsample_fraction = 1.0 / 3.0;
  std::size_t s_blocks = 0;          ///< absolute draw count; 0 = use subsample_fraction
  bool sketch_size_from_bound = false;  ///< draw min_sketch_size(...) blocks instead
  double step_size = 1.0;
  double epsilon_embed = 0.5;
  double delta_embed = 0.1;
  bool full_hessian_mode = false;
  bool project_nonnegative = true;
  int max_backtracks = 8;
  double plateau_rel_tol = 1e-8;
  int plateau_window = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct WorkCounters {
  std::uint64_t row_accesses = 0;            ///< view-rows of the data operator, both directions
  std::uint64_t operator_calls = 0;
  std::uint64_t surrogate_row_accesses = 0;  ///< spent in score estimation
};

struct CgStats {
  int iters = 0;
  double residual_norm = 0.0;
  bool negative_curvature = false;
};

struct IterationRecord {
  int outer_iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();  ///< NaN without truth
  double wall_time_s = 0.0;
  std::uint64_t row_accesses = 0;  ///< cumulative
  int cg_iters = 0;
  double sum_block_scores = std::numeric_limits<double>::quiet_NaN();
  double lambda_ridge = std::numeric_limits<double>::quiet_NaN();
  std::size_t s_blocks = 0;
  std::size_t unique_views = 0;
  double step = 0.0;
  int backtracks = 0;
};

struct SolverState {
  Vector x;
  Vector grad;
  double cost = 0.0;
  int outer_iter = 0;
  WorkCounters work;
  std::vector<CgStats> cg_history;
};

enum class Termination { Converged, BudgetExhausted, Stalled };
const char* to_string(Termination t);

/// Score provider for the sketch: (lambda, seed) -> block scores.
using ScoreFunction = std::function<ScoreEstimate(double lambda, std::uint64_t seed)>;

/// Weighted least-squares data term plus a regularizer:
///   g(x) = 1/2 |A x - y|^2_{Sigma^{-1}} + rho(x).
struct Problem {
  SpectralMeasurement meas;
  std::shared_ptr<const ViewBlockedMap> a;
  std::shared_ptr<const Regularizer> reg;
  ScoreFunction scores;  ///< needed unless full_hessian_mode
};

struct SolveResult {
  SolverState state;
  std::vector<IterationRecord> records;  ///< records[0] is the starting point
  Termination status = Termination::BudgetExhausted;
  std::vector<std::uint64_t> view_histogram;  ///< data-operator touches per view
};

struct NewtonStep {
  Vector p;
  CgStats stats;
};

/// Solves (G^T G + H_rho) p = -grad with CG. G is any square-root factor of
/// the (possibly sketched) data Hessian.
NewtonStep newton_step(const LinearMap& g, const Regularizer::Linearization& reg_hessian,
                       std::span<const double> grad, const SolverConfig& cfg);

/// Projected, backtracked sketched Newton iteration from x0.
/// `truth` (optional, may be empty) adds RMSE to every record.
SolveResult denoising_ihs(const Problem& problem, const SolverConfig& cfg, std::span<const double> x0,
                          std::span<const double> truth = {},
                          const std::function<void(const IterationRecord&)>& on_record = {});

struct ConvergenceReport {
  Vector ratios;               ///< e_{t+1} / e_t over informative steps
  double linear_rate = 0.0;    ///< geometric mean of ratios
  double max_ratio = 0.0;
  double c1 = 0.0;             ///< quadratic coefficient
  double c23 = 0.0;            ///< linear coefficient (C2 + C3)
  bool bound_holds = false;    ///< e_{t+1} <= (1 + slack)(c1 e_t^2 + c23 e_t) for all t
  bool quadratic_dominates = false;  ///< c1 e_t^2 >= c23 e_t at the last informative step
};

/// Fits e_{t+1} ~ c1 e_t^2 + c23 e_t by non-negative least squares. Errors
/// below 1e-12 e_0 are treated as converged and excluded.
ConvergenceReport convergence_check(std::span<const double> errors, double slack = 0.25);
/// Errors from records: rmse * sqrt(n).
ConvergenceReport convergence_check(const std::vector<IterationRecord>& records, std::size_t n,
                                    double slack = 0.25);

}  // namespace dihs
