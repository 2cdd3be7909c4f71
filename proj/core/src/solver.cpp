#include "dihs/solver.hpp"

namespace dihs {

void SolverConfig::validate() const {
  require(max_outer >= 0, "solver: max_outer must be >= 0");
  require(cg_max_iters >= 1, "solver: cg_max_iters must be >= 1");
  require(cg_rel_tol > 0.0, "solver: cg_rel_tol must be positive");
  require(subsample_fraction > 0.0 && subsample_fraction <= 1.0, "solver: subsample_fraction must lie in (0, 1]");
  require(step_size > 0.0, "solver: step_size must be positive");
  require(epsilon_embed > 0.0 && epsilon_embed < 1.0, "solver: epsilon_embed must lie in (0, 1)");
  require(delta_embed > 0.0 && delta_embed < 1.0, "solver: delta_embed must lie in (0, 1)");
  require(max_backtracks >= 0, "solver: max_backtracks must be >= 0");
  require(plateau_window >= 1 && plateau_rel_tol >= 0.0, "solver: invalid plateau rule");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::BudgetExhausted: return "budget_exhausted";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

NewtonStep newton_step(const LinearMap& g, const Regularizer::Linearization& reg_hessian,
                       std::span<const double> grad, const SolverConfig& cfg) {
  require(grad.size() == g.cols(), "newton_step: gradient size mismatch");
  Vector gv(g.rows()), tmp(g.cols());
  HessianAction h = [&](std::span<const double> v, std::span<double> out) {
    g.apply_into(v, gv);
    g.adjoint_into(gv, out);
    reg_hessian.apply(v, tmp);
    axpy(1.0, tmp, out);
  };
  Vector rhs(grad.begin(), grad.end());
  scale(-1.0, rhs);
  CgResult r = cg_solve(h, rhs, cfg.cg_max_iters, cfg.cg_rel_tol);
  return {std::move(r.p), CgStats{r.iters, r.residual_norm, r.negative_curvature}};
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double rmse_of(std::span<const double> x, std::span<const double> truth) {
  if (truth.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - truth[i]) * (x[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double projected_gradient_norm(std::span<const double> x, std::span<const double> grad, bool bounded) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!bounded || x[i] > 0.0 || grad[i] < 0.0) m = std::max(m, std::abs(grad[i]));
  return m;
}

// Restricts a square-root factor to the free variables: masked columns read
// as zero and receive nothing back.
class MaskedColumns final : public LinearMap {
 public:
  MaskedColumns(std::shared_ptr<const LinearMap> inner, const std::vector<char>& free)
      : inner_(std::move(inner)), free_(free) {}
  std::size_t rows() const override { return inner_->rows(); }
  std::size_t cols() const override { return inner_->cols(); }
  void apply_into(std::span<const double> x, std::span<double> y) const override {
    Vector xm(x.begin(), x.end());
    for (std::size_t i = 0; i < xm.size(); ++i)
      if (!free_[i]) xm[i] = 0.0;
    inner_->apply_into(xm, y);
  }
  void adjoint_into(std::span<const double> y, std::span<double> x) const override {
    inner_->adjoint_into(y, x);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!free_[i]) x[i] = 0.0;
  }

 private:
  std::shared_ptr<const LinearMap> inner_;
  const std::vector<char>& free_;
};

class MaskedLinearization final : public Regularizer::Linearization {
 public:
  MaskedLinearization(const Regularizer::Linearization& inner, const std::vector<char>& free)
      : inner_(inner), free_(free) {}
  void apply(std::span<const double> p, std::span<double> out) const override {
    Vector pm(p.begin(), p.end());
    for (std::size_t i = 0; i < pm.size(); ++i)
      if (!free_[i]) pm[i] = 0.0;
    inner_.apply(pm, out);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!free_[i]) out[i] = 0.0;
  }

 private:
  const Regularizer::Linearization& inner_;
  const std::vector<char>& free_;
};

// Data term and regularizer evaluated at one point.
struct Point {
  Vector x, residual, grad;
  double cost = 0.0;
};

class Objective {
 public:
  Objective(const Problem& p, std::shared_ptr<const CountingViewMap> b)
      : reg_(*p.reg), b_(std::move(b)), ytil_(p.meas.log_data) {
    for (std::size_t i = 0; i < ytil_.size(); ++i) ytil_[i] *= std::sqrt(p.meas.inv_cov_diag[i]);
  }

  // Cost and regularizer gradient; the data gradient is added by finish().
  Point trial(Vector x) const {
    Point pt;
    pt.residual = b_->apply(x);
    axpy(-1.0, ytil_, pt.residual);
    Regularizer::Eval e = reg_.evaluate(x, true);
    pt.cost = 0.5 * dot(pt.residual, pt.residual) + e.value;
    pt.grad = std::move(e.gradient);
    pt.x = std::move(x);
    return pt;
  }

  void finish(Point& pt) const { axpy(1.0, b_->adjoint(pt.residual), pt.grad); }

 private:
  const Regularizer& reg_;
  std::shared_ptr<const CountingViewMap> b_;
  Vector ytil_;
};

}  // namespace

SolveResult denoising_ihs(const Problem& problem, const SolverConfig& cfg, std::span<const double> x0,
                          std::span<const double> truth,
                          const std::function<void(const IterationRecord&)>& on_record) {
  cfg.validate();
  require(problem.a && problem.reg, "denoising_ihs: operator and regularizer are required");
  const std::size_t n = problem.a->cols();
  require(x0.size() == n, "denoising_ihs: x0 has wrong size");
  require(truth.empty() || truth.size() == n, "denoising_ihs: truth has wrong size");
  require(problem.reg->size() == n, "denoising_ihs: regularizer size does not match operator");
  require(problem.meas.log_data.size() == problem.a->rows() && problem.meas.inv_cov_diag.size() == problem.a->rows(),
          "denoising_ihs: measurement does not match operator rows");
  require(cfg.full_hessian_mode || static_cast<bool>(problem.scores),
          "denoising_ihs: sketched mode needs a score function");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  auto b = std::make_shared<CountingViewMap>(sqrt_hessian(problem.meas, problem.a));
  const Objective obj(problem, b);
  const std::size_t np = b->n_views();

  Vector x(x0.begin(), x0.end());
  if (cfg.project_nonnegative)
    for (double& v : x) v = std::max(v, 0.0);
  Point cur = obj.trial(std::move(x));
  obj.finish(cur);

  SolveResult res;
  auto sync_state = [&] {
    res.state.x = cur.x;
    res.state.grad = cur.grad;
    res.state.cost = cur.cost;
    res.state.work.row_accesses = b->row_accesses();
    res.state.work.operator_calls = b->calls();
  };
  sync_state();
  {
    IterationRecord rec;
    rec.cost = cur.cost;
    rec.grad_norm = norm2(cur.grad);
    rec.rmse = rmse_of(cur.x, truth);
    rec.wall_time_s = elapsed();
    rec.row_accesses = b->row_accesses();
    res.records.push_back(rec);
    if (on_record) on_record(rec);
  }

  int plateau = 0;
  res.status = Termination::BudgetExhausted;
  for (int t = 1; t <= cfg.max_outer; ++t) {
    const std::uint64_t seed_t = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(t)));
    IterationRecord rec;
    rec.outer_iter = t;

    if (projected_gradient_norm(cur.x, cur.grad, cfg.project_nonnegative) == 0.0) {
      res.status = Termination::Converged;
      break;
    }

    std::shared_ptr<const LinearMap> g;
    if (cfg.full_hessian_mode) {
      g = b;
      rec.s_blocks = rec.unique_views = np;
    } else {
      rec.lambda_ridge = problem.reg->ridge_scalar(cur.x, splitmix64(seed_t + 1));
      const ScoreEstimate est = problem.scores(rec.lambda_ridge, splitmix64(seed_t + 2));
      require(est.scores.per_block.size() == np, "denoising_ihs: score function returned wrong block count");
      res.state.work.surrogate_row_accesses += est.surrogate_row_accesses;
      rec.sum_block_scores = est.scores.total();
      std::size_t s = cfg.s_blocks;
      if (cfg.sketch_size_from_bound)
        s = min_sketch_size(rec.sum_block_scores, n, cfg.delta_embed, cfg.epsilon_embed);
      else if (s == 0)
        s = static_cast<std::size_t>(std::ceil(cfg.subsample_fraction * static_cast<double>(np)));
      s = std::max<std::size_t>(s, 1);
      SketchPlan plan = draw_sketch(est.scores, s, splitmix64(seed_t + 3));
      rec.s_blocks = s;
      rec.unique_views = plan.sampled_blocks.size();
      g = std::make_shared<SketchedMap>(std::move(plan), b);
    }

    // Variables sitting on the bound with the gradient pushing outward stay
    // fixed; Newton runs on the rest, so the clipped step is still a descent path.
    std::vector<char> free(n, 1);
    Vector grad = cur.grad;
    if (cfg.project_nonnegative)
      for (std::size_t i = 0; i < n; ++i)
        if (cur.x[i] <= 0.0 && grad[i] > 0.0) {
          free[i] = 0;
          grad[i] = 0.0;
        }
    const auto lin = problem.reg->linearize(cur.x);
    const MaskedColumns gm(g, free);
    const MaskedLinearization lm(*lin, free);
    NewtonStep step = newton_step(gm, lm, grad, cfg);
    rec.cg_iters = step.stats.iters;
    res.state.cg_history.push_back(step.stats);

    double alpha = cfg.step_size;
    bool accepted = false;
    Point next;
    for (int k = 0; k <= cfg.max_backtracks; ++k) {
      Vector xt = cur.x;
      axpy(alpha, step.p, xt);
      if (cfg.project_nonnegative)
        for (double& v : xt) v = std::max(v, 0.0);
      next = obj.trial(std::move(xt));
      if (std::isfinite(next.cost) && next.cost <= cur.cost) {
        accepted = true;
        break;
      }
      rec.backtracks = k + 1;
      alpha *= 0.5;
    }

    if (!accepted) {
      res.status = Termination::Stalled;
      rec.cost = cur.cost;
      rec.grad_norm = norm2(cur.grad);
      rec.rmse = rmse_of(cur.x, truth);
      rec.wall_time_s = elapsed();
      rec.row_accesses = b->row_accesses();
      rec.step = 0.0;
      res.records.push_back(rec);
      if (on_record) on_record(rec);
      sync_state();
      res.state.outer_iter = t;
      break;
    }

    obj.finish(next);
    const double prev = cur.cost;
    cur = std::move(next);
    rec.step = alpha;
    rec.cost = cur.cost;
    rec.grad_norm = norm2(cur.grad);
    rec.rmse = rmse_of(cur.x, truth);
    rec.wall_time_s = elapsed();
    rec.row_accesses = b->row_accesses();
    res.records.push_back(rec);
    if (on_record) on_record(rec);
    sync_state();
    res.state.outer_iter = t;

    const double rel = (prev - cur.cost) / std::max(std::abs(cur.cost), std::numeric_limits<double>::min());
    plateau = rel < cfg.plateau_rel_tol ? plateau + 1 : 0;
    if (plateau >= cfg.plateau_window) {
      res.status = Termination::Converged;
      break;
    }
  }
  res.view_histogram = b->view_histogram();
  return res;
}

}  // namespace dihs
