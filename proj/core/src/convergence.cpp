#include <Eigen/Dense>

#include "dihs/solver.hpp"

namespace dihs {

namespace {

// min |y - c1 a - c2 b|^2 subject to c >= 0, by enumerating the active sets.
std::pair<double, double> nnls2(const Vector& a, const Vector& b, const Vector& y) {
  const double aa = dot(a, a), bb = dot(b, b), ab = dot(a, b), ay = dot(a, y), by = dot(b, y);
  auto residual = [&](double c1, double c2) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::pow(y[i] - c1 * a[i] - c2 * b[i], 2);
    return s;
  };
  std::pair<double, double> best{0.0, 0.0};
  double best_r = residual(0.0, 0.0);
  auto consider = [&](double c1, double c2) {
    if (c1 < 0.0 || c2 < 0.0 || !std::isfinite(c1) || !std::isfinite(c2)) return;
    const double r = residual(c1, c2);
    if (r < best_r) {
      best_r = r;
      best = {c1, c2};
    }
  };
  const double det = aa * bb - ab * ab;
  if (std::abs(det) > 1e-300) consider((ay * bb - by * ab) / det, (by * aa - ay * ab) / det);
  if (aa > 0.0) consider(ay / aa, 0.0);
  if (bb > 0.0) consider(0.0, by / bb);
  return best;
}

}  // namespace

ConvergenceReport convergence_check(std::span<const double> errors, double slack) {
  ConvergenceReport rep;
  if (errors.size() < 2) return rep;
  const double floor = 1e-12 * errors[0];
  Vector sq, lin, next;
  for (std::size_t t = 0; t + 1 < errors.size(); ++t) {
    if (errors[t] <= floor) break;
    rep.ratios.push_back(errors[t + 1] / errors[t]);
    sq.push_back(errors[t] * errors[t]);
    lin.push_back(errors[t]);
    next.push_back(errors[t + 1]);
  }
  if (rep.ratios.empty()) return rep;
  double logsum = 0.0;
  for (double r : rep.ratios) {
    logsum += std::log(std::max(r, 1e-300));
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  rep.linear_rate = std::exp(logsum / static_cast<double>(rep.ratios.size()));
  std::tie(rep.c1, rep.c23) = nnls2(sq, lin, next);
  rep.bound_holds = true;
  for (std::size_t i = 0; i < next.size(); ++i)
    if (next[i] > (1.0 + slack) * (rep.c1 * sq[i] + rep.c23 * lin[i]) + floor) rep.bound_holds = false;
  rep.quadratic_dominates = rep.c1 * sq.back() >= rep.c23 * lin.back();
  return rep;
}

ConvergenceReport convergence_check(const std::vector<IterationRecord>& records, std::size_t n, double slack) {
  Vector e;
  for (const auto& r : records) {
    require(std::isfinite(r.rmse), "convergence_check: records carry no RMSE (truth missing)");
    e.push_back(r.rmse * std::sqrt(static_cast<double>(n)));
  }
  return convergence_check(e, slack);
}

}  // namespace dihs
