#include "dihs/cg.hpp"

namespace dihs {

CgResult cg_solve(const HessianAction& hess, std::span<const double> rhs, int max_iters, double rel_tol,
                  const std::function<void(int, std::span<const double>)>& on_iterate) {
  require(max_iters >= 0, "cg_solve: max_iters must be >= 0");
  require(rel_tol > 0.0, "cg_solve: rel_tol must be positive");
  const std::size_t n = rhs.size();
  CgResult out;
  out.p.assign(n, 0.0);
  Vector r(rhs.begin(), rhs.end()), d = r, hd(n);
  double rr = dot(r, r);
  const double target = rel_tol * std::sqrt(rr);
  out.residual_norm = std::sqrt(rr);
  if (on_iterate) on_iterate(0, out.p);
  if (rr == 0.0) return out;

  for (int k = 0; k < max_iters; ++k) {
    hess(d, hd);
    const double curv = dot(d, hd);
    if (!(curv > 0.0)) {
      out.negative_curvature = true;
      if (k == 0) out.p.assign(rhs.begin(), rhs.end());
      return out;
    }
    const double alpha = rr / curv;
    axpy(alpha, d, out.p);
    axpy(-alpha, hd, r);
    const double rr_new = dot(r, r);
    out.iters = k + 1;
    out.residual_norm = std::sqrt(rr_new);
    if (on_iterate) on_iterate(out.iters, out.p);
    if (out.residual_norm <= target) break;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
  }
  return out;
}

}  // namespace dihs
