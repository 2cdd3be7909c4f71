#pragma once

#include <functional>

#include "dihs/common.hpp"

namespace dihs {

using HessianAction = std::function<void(std::span<const double> v, std::span<double> out)>;

struct CgResult {
  Vector p;
  int iters = 0;
  double residual_norm = 0.0;
  bool negative_curvature = false;
};

/// Conjugate gradients on H p = rhs from p = 0. Stops when
/// |H p - rhs| <= rel_tol |rhs| or after max_iters products. If a search
/// direction has d^T H d <= 0 the current iterate is returned with the flag
/// set; on the first iteration that iterate is rhs itself (steepest descent).
/// `on_iterate`, if set, sees every iterate p_r for r = 0, 1, ...
CgResult cg_solve(const HessianAction& hess, std::span<const double> rhs, int max_iters, double rel_tol,
                  const std::function<void(int, std::span<const double>)>& on_iterate = {});

}  // namespace dihs
