#include <algorithm>
#include <limits>

#include "dihs/radon.hpp"

namespace dihs {

RayRadon::RayRadon(RadonGeometry geom) : geom_(std::move(geom)) {
  geom_.validate();
  cos_.resize(geom_.n_views());
  sin_.resize(geom_.n_views());
  for (std::size_t v = 0; v < geom_.n_views(); ++v) {
    cos_[v] = std::cos(geom_.view_angles[v]);
    sin_[v] = std::sin(geom_.view_angles[v]);
  }
}

// Siddon-style traversal: walks the ray through the pixel grid, visiting
// each crossed pixel once with the exact length of the chord inside it.
template <class Visit>
void RayRadon::trace_ray(double cos_t, double sin_t, double t, Visit&& visit) const {
  constexpr double kParallel = 1e-12;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double p = geom_.pixel_size;
  const long side = static_cast<long>(geom_.image_side);
  const double half = 0.5 * p * static_cast<double>(side);

  // (x, y) = (x0, y0) + u (dx, dy), |(dx, dy)| = 1
  const double x0 = t * cos_t, y0 = t * sin_t;
  const double dx = -sin_t, dy = cos_t;

  double u_lo = -kInf, u_hi = kInf;
  auto clip = [&](double origin, double dir) {
    if (std::abs(dir) < kParallel) return origin > -half && origin < half;
    const double a = (-half - origin) / dir, b = (half - origin) / dir;
    u_lo = std::max(u_lo, std::min(a, b));
    u_hi = std::min(u_hi, std::max(a, b));
    return true;
  };
  if (!clip(x0, dx) || !clip(y0, dy)) return;
  if (!(u_hi > u_lo)) return;

  // next grid-plane crossing along one axis, and the spacing between crossings
  auto first_crossing = [&](double origin, double dir, double& next, double& step) {
    if (std::abs(dir) < kParallel) {
      next = kInf;
      step = kInf;
      return;
    }
    const double pos = origin + u_lo * dir + half;  // in [0, 2 half]
    double k = dir > 0 ? std::floor(pos / p) + 1.0 : std::ceil(pos / p) - 1.0;
    next = (k * p - half - origin) / dir;
    if (next <= u_lo) next += p / std::abs(dir);
    step = p / std::abs(dir);
  };
  double next_x, step_x, next_y, step_y;
  first_crossing(x0, dx, next_x, step_x);
  first_crossing(y0, dy, next_y, step_y);

  double u = u_lo;
  while (u < u_hi) {
    const double u_next = std::min({next_x, next_y, u_hi});
    const double len = u_next - u;
    if (len > 1e-13 * p) {
      const double um = 0.5 * (u + u_next);
      const long c = std::clamp(static_cast<long>(std::floor((x0 + um * dx + half) / p)), 0L, side - 1);
      const long r = std::clamp(static_cast<long>(std::floor((y0 + um * dy + half) / p)), 0L, side - 1);
      visit(static_cast<std::size_t>(r * side + c), len);
    }
    if (u_next == next_x) next_x += step_x;
    if (u_next == next_y) next_y += step_y;
    u = u_next;
  }
}

void RayRadon::trace(std::size_t view, std::size_t det, const std::function<void(std::size_t, double)>& visit) const {
  require(view < n_views() && det < detectors(), "RayRadon::trace: index out of range");
  trace_ray(cos_[view], sin_[view], geom_.detector_position(det), visit);
}

void RayRadon::apply_views(std::span<const std::size_t> views, std::span<const double> x,
                           std::span<double> y) const {
  check_views(views);
  require(x.size() == cols() && y.size() == rows_for(views.size()), "RayRadon::apply_views: size mismatch");
  const std::size_t nd = detectors();
  for (std::size_t k = 0; k < views.size(); ++k) {
    const std::size_t v = views[k];
    for (std::size_t d = 0; d < nd; ++d) {
      double acc = 0.0;
      trace_ray(cos_[v], sin_[v], geom_.detector_position(d), [&](std::size_t j, double len) { acc += len * x[j]; });
      y[k * nd + d] = acc;
    }
  }
}

void RayRadon::adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                             std::span<double> x) const {
  check_views(views);
  require(x.size() == cols() && y.size() == rows_for(views.size()), "RayRadon::adjoint_views: size mismatch");
  std::fill(x.begin(), x.end(), 0.0);
  const std::size_t nd = detectors();
  for (std::size_t k = 0; k < views.size(); ++k) {
    const std::size_t v = views[k];
    for (std::size_t d = 0; d < nd; ++d) {
      const double val = y[k * nd + d];
      if (val == 0.0) continue;
      trace_ray(cos_[v], sin_[v], geom_.detector_position(d), [&](std::size_t j, double len) { x[j] += len * val; });
    }
  }
}

}  // namespace dihs
