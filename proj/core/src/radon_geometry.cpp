#include <numbers>

#include "dihs/radon.hpp"

namespace dihs {

void RadonGeometry::validate() const {
  require(image_side >= 2, "geometry: image_side must be >= 2");
  require(n_detectors >= 1, "geometry: n_detectors must be >= 1");
  require(!view_angles.empty(), "geometry: at least one view is required");
  require(detector_spacing > 0.0 && pixel_size > 0.0, "geometry: spacings must be positive");
  for (std::size_t i = 0; i < view_angles.size(); ++i) {
    const double a = view_angles[i];
    require(std::isfinite(a) && a >= 0.0 && a < std::numbers::pi, "geometry: view angles must lie in [0, pi)");
    if (i > 0) require(a > view_angles[i - 1], "geometry: view angles must be strictly increasing");
  }
}

std::size_t default_detector_count(std::size_t image_side, double pixel_size, double detector_spacing) {
  const double diag = std::sqrt(2.0) * static_cast<double>(image_side) * pixel_size;
  return static_cast<std::size_t>(std::ceil(diag / detector_spacing)) + 1;
}

RadonGeometry RadonGeometry::parallel(std::size_t image_side, std::size_t n_views, std::size_t n_detectors,
                                      double detector_spacing, double pixel_size) {
  RadonGeometry g;
  g.image_side = image_side;
  g.detector_spacing = detector_spacing;
  g.pixel_size = pixel_size;
  g.n_detectors = n_detectors != 0 ? n_detectors : default_detector_count(image_side, pixel_size, detector_spacing);
  g.view_angles.resize(n_views);
  for (std::size_t k = 0; k < n_views; ++k)
    g.view_angles[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_views);
  g.validate();
  return g;
}

}  // namespace dihs
