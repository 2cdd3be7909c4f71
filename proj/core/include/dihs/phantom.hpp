#pragma once

#include "dihs/common.hpp"

namespace dihs {

struct Circle {
  double center_x = 0.5;  ///< fraction of the side, left to right
  double center_y = 0.5;  ///< fraction of the side, top to bottom
  double radius = 0.1;    ///< fraction of the side
  std::size_t material = 0;
  double concentration = 1.0;
};

struct PhantomSpec {
  std::size_t image_side = 0;
  std::vector<Circle> circles;

  void validate(std::size_t n_materials) const;
};

/// Material-major stack of n_materials images. Each pixel takes the fraction
/// of its area covered by a circle (estimated on a supersample x supersample
/// grid). A circle only writes its own material channel; within a channel a
/// later circle replaces earlier content over the area it covers.
Vector render_phantom(const PhantomSpec& spec, std::size_t n_materials, std::size_t supersample = 16);

/// Averages factor x factor pixel blocks of every channel.
Vector bin_down(std::span<const double> image, std::size_t side, std::size_t channels, std::size_t factor);

/// Water disk with two rings of small inserts: iodine (material 1) on the
/// upper half and gadolinium (material 2) on the lower half, each ring with
/// increasing diameters and concentrations. `insert_scale` multiplies the
/// insert concentrations.
PhantomSpec desk_phantom(std::size_t side, double insert_scale = 1.0);

struct RmseReport {
  Vector per_material;
  double overall = 0.0;
};

/// Root mean squared difference per material image and over everything.
RmseReport rmse(std::span<const double> x, std::span<const double> truth, std::size_t n_materials);

}  // namespace dihs
