#pragma once

#include <functional>
#include <memory>

#include "dihs/fft.hpp"
#include "dihs/linear_map.hpp"

namespace dihs {

/// Parallel-beam acquisition geometry.
///
/// The image is image_side x image_side pixels of width pixel_size, centred
/// on the rotation axis; pixel (row r, col c) is stored at r * image_side + c
/// and has centre x = pixel_size (c - (I-1)/2), y = pixel_size (r - (I-1)/2).
/// Detector d of a view at angle theta integrates along the line
/// x cos(theta) + y sin(theta) = detector_spacing (d - (N_d-1)/2).
struct RadonGeometry {
  std::size_t image_side = 0;
  std::size_t n_detectors = 0;
  Vector view_angles;
  double detector_spacing = 1.0;
  double pixel_size = 1.0;

  std::size_t n_views() const { return view_angles.size(); }
  std::size_t n_pixels() const { return image_side * image_side; }
  std::size_t n_rows() const { return n_views() * n_detectors; }
  double detector_position(std::size_t d) const {
    return detector_spacing * (static_cast<double>(d) - 0.5 * static_cast<double>(n_detectors - 1));
  }

  /// Throws ContractError unless image_side >= 2, at least one view, angles
  /// strictly increasing in [0, pi), positive spacings.
  void validate() const;

  /// n_views equally spaced angles k pi / n_views. n_detectors == 0 picks the
  /// smallest count covering the image diagonal.
  static RadonGeometry parallel(std::size_t image_side, std::size_t n_views, std::size_t n_detectors = 0,
                                double detector_spacing = 1.0, double pixel_size = 1.0);
};

std::size_t default_detector_count(std::size_t image_side, double pixel_size, double detector_spacing);

/// Ray-driven projector with exact line/pixel intersection lengths
/// (Siddon traversal). Every matrix entry is a non-negative chord length.
class RayRadon final : public ViewBlockedMap {
 public:
  explicit RayRadon(RadonGeometry geom);

  std::size_t cols() const override { return geom_.n_pixels(); }
  std::size_t n_views() const override { return geom_.n_views(); }
  std::size_t detectors() const override { return geom_.n_detectors; }
  const RadonGeometry& geometry() const { return geom_; }

  void apply_views(std::span<const std::size_t> views, std::span<const double> x,
                   std::span<double> y) const override;
  void adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                     std::span<double> x) const override;

  /// Visits every pixel crossed by ray (view, det) with its intersection length.
  void trace(std::size_t view, std::size_t det, const std::function<void(std::size_t, double)>& visit) const;

 private:
  template <class Visit>
  void trace_ray(double cos_t, double sin_t, double t, Visit&& visit) const;

  RadonGeometry geom_;
  Vector cos_, sin_;
};

/// Fourier-slice projector: per view, the radial line of the (oversampled)
/// 2-D DFT of the image is bilinearly interpolated, multiplied by the pixel
/// footprint and inverse transformed in 1-D. The image is pre-divided by the
/// interpolation kernel's spatial response, and zero-padded to a power-of-two
/// grid, so any image_side is accepted.
class FourierRadon final : public ViewBlockedMap {
 public:
  explicit FourierRadon(RadonGeometry geom);

  std::size_t cols() const override { return geom_.n_pixels(); }
  std::size_t n_views() const override { return geom_.n_views(); }
  std::size_t detectors() const override { return geom_.n_detectors; }
  const RadonGeometry& geometry() const { return geom_; }
  std::size_t grid_size() const { return grid_; }
  std::size_t radial_size() const { return radial_; }

  void apply_views(std::span<const std::size_t> views, std::span<const double> x,
                   std::span<double> y) const override;
  void adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                     std::span<double> x) const override;

 private:
  struct Tap {
    std::uint32_t idx[4];
    double w[4];
  };

  std::size_t wrap(long i, std::size_t n) const;

  RadonGeometry geom_;
  std::size_t grid_;    // 2-D DFT size
  std::size_t radial_;  // 1-D DFT size per view
  Vector deapod_;       // per image row/col divisor
  std::vector<Tap> taps_;      // [view][radial sample]
  std::vector<Complex> factor_;  // [view][radial sample]
  std::unique_ptr<Fft> fft2_, fft1_;
};

/// Circulant surrogate of R^T R: the image is zero-padded to a power-of-two
/// grid and filtered by the real, non-negative transfer
///   (N_p / (pi * spacing)) * pixel^3 * sinc^2(kx) sinc^2(ky) / |k|
/// on the disc the projector samples, zero outside it, with 1/|k| at DC
/// replaced by its average over the DC cell, 4 ln(1 + sqrt 2) / delta_k.
/// Symmetric positive semi-definite by construction.
class GramFft final : public LinearMap {
 public:
  explicit GramFft(RadonGeometry geom);

  std::size_t rows() const override { return geom_.n_pixels(); }
  std::size_t cols() const override { return geom_.n_pixels(); }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void adjoint_into(std::span<const double> y, std::span<double> x) const override { apply_into(y, x); }

  std::size_t grid_size() const { return grid_; }
  /// Transfer function on the padded grid, row-major grid_ x grid_.
  std::span<const double> transfer() const { return transfer_; }
  const RadonGeometry& geometry() const { return geom_; }

  /// Embeds an image in the padded grid (zero elsewhere).
  void embed(std::span<const double> image, ComplexBuffer& grid) const;
  /// Extracts the image block of a padded grid (real part).
  void extract(const ComplexBuffer& grid, std::span<double> image) const;
  const Fft& fft() const { return *fft_; }

 private:
  RadonGeometry geom_;
  std::size_t grid_;
  Vector transfer_;
  std::unique_ptr<Fft> fft_;
};

}  // namespace dihs
