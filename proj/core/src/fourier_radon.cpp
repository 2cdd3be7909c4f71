#include <algorithm>
#include <numbers>

#include "dihs/radon.hpp"

namespace dihs {

namespace {
constexpr std::size_t kOversample = 4;

double sinc(double z) {
  if (std::abs(z) < 1e-12) return 1.0;
  const double a = std::numbers::pi * z;
  return std::sin(a) / a;
}
}  // namespace

std::size_t FourierRadon::wrap(long i, std::size_t n) const {
  const long m = static_cast<long>(n);
  long r = i % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

FourierRadon::FourierRadon(RadonGeometry geom) : geom_(std::move(geom)) {
  geom_.validate();
  const std::size_t side = geom_.image_side;
  const double p = geom_.pixel_size, delta = geom_.detector_spacing;
  grid_ = next_pow2(kOversample * side);
  const auto support = static_cast<std::size_t>(std::ceil(std::sqrt(2.0) * side * p / delta));
  radial_ = next_pow2(2 * std::max(geom_.n_detectors, support));

  // Bilinear interpolation of the spectrum multiplies the (wrapped) image by
  // sinc^2(u / grid) along each axis; undo it before transforming.
  deapod_.resize(side);
  const long half = static_cast<long>(side / 2);
  for (std::size_t c = 0; c < side; ++c) {
    const double s = sinc(static_cast<double>(static_cast<long>(c) - half) / static_cast<double>(grid_));
    deapod_[c] = 1.0 / (s * s);
  }

  const double m = static_cast<double>(grid_), l = static_cast<double>(radial_);
  const double det_centre = 0.5 * static_cast<double>(geom_.n_detectors - 1);
  const double shift = static_cast<double>(half) - 0.5 * static_cast<double>(side - 1);  // wrapped origin offset
  taps_.resize(geom_.n_views() * radial_);
  factor_.resize(geom_.n_views() * radial_);
  for (std::size_t v = 0; v < geom_.n_views(); ++v) {
    const double ct = std::cos(geom_.view_angles[v]), st = std::sin(geom_.view_angles[v]);
    for (std::size_t s = 0; s < radial_; ++s) {
      const double j = static_cast<double>(static_cast<long>(s) - static_cast<long>(radial_ / 2));
      // radial frequency j / (L delta) in cycles per unit length, in DFT-grid units
      const double k = j * p * m / (l * delta);
      const double kx = k * ct, ky = k * st;
      const double fx = std::floor(kx), fy = std::floor(ky);
      const double ax = kx - fx, ay = ky - fy;
      const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
      Tap& tap = taps_[v * radial_ + s];
      tap.idx[0] = static_cast<std::uint32_t>(wrap(iy, grid_) * grid_ + wrap(ix, grid_));
      tap.idx[1] = static_cast<std::uint32_t>(wrap(iy, grid_) * grid_ + wrap(ix + 1, grid_));
      tap.idx[2] = static_cast<std::uint32_t>(wrap(iy + 1, grid_) * grid_ + wrap(ix, grid_));
      tap.idx[3] = static_cast<std::uint32_t>(wrap(iy + 1, grid_) * grid_ + wrap(ix + 1, grid_));
      tap.w[0] = (1 - ax) * (1 - ay);
      tap.w[1] = ax * (1 - ay);
      tap.w[2] = (1 - ax) * ay;
      tap.w[3] = ax * ay;
      // pixel footprint, wrapped-origin phase, detector-centre phase, quadrature weight
      const double footprint = p * p * sinc(kx / m) * sinc(ky / m);
      const double phase = -2.0 * std::numbers::pi * (shift * (kx + ky) / m) -
                           2.0 * std::numbers::pi * j * det_centre / l;
      factor_[v * radial_ + s] = std::polar(footprint / (l * delta), phase);
    }
  }
  fft2_ = std::make_unique<Fft>(grid_, Fft::Rank::Two);
  fft1_ = std::make_unique<Fft>(radial_, Fft::Rank::One);
}

void FourierRadon::apply_views(std::span<const std::size_t> views, std::span<const double> x,
                               std::span<double> y) const {
  check_views(views);
  require(x.size() == cols() && y.size() == rows_for(views.size()), "FourierRadon::apply_views: size mismatch");
  const std::size_t side = geom_.image_side, nd = geom_.n_detectors;
  const long half = static_cast<long>(side / 2);

  ComplexBuffer spec(grid_ * grid_);
  for (std::size_t r = 0; r < side; ++r) {
    const std::size_t row = wrap(static_cast<long>(r) - half, grid_) * grid_;
    for (std::size_t c = 0; c < side; ++c)
      spec[row + wrap(static_cast<long>(c) - half, grid_)] = x[r * side + c] * deapod_[r] * deapod_[c];
  }
  fft2_->forward(spec);

  ComplexBuffer line(radial_);
  for (std::size_t k = 0; k < views.size(); ++k) {
    const std::size_t v = views[k];
    line.zero();
    for (std::size_t s = 0; s < radial_; ++s) {
      const Tap& t = taps_[v * radial_ + s];
      const Complex val = t.w[0] * spec[t.idx[0]] + t.w[1] * spec[t.idx[1]] + t.w[2] * spec[t.idx[2]] +
                          t.w[3] * spec[t.idx[3]];
      line[wrap(static_cast<long>(s) - static_cast<long>(radial_ / 2), radial_)] = val * factor_[v * radial_ + s];
    }
    fft1_->backward(line);
    for (std::size_t d = 0; d < nd; ++d) y[k * nd + d] = line[d].real();
  }
}

void FourierRadon::adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                                 std::span<double> x) const {
  check_views(views);
  require(x.size() == cols() && y.size() == rows_for(views.size()), "FourierRadon::adjoint_views: size mismatch");
  const std::size_t side = geom_.image_side, nd = geom_.n_detectors;
  const long half = static_cast<long>(side / 2);

  ComplexBuffer spec(grid_ * grid_);
  ComplexBuffer line(radial_);
  for (std::size_t k = 0; k < views.size(); ++k) {
    const std::size_t v = views[k];
    line.zero();
    for (std::size_t d = 0; d < nd; ++d) line[d] = y[k * nd + d];
    fft1_->forward(line);
    for (std::size_t s = 0; s < radial_; ++s) {
      const Tap& t = taps_[v * radial_ + s];
      const Complex val = line[wrap(static_cast<long>(s) - static_cast<long>(radial_ / 2), radial_)] *
                          std::conj(factor_[v * radial_ + s]);
      for (int q = 0; q < 4; ++q) spec[t.idx[q]] += t.w[q] * val;
    }
  }
  fft2_->backward(spec);
  for (std::size_t r = 0; r < side; ++r) {
    const std::size_t row = wrap(static_cast<long>(r) - half, grid_) * grid_;
    for (std::size_t c = 0; c < side; ++c)
      x[r * side + c] = spec[row + wrap(static_cast<long>(c) - half, grid_)].real() * deapod_[r] * deapod_[c];
  }
}

}  // namespace dihs
