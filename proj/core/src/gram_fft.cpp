#include <numbers>

#include "dihs/radon.hpp"

namespace dihs {

namespace {
double sinc(double z) {
  if (std::abs(z) < 1e-12) return 1.0;
  const double a = std::numbers::pi * z;
  return std::sin(a) / a;
}
}  // namespace

GramFft::GramFft(RadonGeometry geom) : geom_(std::move(geom)) {
  geom_.validate();
  grid_ = 2 * next_pow2(2 * geom_.image_side);
  const double m = static_cast<double>(grid_);
  const double p = geom_.pixel_size, delta = geom_.detector_spacing;
  const double gain = static_cast<double>(geom_.n_views()) / (std::numbers::pi * delta) * p * p * p;
  const double band = p / (2.0 * delta);  // radial Nyquist, cycles per pixel
  transfer_.assign(grid_ * grid_, 0.0);
  for (std::size_t r = 0; r < grid_; ++r) {
    const double ky = (r < grid_ / 2 ? static_cast<double>(r) : static_cast<double>(r) - m) / m;
    for (std::size_t c = 0; c < grid_; ++c) {
      const double kx = (c < grid_ / 2 ? static_cast<double>(c) : static_cast<double>(c) - m) / m;
      const double rho = std::hypot(kx, ky);
      if (rho > band) continue;
      // At DC use the mean of 1/|k| over the grid cell: 4 ln(1 + sqrt 2) / delta_k.
      const double inv_rho = (r == 0 && c == 0) ? 4.0 * std::log1p(std::numbers::sqrt2) * m : 1.0 / rho;
      const double fx = sinc(kx), fy = sinc(ky);
      transfer_[r * grid_ + c] = gain * fx * fx * fy * fy * inv_rho;
    }
  }
  fft_ = std::make_unique<Fft>(grid_, Fft::Rank::Two);
}

void GramFft::embed(std::span<const double> image, ComplexBuffer& grid) const {
  require(image.size() == geom_.n_pixels() && grid.size() == grid_ * grid_, "GramFft::embed: size mismatch");
  grid.zero();
  const std::size_t side = geom_.image_side;
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) grid[r * grid_ + c] = image[r * side + c];
}

void GramFft::extract(const ComplexBuffer& grid, std::span<double> image) const {
  require(image.size() == geom_.n_pixels() && grid.size() == grid_ * grid_, "GramFft::extract: size mismatch");
  const std::size_t side = geom_.image_side;
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) image[r * side + c] = grid[r * grid_ + c].real();
}

void GramFft::apply_into(std::span<const double> x, std::span<double> y) const {
  check_apply(x, y);
  ComplexBuffer buf(grid_ * grid_);
  embed(x, buf);
  fft_->forward(buf);
  const double norm = 1.0 / static_cast<double>(grid_ * grid_);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= transfer_[i] * norm;
  fft_->backward(buf);
  extract(buf, y);
}

}  // namespace dihs
