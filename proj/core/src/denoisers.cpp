#include "dihs/denoisers.hpp"

#include <algorithm>
#include <stdexcept>

namespace dihs {

void Denoiser::jvp_into(std::span<const double>, std::span<const double>, std::span<double>) const {
  throw std::logic_error("denoiser '" + name() + "' has no analytic Jacobian-vector product");
}

Vector Denoiser::apply(std::span<const double> x) const {
  Vector out(size());
  apply_into(x, out);
  return out;
}

void IdentityDenoiser::apply_into(std::span<const double> x, std::span<double> out) const {
  require(x.size() == n_ && out.size() == n_, "identity denoiser: size mismatch");
  std::copy(x.begin(), x.end(), out.begin());
}

void IdentityDenoiser::jvp_into(std::span<const double>, std::span<const double> p, std::span<double> out) const {
  require(p.size() == n_ && out.size() == n_, "identity denoiser: size mismatch");
  std::copy(p.begin(), p.end(), out.begin());
}

namespace {

// Half-sample symmetric extension: ... c b a | a b c ... | c b a ...
std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  long r = i % period;
  if (r < 0) r += period;
  return static_cast<std::size_t>(r < n ? r : period - 1 - r);
}

}  // namespace

void separable_filter(ImageLayout layout, std::span<const double> kernel, std::span<const double> x,
                      std::span<double> out) {
  require(kernel.size() % 2 == 1, "separable_filter: kernel length must be odd");
  require(x.size() == layout.size() && out.size() == layout.size(), "separable_filter: size mismatch");
  const long n = static_cast<long>(layout.side);
  const long r = static_cast<long>(kernel.size() / 2);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n + 2 * r));  // idx[i + r] = reflect(i)
  for (long i = -r; i < n + r; ++i) idx[static_cast<std::size_t>(i + r)] = reflect(i, n);
  const auto nn = static_cast<std::size_t>(n);
  const std::size_t taps = kernel.size();
  Vector tmp(layout.pixels());
  for (std::size_t ch = 0; ch < layout.channels; ++ch) {
    const double* src = x.data() + ch * layout.pixels();
    double* dst = out.data() + ch * layout.pixels();
    for (std::size_t row = 0; row < nn; ++row)
      for (std::size_t col = 0; col < nn; ++col) {
        double acc = 0.0;
        for (std::size_t k = 0; k < taps; ++k) acc += kernel[k] * src[row * nn + idx[col + k]];
        tmp[row * nn + col] = acc;
      }
    for (std::size_t row = 0; row < nn; ++row)
      for (std::size_t col = 0; col < nn; ++col) {
        double acc = 0.0;
        for (std::size_t k = 0; k < taps; ++k) acc += kernel[k] * tmp[idx[row + k] * nn + col];
        dst[row * nn + col] = acc;
      }
  }
}

GaussianBlurDenoiser::GaussianBlurDenoiser(ImageLayout layout, double sigma) : layout_(layout) {
  require(layout.side >= 1 && layout.channels >= 1, "gaussian blur: empty layout");
  require(sigma > 0.0 && std::isfinite(sigma), "gaussian blur: sigma must be positive");
  const long r = static_cast<long>(std::ceil(4.0 * sigma));
  kernel_.resize(static_cast<std::size_t>(2 * r + 1));
  double total = 0.0;
  for (long k = -r; k <= r; ++k) {
    const double w = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel_[static_cast<std::size_t>(k + r)] = w;
    total += w;
  }
  for (double& w : kernel_) w /= total;
}

void GaussianBlurDenoiser::apply_into(std::span<const double> x, std::span<double> out) const {
  separable_filter(layout_, kernel_, x, out);
}

void GaussianBlurDenoiser::jvp_into(std::span<const double>, std::span<const double> p, std::span<double> out) const {
  separable_filter(layout_, kernel_, p, out);
}

BlurSoftThresholdDenoiser::BlurSoftThresholdDenoiser(ImageLayout layout, double sigma, double tau, double beta)
    : blur_(layout, sigma), tau_(tau), beta_(beta) {
  require(tau >= 0.0 && beta > 0.0, "blur_soft_threshold: need tau >= 0 and beta > 0");
}

namespace {
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
}  // namespace

void BlurSoftThresholdDenoiser::apply_into(std::span<const double> x, std::span<double> out) const {
  blur_.apply_into(x, out);
  for (double& u : out) u = beta_ * softplus((u - tau_) / beta_) - beta_ * softplus((-u - tau_) / beta_);
}

void BlurSoftThresholdDenoiser::jvp_into(std::span<const double> x, std::span<const double> p,
                                         std::span<double> out) const {
  const Vector u = blur_.apply(x);
  blur_.apply_into(p, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= logistic((u[i] - tau_) / beta_) + logistic((-u[i] - tau_) / beta_);
}

BoxFilterDenoiser::BoxFilterDenoiser(ImageLayout layout, std::size_t radius)
    : layout_(layout), kernel_(2 * radius + 1, 1.0 / static_cast<double>(2 * radius + 1)) {
  require(layout.side >= 1 && layout.channels >= 1, "patch mean: empty layout");
}

void BoxFilterDenoiser::apply_into(std::span<const double> x, std::span<double> out) const {
  separable_filter(layout_, kernel_, x, out);
}

void BoxFilterDenoiser::jvp_into(std::span<const double>, std::span<const double> p, std::span<double> out) const {
  separable_filter(layout_, kernel_, p, out);
}

void CountingDenoiser::apply_into(std::span<const double> x, std::span<double> out) const {
  ++applies_;
  inner_->apply_into(x, out);
}

void CountingDenoiser::jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const {
  ++jvps_;
  inner_->jvp_into(x, p, out);
}

}  // namespace dihs
