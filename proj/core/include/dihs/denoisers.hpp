#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "dihs/common.hpp"

namespace dihs {

/// Shape of a stack of square images: `channels` images of side x side
/// pixels, stored channel after channel, each row-major.
struct ImageLayout {
  std::size_t side = 0;
  std::size_t channels = 1;
  std::size_t pixels() const { return side * side; }
  std::size_t size() const { return pixels() * channels; }
};

/// Denoising map D(x) on R^n. Implementations must be reentrant: no state
/// may change across apply calls.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual std::size_t size() const = 0;
  virtual std::string name() const = 0;
  virtual void apply_into(std::span<const double> x, std::span<double> out) const = 0;

  /// Whether jvp_into computes J[D(x)] p analytically.
  virtual bool has_exact_jvp() const { return false; }
  /// out <- J[D(x)] p. Throws std::logic_error if !has_exact_jvp().
  virtual void jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const;

  Vector apply(std::span<const double> x) const;
};

class IdentityDenoiser final : public Denoiser {
 public:
  explicit IdentityDenoiser(std::size_t n) : n_(n) {}
  std::size_t size() const override { return n_; }
  std::string name() const override { return "identity"; }
  void apply_into(std::span<const double> x, std::span<double> out) const override;
  bool has_exact_jvp() const override { return true; }
  void jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const override;

 private:
  std::size_t n_;
};

/// Separable Gaussian blur per channel with half-sample symmetric (reflect)
/// boundaries. The kernel is truncated at ceil(4 sigma) and normalized, so the
/// operator is linear, symmetric and doubly stochastic.
class GaussianBlurDenoiser final : public Denoiser {
 public:
  GaussianBlurDenoiser(ImageLayout layout, double sigma);
  std::size_t size() const override { return layout_.size(); }
  std::string name() const override { return "gaussian_blur"; }
  void apply_into(std::span<const double> x, std::span<double> out) const override;
  bool has_exact_jvp() const override { return true; }
  void jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const override;

  std::span<const double> kernel() const { return kernel_; }

 private:
  ImageLayout layout_;
  Vector kernel_;  // taps -r..r
};

/// Gaussian blur followed by a smoothed soft threshold applied pixelwise:
///   s(u) = beta softplus((u - tau) / beta) - beta softplus((-u - tau) / beta),
/// whose derivative lies in (0, 1). As beta -> 0 this is the soft threshold.
class BlurSoftThresholdDenoiser final : public Denoiser {
 public:
  BlurSoftThresholdDenoiser(ImageLayout layout, double sigma, double tau, double beta);
  std::size_t size() const override { return blur_.size(); }
  std::string name() const override { return "blur_soft_threshold"; }
  void apply_into(std::span<const double> x, std::span<double> out) const override;
  bool has_exact_jvp() const override { return true; }
  void jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const override;

 private:
  GaussianBlurDenoiser blur_;
  double tau_, beta_;
};

/// (2 radius + 1)^2 patch mean per channel with reflect boundaries.
class BoxFilterDenoiser final : public Denoiser {
 public:
  BoxFilterDenoiser(ImageLayout layout, std::size_t radius);
  std::size_t size() const override { return layout_.size(); }
  std::string name() const override { return "patch_mean"; }
  void apply_into(std::span<const double> x, std::span<double> out) const override;
  bool has_exact_jvp() const override { return true; }
  void jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const override;

 private:
  ImageLayout layout_;
  Vector kernel_;
};

/// Forwards to another denoiser and counts apply/jvp calls.
class CountingDenoiser final : public Denoiser {
 public:
  explicit CountingDenoiser(std::shared_ptr<const Denoiser> inner) : inner_(std::move(inner)) {}
  std::size_t size() const override { return inner_->size(); }
  std::string name() const override { return inner_->name(); }
  void apply_into(std::span<const double> x, std::span<double> out) const override;
  bool has_exact_jvp() const override { return inner_->has_exact_jvp(); }
  void jvp_into(std::span<const double> x, std::span<const double> p, std::span<double> out) const override;

  std::uint64_t applies() const { return applies_.load(); }
  std::uint64_t jvps() const { return jvps_.load(); }
  std::uint64_t calls() const { return applies() + jvps(); }

 private:
  std::shared_ptr<const Denoiser> inner_;
  mutable std::atomic<std::uint64_t> applies_{0}, jvps_{0};
};

/// Separable symmetric convolution with reflect boundaries (exposed for tests
/// and the box/Gaussian denoisers). `kernel` has odd length.
void separable_filter(ImageLayout layout, std::span<const double> kernel, std::span<const double> x,
                      std::span<double> out);

}  // namespace dihs
