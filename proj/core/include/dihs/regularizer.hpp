#pragma once

#include <memory>

#include "dihs/denoisers.hpp"
#include "dihs/red.hpp"

namespace dihs {

/// Penalty rho(x) with the pieces the Newton solver needs.
class Regularizer {
 public:
  struct Eval {
    double value = 0.0;
    Vector gradient;  // empty unless requested
  };

  /// Hessian action frozen at one point.
  class Linearization {
   public:
    virtual ~Linearization() = default;
    virtual void apply(std::span<const double> p, std::span<double> out) const = 0;
  };

  virtual ~Regularizer() = default;
  virtual std::size_t size() const = 0;
  virtual Eval evaluate(std::span<const double> x, bool with_gradient) const = 0;
  virtual std::unique_ptr<Linearization> linearize(std::span<const double> x) const = 0;
  /// Non-negative ridge parameter for the leverage scores at x.
  virtual double ridge_scalar(std::span<const double> x, std::uint64_t seed) const = 0;
};

/// rho(x) = (1/2nu) x^T (x - D(x)), gradient (1/nu)(x - D(x)), Hessian
/// action (1/nu)(I - J[D(x)]).
class RedRegularizer final : public Regularizer {
 public:
  RedRegularizer(std::shared_ptr<const Denoiser> den, RedConfig cfg);

  std::size_t size() const override { return den_->size(); }
  Eval evaluate(std::span<const double> x, bool with_gradient) const override;
  std::unique_ptr<Linearization> linearize(std::span<const double> x) const override;
  double ridge_scalar(std::span<const double> x, std::uint64_t seed) const override;

  const Denoiser& denoiser() const { return *den_; }
  const RedConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const Denoiser> den_;
  RedConfig cfg_;
};

/// rho(x) = (beta/2) sum of squared differences between 4-neighbours within
/// each channel (the graph Laplacian quadratic form). beta = 0 gives plain
/// weighted least squares.
class QuadraticSmoothness final : public Regularizer {
 public:
  QuadraticSmoothness(ImageLayout layout, double beta);

  std::size_t size() const override { return layout_.size(); }
  Eval evaluate(std::span<const double> x, bool with_gradient) const override;
  std::unique_ptr<Linearization> linearize(std::span<const double> x) const override;
  double ridge_scalar(std::span<const double> x, std::uint64_t seed) const override;

  /// out <- beta L p
  void laplacian(std::span<const double> p, std::span<double> out) const;

 private:
  ImageLayout layout_;
  double beta_;
};

}  // namespace dihs
