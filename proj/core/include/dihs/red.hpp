#pragma once

#include <cstdint>

#include "dihs/denoisers.hpp"

namespace dihs {

struct RedConfig {
  double nu = 1.0;
  double fd_epsilon_scale = 1e-6;
  int mc_probes = 1;

  void validate() const;
};

/// rho(x) = (1/2nu) x^T (x - D(x))
double red_value(const Denoiser& den, const RedConfig& cfg, std::span<const double> x);

/// (1/nu)(x - D(x))
Vector red_gradient(const Denoiser& den, const RedConfig& cfg, std::span<const double> x);

/// Finite-difference step for direction p at x:
/// scale * (1 + |x|_inf) / max(|p|_inf, tiny).
double fd_step(const RedConfig& cfg, std::span<const double> x, std::span<const double> p);

/// (D(x + eps p) - D(x)) / eps. Returns 0 for p = 0 without touching D.
Vector jvp_fd(const Denoiser& den, const RedConfig& cfg, std::span<const double> x, std::span<const double> p);
/// Same, reusing a precomputed D(x).
Vector jvp_fd(const Denoiser& den, const RedConfig& cfg, std::span<const double> x, std::span<const double> dx,
              std::span<const double> p);

/// (1/nu)(p - J[D(x)] p), analytic Jacobian when the denoiser has one.
Vector reg_hessian_action(const Denoiser& den, const RedConfig& cfg, std::span<const double> x,
                          std::span<const double> p);

/// Hutchinson estimate of trace J[D(x)] from cfg.mc_probes Gaussian probes,
/// each probe from its own substream of `seed`.
double trace_mc(const Denoiser& den, const RedConfig& cfg, std::span<const double> x, std::uint64_t seed);

/// max(0, (1/nu)(1 - trace_mc / n)): mean diagonal of the regularizer Hessian.
double ridge_penalty_scalar(const Denoiser& den, const RedConfig& cfg, std::span<const double> x,
                            std::uint64_t seed);

}  // namespace dihs
