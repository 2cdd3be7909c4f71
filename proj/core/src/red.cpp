#include "dihs/red.hpp"

#include <limits>
#include <random>

namespace dihs {

void RedConfig::validate() const {
  require(nu > 0.0 && std::isfinite(nu), "red: nu must be positive");
  require(fd_epsilon_scale > 0.0, "red: fd_epsilon_scale must be positive");
  require(mc_probes >= 1, "red: mc_probes must be >= 1");
}

double red_value(const Denoiser& den, const RedConfig& cfg, std::span<const double> x) {
  const Vector dx = den.apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * (x[i] - dx[i]);
  return s / (2.0 * cfg.nu);
}

Vector red_gradient(const Denoiser& den, const RedConfig& cfg, std::span<const double> x) {
  Vector g = den.apply(x);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (x[i] - g[i]) / cfg.nu;
  return g;
}

double fd_step(const RedConfig& cfg, std::span<const double> x, std::span<const double> p) {
  const double pn = std::max(norm_inf(p), std::numeric_limits<double>::min());
  return cfg.fd_epsilon_scale * (1.0 + norm_inf(x)) / pn;
}

Vector jvp_fd(const Denoiser& den, const RedConfig& cfg, std::span<const double> x, std::span<const double> dx,
              std::span<const double> p) {
  require(x.size() == den.size() && p.size() == den.size() && dx.size() == den.size(), "jvp_fd: size mismatch");
  Vector out(p.size(), 0.0);
  if (norm_inf(p) == 0.0) return out;
  const double eps = fd_step(cfg, x, p);
  Vector xp(x.begin(), x.end());
  axpy(eps, p, xp);
  den.apply_into(xp, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - dx[i]) / eps;
  return out;
}

Vector jvp_fd(const Denoiser& den, const RedConfig& cfg, std::span<const double> x, std::span<const double> p) {
  if (norm_inf(p) == 0.0) return Vector(p.size(), 0.0);
  const Vector dx = den.apply(x);
  return jvp_fd(den, cfg, x, dx, p);
}

Vector reg_hessian_action(const Denoiser& den, const RedConfig& cfg, std::span<const double> x,
                          std::span<const double> p) {
  Vector jp(p.size());
  if (den.has_exact_jvp())
    den.jvp_into(x, p, jp);
  else
    jp = jvp_fd(den, cfg, x, p);
  for (std::size_t i = 0; i < jp.size(); ++i) jp[i] = (p[i] - jp[i]) / cfg.nu;
  return jp;
}

double trace_mc(const Denoiser& den, const RedConfig& cfg, std::span<const double> x, std::uint64_t seed) {
  cfg.validate();
  const Vector dx = den.apply(x);
  double total = 0.0;
  Vector probe(x.size());
  for (int k = 0; k < cfg.mc_probes; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    for (double& v : probe) v = normal(rng);
    total += dot(probe, jvp_fd(den, cfg, x, dx, probe));
  }
  return total / cfg.mc_probes;
}

double ridge_penalty_scalar(const Denoiser& den, const RedConfig& cfg, std::span<const double> x,
                            std::uint64_t seed) {
  const double tr = trace_mc(den, cfg, x, seed);
  return std::max(0.0, (1.0 - tr / static_cast<double>(x.size())) / cfg.nu);
}

}  // namespace dihs
