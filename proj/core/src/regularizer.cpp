#include "dihs/regularizer.hpp"

namespace dihs {

RedRegularizer::RedRegularizer(std::shared_ptr<const Denoiser> den, RedConfig cfg)
    : den_(std::move(den)), cfg_(cfg) {
  require(den_ != nullptr, "RedRegularizer: null denoiser");
  cfg_.validate();
}

Regularizer::Eval RedRegularizer::evaluate(std::span<const double> x, bool with_gradient) const {
  require(x.size() == size(), "RedRegularizer: size mismatch");
  Vector dx = den_->apply(x);
  Eval out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dx[i] = (x[i] - dx[i]) / cfg_.nu;
    out.value += 0.5 * x[i] * dx[i];
  }
  if (with_gradient) out.gradient = std::move(dx);
  return out;
}

namespace {

class RedLinearization final : public Regularizer::Linearization {
 public:
  RedLinearization(const Denoiser& den, const RedConfig& cfg, std::span<const double> x)
      : den_(den), cfg_(cfg), x_(x.begin(), x.end()) {
    if (!den.has_exact_jvp()) dx_ = den.apply(x);
  }

  void apply(std::span<const double> p, std::span<double> out) const override {
    Vector jp(p.size());
    if (den_.has_exact_jvp())
      den_.jvp_into(x_, p, jp);
    else
      jp = jvp_fd(den_, cfg_, x_, dx_, p);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = (p[i] - jp[i]) / cfg_.nu;
  }

 private:
  const Denoiser& den_;
  RedConfig cfg_;
  Vector x_, dx_;
};

class LaplacianLinearization final : public Regularizer::Linearization {
 public:
  explicit LaplacianLinearization(const QuadraticSmoothness& q) : q_(q) {}
  void apply(std::span<const double> p, std::span<double> out) const override { q_.laplacian(p, out); }

 private:
  const QuadraticSmoothness& q_;
};

}  // namespace

std::unique_ptr<Regularizer::Linearization> RedRegularizer::linearize(std::span<const double> x) const {
  return std::make_unique<RedLinearization>(*den_, cfg_, x);
}

double RedRegularizer::ridge_scalar(std::span<const double> x, std::uint64_t seed) const {
  return ridge_penalty_scalar(*den_, cfg_, x, seed);
}

QuadraticSmoothness::QuadraticSmoothness(ImageLayout layout, double beta) : layout_(layout), beta_(beta) {
  require(layout.side >= 1 && layout.channels >= 1, "QuadraticSmoothness: empty layout");
  require(beta >= 0.0 && std::isfinite(beta), "QuadraticSmoothness: beta must be >= 0");
}

void QuadraticSmoothness::laplacian(std::span<const double> p, std::span<double> out) const {
  require(p.size() == size() && out.size() == size(), "QuadraticSmoothness: size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  if (beta_ == 0.0) return;
  const std::size_t n = layout_.side;
  for (std::size_t ch = 0; ch < layout_.channels; ++ch) {
    const double* a = p.data() + ch * layout_.pixels();
    double* o = out.data() + ch * layout_.pixels();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const std::size_t i = r * n + c;
        if (c + 1 < n) {
          const double d = beta_ * (a[i] - a[i + 1]);
          o[i] += d;
          o[i + 1] -= d;
        }
        if (r + 1 < n) {
          const double d = beta_ * (a[i] - a[i + n]);
          o[i] += d;
          o[i + n] -= d;
        }
      }
  }
}

Regularizer::Eval QuadraticSmoothness::evaluate(std::span<const double> x, bool with_gradient) const {
  Eval out;
  Vector g(size());
  laplacian(x, g);
  out.value = 0.5 * dot(x, g);
  if (with_gradient) out.gradient = std::move(g);
  return out;
}

std::unique_ptr<Regularizer::Linearization> QuadraticSmoothness::linearize(std::span<const double>) const {
  return std::make_unique<LaplacianLinearization>(*this);
}

double QuadraticSmoothness::ridge_scalar(std::span<const double>, std::uint64_t) const {
  // mean vertex degree of the 4-neighbour grid graph
  const double n = static_cast<double>(layout_.side);
  const double edges = 2.0 * n * (n - 1.0);
  return beta_ * 2.0 * edges / (n * n);
}

}  // namespace dihs
