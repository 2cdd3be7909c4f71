#include <benchmark/benchmark.h>

#include <random>

#include "dihs/denoisers.hpp"
#include "dihs/kronecker.hpp"
#include "dihs/radon.hpp"
#include "dihs/red.hpp"
#include "dihs/sketch.hpp"

namespace {

using namespace dihs;

Vector noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// side, views = side
template <class Op>
void BM_Project(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Op op(RadonGeometry::parallel(side, side));
  const Vector x = noise(op.cols(), 1);
  Vector y(op.rows());
  for (auto _ : state) {
    op.apply_into(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * op.rows()));
}
BENCHMARK(BM_Project<RayRadon>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Project<FourierRadon>)->Arg(32)->Arg(64)->Arg(128);

template <class Op>
void BM_Backproject(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Op op(RadonGeometry::parallel(side, side));
  const Vector y = noise(op.rows(), 2);
  Vector x(op.cols());
  for (auto _ : state) {
    op.adjoint_into(y, x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Backproject<RayRadon>)->Arg(64);
BENCHMARK(BM_Backproject<FourierRadon>)->Arg(64);

void BM_GramFft(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const GramFft gram(RadonGeometry::parallel(side, side));
  const Vector x = noise(gram.cols(), 3);
  Vector y(gram.rows());
  for (auto _ : state) {
    gram.apply_into(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_GramFft)->Arg(64)->Arg(128);

// Sketched vs full forward on the 3-material desk shape; arg = sampled views.
void BM_SketchedApply(benchmark::State& state) {
  const auto geom = RadonGeometry::parallel(64, 60);
  Eigen::MatrixXd c(3, 3);
  c << 0.2, 0.5, 0.4, 0.18, 0.3, 0.6, 0.16, 0.2, 0.3;
  auto b = std::make_shared<KroneckerMap>(c, std::make_shared<RayRadon>(geom));
  const BlockScores scores{Vector(60, 1.0), 0.0, geom.n_detectors};
  const SketchedMap g(draw_sketch(scores, static_cast<std::size_t>(state.range(0)), 4), b);
  const Vector x = noise(g.cols(), 5);
  Vector y(g.rows());
  for (auto _ : state) {
    g.apply_into(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_SketchedApply)->Arg(20)->Arg(60);

void BM_GaussianBlur(benchmark::State& state) {
  const ImageLayout layout{static_cast<std::size_t>(state.range(0)), 3};
  const GaussianBlurDenoiser blur(layout, 1.0);
  const Vector x = noise(layout.size(), 6);
  Vector y(layout.size());
  for (auto _ : state) {
    blur.apply_into(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_GaussianBlur)->Arg(64)->Arg(256);

void BM_TraceMc(benchmark::State& state) {
  const ImageLayout layout{64, 3};
  const GaussianBlurDenoiser blur(layout, 1.0);
  RedConfig cfg;
  cfg.mc_probes = static_cast<int>(state.range(0));
  const Vector x = noise(layout.size(), 7);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(trace_mc(blur, cfg, x, seed++));
}
BENCHMARK(BM_TraceMc)->Arg(1)->Arg(16);

void BM_FftScores(benchmark::State& state) {
  const auto geom = RadonGeometry::parallel(64, 60);
  Eigen::MatrixXd c(3, 3);
  c << 0.2, 0.5, 0.4, 0.18, 0.3, 0.6, 0.16, 0.2, 0.3;
  Vector w(3 * geom.n_rows());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 100.0 + static_cast<double>(i % 97);
  const FftScoreEstimator est(geom, c, w, static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(est.estimate(10.0, seed++).n_eff);
}
BENCHMARK(BM_FftScores)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
