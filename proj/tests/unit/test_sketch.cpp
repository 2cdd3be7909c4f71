#include <gtest/gtest.h>

#include "dihs/kronecker.hpp"
#include "dihs/sketch.hpp"
#include "dihs/spectral_model.hpp"
#include "test_support.hpp"

namespace dihs {
namespace {

using testing::gaussian_vector;

Eigen::MatrixXd random_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  const Vector v = gaussian_vector(static_cast<std::size_t>(m * n), seed);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), m, n);
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  double sa = 0.0, sb = 0.0, tv = 0.0;
  for (double v : a) sa += v;
  for (double v : b) sb += v;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] / sa - b[i] / sb);
  return 0.5 * tv;
}

TEST(RidgeScores, IdentityExamples) {
  const Eigen::VectorXd l0 = ridge_scores_exact(Eigen::MatrixXd::Identity(2, 2), 0.0);
  EXPECT_NEAR(l0(0), 1.0, 1e-14);
  EXPECT_NEAR(l0(1), 1.0, 1e-14);
  const Eigen::VectorXd l1 = ridge_scores_exact(Eigen::MatrixXd::Identity(2, 2), 1.0);
  EXPECT_NEAR(l1(0), 0.5, 1e-14);
  EXPECT_NEAR(l1(1), 0.5, 1e-14);
}

TEST(RidgeScores, MatchDirectSolve) {
  const Eigen::MatrixXd b = random_matrix(6, 3, 1);
  const Eigen::VectorXd l = ridge_scores_exact(b, 0.3);
  const Eigen::MatrixXd m = b.transpose() * b + 0.3 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const Eigen::VectorXd a = b.row(i).transpose();
    EXPECT_NEAR(l(i), a.dot(ldlt.solve(a)), 1e-10);
    EXPECT_GE(l(i), 0.0);
    EXPECT_LE(l(i), 1.0);
  }
  EXPECT_NEAR(l.sum(), effective_dimension(b, 0.3), 1e-12);
}

TEST(RidgeScores, RankDeficientUsesPseudoInverse) {
  Eigen::MatrixXd b = random_matrix(5, 3, 2);
  b.col(2) = b.col(0) + b.col(1);
  const Eigen::VectorXd l = ridge_scores_exact(b, 0.0);
  EXPECT_NEAR(l.sum(), 2.0, 1e-10);
  const Eigen::MatrixXd pinv = (b.transpose() * b).completeOrthogonalDecomposition().pseudoInverse();
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(l(i), b.row(i) * pinv * b.row(i).transpose(), 1e-10);
}

TEST(EffectiveDimension, ClosedForms) {
  EXPECT_NEAR(effective_dimension(random_matrix(10, 4, 3), 0.0), 4.0, 1e-12);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  EXPECT_NEAR(effective_dimension(d, 1.0), 1.3, 1e-14);
  EXPECT_LT(effective_dimension(d, 1e12), 1e-11);
  const Eigen::MatrixXd b = random_matrix(12, 5, 4);
  double prev = 1e9;
  for (double lam : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    const double n = effective_dimension(b, lam);
    EXPECT_LT(n, prev);
    prev = n;
  }
}

TEST(BlockScores, SumsContiguousBlocks) {
  const Vector rows = {0.5, 0.5, 0.3, 0.7};
  const BlockScores s = block_scores(rows, 2);
  ASSERT_EQ(s.per_block.size(), 2u);
  EXPECT_DOUBLE_EQ(s.per_block[0], 1.0);
  EXPECT_DOUBLE_EQ(s.per_block[1], 1.0);
  const BlockScores eq = block_scores(Vector(12, 0.25), 3);
  for (double v : eq.per_block) EXPECT_DOUBLE_EQ(v, 0.75);
  const Vector r = gaussian_vector(60, 5);
  double tot = 0.0;
  for (double v : r) tot += v;
  EXPECT_NEAR(block_scores(r, 6).total(), tot, 1e-12);
  EXPECT_THROW(block_scores(Vector(7, 1.0), 2), ContractError);
}

TEST(BlockScores, ViewBlocksSumAcrossChannels) {
  // 2 channels, 3 views, 2 detectors: row = (ch * 3 + v) * 2 + d
  Vector rows(12);
  for (std::size_t i = 0; i < 12; ++i) rows[i] = static_cast<double>(i);
  const BlockScores s = view_block_scores(rows, 3, 2, 2);
  EXPECT_DOUBLE_EQ(s.per_block[0], 0 + 1 + 6 + 7);
  EXPECT_DOUBLE_EQ(s.per_block[2], 4 + 5 + 10 + 11);
}

TEST(MinSketchSize, FormulaValues) {
  EXPECT_EQ(min_sketch_size(3.0, 16, 0.1, 0.5), 95u);
  EXPECT_EQ(min_sketch_size(0.0, 16, 0.1, 0.5), 0u);
  EXPECT_GT(min_sketch_size(3.0, 16, 0.1, 0.25), min_sketch_size(3.0, 16, 0.1, 0.5));
  EXPECT_THROW(min_sketch_size(3.0, 16, 1.5, 0.5), ContractError);
}

TEST(DrawSketch, ProbabilitiesAndReproducibility) {
  const BlockScores s{{1.0, 3.0, 0.0, 4.0}, 0.0, 1};
  const SketchPlan a = draw_sketch(s, 50, 7), b = draw_sketch(s, 50, 7);
  EXPECT_NEAR(a.probabilities[1], 3.0 / 8.0, 1e-15);
  double sum = 0.0;
  std::size_t draws = 0;
  for (double p : a.probabilities) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  for (const auto& [v, c] : a.sampled_blocks) {
    EXPECT_NE(v, 2u);
    draws += c;
  }
  EXPECT_EQ(draws, 50u);
  EXPECT_EQ(a.sampled_blocks, b.sampled_blocks);
  for (double w : a.rescale()) EXPECT_TRUE(std::isfinite(w));
}

TEST(DrawSketch, DegenerateDistributionRecombinesExactly) {
  auto radon = std::make_shared<RayRadon>(RadonGeometry::parallel(8, 5));
  const BlockScores s{{0.0, 0.0, 2.0, 0.0, 0.0}, 0.0, radon->detectors()};
  const SketchPlan plan = draw_sketch(s, 9, 3);
  ASSERT_EQ(plan.sampled_blocks.size(), 1u);
  EXPECT_EQ(plan.sampled_blocks[0].second, 9u);
  const Vector x = gaussian_vector(64, 4);
  const Vector g = sketched_sqrt_apply(plan, radon, x);
  Vector ref(radon->detectors());
  const std::vector<std::size_t> v = {2};
  radon->apply_views(v, x, ref);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(g[i], ref[i], 1e-12 * (1 + std::abs(ref[i])));
}

TEST(DrawSketch, UnbiasedHessianEstimate) {
  const auto geom = RadonGeometry::parallel(16, 12);
  auto b = std::make_shared<RayRadon>(geom);
  const BlockScores uniform{Vector(12, 1.0), 0.0, geom.n_detectors};
  const Vector v = gaussian_vector(256, 5);
  const Vector ref = b->adjoint(b->apply(v));
  Vector mean(256, 0.0);
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    SketchedMap g(draw_sketch(uniform, 12, 1000 + t), b);
    axpy(1.0 / trials, g.adjoint(g.apply(v)), mean);
  }
  EXPECT_LE(testing::rel_l2(mean, ref), 0.05);
}

TEST(DrawSketch, UnbiasednessConvergesAtMonteCarloRate) {
  auto b = std::make_shared<DenseMap>(40, 6, gaussian_vector(240, 6));
  // treat each row as its own view via a tiny view-blocked wrapper
  struct Rows final : ViewBlockedMap {
    std::shared_ptr<DenseMap> a;
    explicit Rows(std::shared_ptr<DenseMap> m) : a(std::move(m)) {}
    std::size_t cols() const override { return a->cols(); }
    std::size_t n_views() const override { return a->rows(); }
    std::size_t detectors() const override { return 1; }
    void apply_views(std::span<const std::size_t> views, std::span<const double> x, std::span<double> y) const override {
      const Vector full = a->apply(x);
      for (std::size_t k = 0; k < views.size(); ++k) y[k] = full[views[k]];
    }
    void adjoint_views(std::span<const std::size_t> views, std::span<const double> y, std::span<double> x) const override {
      Vector full(a->rows(), 0.0);
      for (std::size_t k = 0; k < views.size(); ++k) full[views[k]] = y[k];
      a->adjoint_into(full, x);
    }
  };
  auto rows = std::make_shared<Rows>(b);
  const Eigen::MatrixXd bm = testing::to_eigen(*b);
  const Eigen::MatrixXd h = bm.transpose() * bm;
  const Eigen::VectorXd lev = ridge_scores_exact(bm, 0.0);
  const BlockScores scores = block_scores(Vector(lev.data(), lev.data() + lev.size()), 1);
  std::vector<double> ks, errs;
  for (int k : {10, 40, 160, 640}) {
    double err = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(6, 6);
      for (int t = 0; t < k; ++t) {
        const Eigen::MatrixXd g = testing::to_eigen(SketchedMap(draw_sketch(scores, 8, 7919u * r + t), rows));
        mean += g.transpose() * g / k;
      }
      err += (mean - h).norm() / h.norm() / reps;
    }
    ks.push_back(std::log(k));
    errs.push_back(std::log(err));
  }
  const double slope = (errs.back() - errs.front()) / (ks.back() - ks.front());
  EXPECT_NEAR(slope, -0.5, 0.15);
}

TEST(SketchedMap, TouchesOnlySampledViews) {
  auto counted = std::make_shared<CountingViewMap>(std::make_shared<RayRadon>(RadonGeometry::parallel(16, 30)));
  const BlockScores s{Vector(30, 1.0), 0.0, counted->detectors()};
  const SketchPlan plan = draw_sketch(s, 10, 8);
  SketchedMap g(plan, counted);
  const Vector x = gaussian_vector(256, 9);
  g.adjoint(g.apply(x));
  const auto hist = counted->view_histogram();
  const auto views = plan.views();
  for (std::size_t v = 0; v < 30; ++v) {
    const bool sampled = std::find(views.begin(), views.end(), v) != views.end();
    EXPECT_EQ(hist[v], sampled ? 2u : 0u) << "view " << v;
  }
  EXPECT_EQ(counted->row_accesses(), 2 * views.size() * counted->detectors());
}

// --- FFT score estimation against dense oracles ---------------------------

struct DenseSetup {
  RadonGeometry geom = RadonGeometry::parallel(16, 12);
  Eigen::MatrixXd mixing = Eigen::MatrixXd::Ones(1, 1);
  Vector weights;
  Eigen::MatrixXd b;

  DenseSetup() {
    weights.assign(geom.n_rows(), 1.0);
    KroneckerMap a(mixing, std::make_shared<RayRadon>(geom));
    b = testing::to_eigen(a);
  }
  Vector exact(double lambda) const {
    const Eigen::VectorXd l = ridge_scores_exact(b, lambda);
    return view_block_scores(Vector(l.data(), l.data() + l.size()), geom.n_views(), geom.n_detectors, 1).per_block;
  }
};

TEST(ScoreEstimation, MatchesExactScoresInDistribution) {
  const DenseSetup s;
  const ScoreEstimate est = estimate_block_scores_fft(s.geom, s.mixing, s.weights, 0.1, 32, 1);
  EXPECT_LE(total_variation(est.scores.per_block, s.exact(0.1)), 0.15);
  EXPECT_NEAR(est.scores.total(), est.n_eff, 1e-9 * est.n_eff);
  for (double v : est.scores.per_block) EXPECT_GE(v, 0.0);
  EXPECT_EQ(est.surrogate_row_accesses, 32u * 12u * s.geom.n_detectors);
}

TEST(ScoreEstimation, LargeRidgeTendsToRowNorms) {
  const DenseSetup s;
  Vector norms(12, 0.0);
  for (Eigen::Index i = 0; i < s.b.rows(); ++i)
    norms[static_cast<std::size_t>(i) / s.geom.n_detectors] += s.b.row(i).squaredNorm();
  const ScoreEstimate est = estimate_block_scores_fft(s.geom, s.mixing, s.weights, 1e8, 32, 2);
  EXPECT_LE(total_variation(est.scores.per_block, norms), 0.05);
}

TEST(ScoreEstimation, SeedsAgree) {
  const DenseSetup s;
  const ScoreEstimate a = estimate_block_scores_fft(s.geom, s.mixing, s.weights, 0.1, 16, 3);
  const ScoreEstimate b = estimate_block_scores_fft(s.geom, s.mixing, s.weights, 0.1, 16, 4);
  EXPECT_LE(total_variation(a.scores.per_block, b.scores.per_block), 0.1);
}

TEST(ScoreEstimation, MultiBinNonUniformWeights) {
  RadonGeometry geom = RadonGeometry::parallel(16, 12);
  Eigen::MatrixXd c(3, 2);
  c << 1.0, 0.3, 0.6, 0.7, 0.3, 1.1;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  Vector w(3 * geom.n_rows());
  for (double& v : w) v = uni(rng);
  SpectralMeasurement meas;
  meas.inv_cov_diag = w;
  meas.log_data.assign(w.size(), 0.0);
  auto a = std::make_shared<KroneckerMap>(c, std::make_shared<RayRadon>(geom));
  const Eigen::MatrixXd b = testing::to_eigen(*sqrt_hessian(meas, a));
  const Eigen::VectorXd l = ridge_scores_exact(b, 0.5);
  const Vector exact = view_block_scores(Vector(l.data(), l.data() + l.size()), 12, geom.n_detectors, 3).per_block;
  const ScoreEstimate est = estimate_block_scores_fft(geom, c, w, 0.5, 32, 6);
  EXPECT_LE(total_variation(est.scores.per_block, exact), 0.15);
}

}  // namespace
}  // namespace dihs
