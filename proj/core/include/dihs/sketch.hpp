#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <utility>

#include "dihs/linear_map.hpp"
#include "dihs/radon.hpp"

namespace dihs {

/// Per-view block partial leverage scores.
struct BlockScores {
  Vector per_block;
  double ridge = 0.0;
  std::size_t block_size = 0;

  double total() const;
};

/// l_i = sum_j s_j^2 / (s_j^2 + lambda) u_ij^2 from a thin SVD of B. Singular
/// values below the numerical rank cutoff are dropped (pseudo-inverse).
Eigen::VectorXd ridge_scores_exact(const Eigen::MatrixXd& b, double lambda);

/// sum_j s_j^2 / (s_j^2 + lambda)
double effective_dimension(const Eigen::MatrixXd& b, double lambda);

/// Contiguous block sums. Throws ContractError if the length is not a
/// multiple of block_size.
BlockScores block_scores(std::span<const double> row_scores, std::size_t block_size, double ridge = 0.0);

/// Block sums for the channel-major row layout of a ViewBlockedMap: the score
/// of view v adds every detector of v in every channel.
BlockScores view_block_scores(std::span<const double> row_scores, std::size_t n_views, std::size_t detectors,
                              std::size_t channels, double ridge = 0.0);

/// ceil(4 sum_l log(4 n_cols / (delta eps^2))); 0 when sum_l is 0.
std::size_t min_sketch_size(double sum_block_scores, std::size_t n_cols, double delta, double epsilon);

/// Views drawn i.i.d. with replacement. A view drawn c times is stored once
/// with multiplicity c; its rows are applied once with weight sqrt(c / (s p)),
/// which gives the same G^T G as c copies each weighted 1/sqrt(s p).
struct SketchPlan {
  std::vector<std::pair<std::size_t, std::size_t>> sampled_blocks;  // (view, multiplicity), view ascending
  Vector probabilities;
  std::size_t s_blocks = 0;

  std::vector<std::size_t> views() const;
  /// Per-draw weight 1 / sqrt(s p_i) for each entry of sampled_blocks.
  Vector rescale() const;
  /// Row weight sqrt(c / (s p_i)) for each entry of sampled_blocks.
  Vector block_weights() const;
};

/// p_i = l_i / sum l (uniform when every score is zero), then s_blocks draws.
SketchPlan draw_sketch(const BlockScores& scores, std::size_t s_blocks, std::uint64_t seed);

/// Every view once with weight 1, so the sketched operator equals B.
SketchPlan full_plan(std::size_t n_views);

/// G = S B, touching only the sampled views of B.
class SketchedMap final : public LinearMap {
 public:
  SketchedMap(SketchPlan plan, std::shared_ptr<const ViewBlockedMap> b);

  std::size_t rows() const override { return b_->rows_for(views_.size()); }
  std::size_t cols() const override { return b_->cols(); }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void adjoint_into(std::span<const double> y, std::span<double> x) const override;

  const SketchPlan& plan() const { return plan_; }

 private:
  void scale_rows(std::span<double> y) const;

  SketchPlan plan_;
  std::shared_ptr<const ViewBlockedMap> b_;
  std::vector<std::size_t> views_;
  Vector weights_;
};

Vector sketched_sqrt_apply(const SketchPlan& plan, std::shared_ptr<const ViewBlockedMap> b, std::span<const double> v);

struct ScoreEstimate {
  BlockScores scores;
  double n_eff = 0.0;                        ///< effective dimension of the surrogate
  std::uint64_t surrogate_row_accesses = 0;  ///< view-rows of the Fourier projector touched
};

/// Block scores of B = Sigma^{-1/2} (C (x) R) from a Kronecker-circulant
/// surrogate of B^T B: (C^T W C) (x) Gram, with W the per-bin mean weight.
/// Each Gaussian probe z on the padded grid is mapped through
/// (surrogate + lambda)^{-1/2} in the joint material-eigen / Fourier basis,
/// cropped to the image, pushed through B built on the Fourier projector with
/// the exact weights, and its squared rows summed per view.
///
/// Views whose weights differ strongly from the bin mean come out
/// over-weighted (the crop smooths away the angular detail a per-view
/// surrogate would need); sampling stays unbiased, only its variance grows.
class FftScoreEstimator {
 public:
  /// `mixing` is N_b x N_m; `inv_cov_diag` follows the channel-major row layout.
  FftScoreEstimator(RadonGeometry geom, Eigen::MatrixXd mixing, Vector inv_cov_diag, int probes);

  ScoreEstimate estimate(double lambda, std::uint64_t seed) const;

 private:
  RadonGeometry geom_;
  Eigen::MatrixXd mixing_;
  int probes_;
  std::shared_ptr<const GramFft> gram_;
  std::shared_ptr<const ViewBlockedMap> b_;  // Sigma^{-1/2} (C (x) FourierRadon)
  Eigen::MatrixXd eigvec_;                   // of C^T W C
  Eigen::VectorXd eigval_;
};

ScoreEstimate estimate_block_scores_fft(const RadonGeometry& geom, const Eigen::MatrixXd& mixing,
                                        std::span<const double> inv_cov_diag, double lambda, int probes,
                                        std::uint64_t seed);

}  // namespace dihs
