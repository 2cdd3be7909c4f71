#include <limits>

#include "dihs/sketch.hpp"

namespace dihs {

namespace {

struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::Index rank = 0;
};

Svd thin_svd(const Eigen::MatrixXd& b) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
  Svd out{svd.matrixU(), svd.singularValues(), 0};
  const double cutoff = out.s.size() == 0 ? 0.0
                                          : out.s(0) * std::numeric_limits<double>::epsilon() *
                                                static_cast<double>(std::max(b.rows(), b.cols()));
  while (out.rank < out.s.size() && out.s(out.rank) > cutoff) ++out.rank;
  return out;
}

double shrink(double s, double lambda) { return s * s / (s * s + lambda); }

}  // namespace

Eigen::VectorXd ridge_scores_exact(const Eigen::MatrixXd& b, double lambda) {
  require(lambda >= 0.0, "ridge_scores_exact: lambda must be >= 0");
  const Svd svd = thin_svd(b);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(b.rows());
  for (Eigen::Index j = 0; j < svd.rank; ++j) l += shrink(svd.s(j), lambda) * svd.u.col(j).cwiseAbs2();
  return l;
}

double effective_dimension(const Eigen::MatrixXd& b, double lambda) {
  require(lambda >= 0.0, "effective_dimension: lambda must be >= 0");
  const Svd svd = thin_svd(b);
  double n = 0.0;
  for (Eigen::Index j = 0; j < svd.rank; ++j) n += shrink(svd.s(j), lambda);
  return n;
}

double BlockScores::total() const {
  double s = 0.0;
  for (double v : per_block) s += v;
  return s;
}

BlockScores block_scores(std::span<const double> row_scores, std::size_t block_size, double ridge) {
  require(block_size >= 1 && row_scores.size() % block_size == 0,
          "block_scores: " + std::to_string(row_scores.size()) + " rows are not a multiple of block size " +
              std::to_string(block_size));
  BlockScores out{Vector(row_scores.size() / block_size, 0.0), ridge, block_size};
  for (std::size_t i = 0; i < row_scores.size(); ++i) out.per_block[i / block_size] += row_scores[i];
  return out;
}

BlockScores view_block_scores(std::span<const double> row_scores, std::size_t n_views, std::size_t detectors,
                              std::size_t channels, double ridge) {
  require(row_scores.size() == n_views * detectors * channels, "view_block_scores: size mismatch");
  BlockScores out{Vector(n_views, 0.0), ridge, detectors * channels};
  for (std::size_t ch = 0; ch < channels; ++ch)
    for (std::size_t v = 0; v < n_views; ++v)
      for (std::size_t d = 0; d < detectors; ++d) out.per_block[v] += row_scores[(ch * n_views + v) * detectors + d];
  return out;
}

std::size_t min_sketch_size(double sum_block_scores, std::size_t n_cols, double delta, double epsilon) {
  require(delta > 0.0 && delta < 1.0 && epsilon > 0.0 && epsilon < 1.0,
          "min_sketch_size: delta and epsilon must lie in (0, 1)");
  require(sum_block_scores >= 0.0 && n_cols >= 1, "min_sketch_size: invalid arguments");
  if (sum_block_scores == 0.0) return 0;
  const double s = 4.0 * sum_block_scores * std::log(4.0 * static_cast<double>(n_cols) / (delta * epsilon * epsilon));
  return static_cast<std::size_t>(std::ceil(s));
}

}  // namespace dihs
