#include <algorithm>
#include <random>

#include "dihs/kronecker.hpp"
#include "dihs/sketch.hpp"

namespace dihs {

FftScoreEstimator::FftScoreEstimator(RadonGeometry geom, Eigen::MatrixXd mixing, Vector inv_cov_diag, int probes)
    : geom_(std::move(geom)), mixing_(std::move(mixing)), probes_(probes) {
  geom_.validate();
  require(probes >= 1, "score estimation: probes must be >= 1");
  const std::size_t nb = static_cast<std::size_t>(mixing_.rows());
  const std::size_t per_bin = geom_.n_rows();
  require(nb >= 1 && mixing_.cols() >= 1, "score estimation: empty mixing matrix");
  require(inv_cov_diag.size() == nb * per_bin, "score estimation: weights do not match geometry and bins");

  Eigen::VectorXd wbar(static_cast<Eigen::Index>(nb));
  for (std::size_t b = 0; b < nb; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per_bin; ++i) s += inv_cov_diag[b * per_bin + i];
    wbar(static_cast<Eigen::Index>(b)) = s / static_cast<double>(per_bin);
  }
  const Eigen::MatrixXd k = mixing_.transpose() * wbar.asDiagonal() * mixing_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  eigval_ = eig.eigenvalues().cwiseMax(0.0);
  eigvec_ = eig.eigenvectors();

  gram_ = std::make_shared<GramFft>(geom_);
  for (double& w : inv_cov_diag) w = std::sqrt(std::max(w, 0.0));
  auto radon = std::make_shared<FourierRadon>(geom_);
  b_ = std::make_shared<RowScaledMap>(std::move(inv_cov_diag), std::make_shared<KroneckerMap>(mixing_, radon));
}

ScoreEstimate FftScoreEstimator::estimate(double lambda, std::uint64_t seed) const {
  require(lambda >= 0.0 && std::isfinite(lambda), "score estimation: lambda must be >= 0");
  const std::size_t nm = static_cast<std::size_t>(mixing_.cols());
  const std::size_t nv = geom_.n_pixels(), np = geom_.n_views(), nd = geom_.n_detectors;
  const std::size_t nb = static_cast<std::size_t>(mixing_.rows());
  const std::size_t grid = gram_->grid_size(), cells = grid * grid;
  const auto transfer = gram_->transfer();

  // (mu_a T_k + lambda)^{-1/2} per eigen-material and frequency, zero on the
  // null space; 1 / cells normalizes the forward/backward FFT pair.
  double dmax = lambda;
  for (std::size_t a = 0; a < nm; ++a)
    for (double t : transfer) dmax = std::max(dmax, eigval_(static_cast<Eigen::Index>(a)) * t + lambda);
  const double floor = 1e-12 * dmax;
  std::vector<Vector> mult(nm, Vector(cells, 0.0));
  double n_eff = 0.0;
  for (std::size_t a = 0; a < nm; ++a)
    for (std::size_t i = 0; i < cells; ++i) {
      const double g = eigval_(static_cast<Eigen::Index>(a)) * transfer[i];
      const double d = g + lambda;
      if (d <= floor) continue;
      mult[a][i] = 1.0 / (std::sqrt(d) * static_cast<double>(cells));
      n_eff += g / d;
    }
  n_eff *= static_cast<double>(nv) / static_cast<double>(cells);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector est(np, 0.0);
  std::vector<Vector> z(nm, Vector(cells));
  ComplexBuffer buf(cells);
  Vector image(nv), x(nv * nm), y(b_->rows());
  for (int q = 0; q < probes_; ++q) {
    for (auto& zm : z)
      for (double& v : zm) v = normal(rng);
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t a = 0; a < nm; ++a) {
      for (std::size_t i = 0; i < cells; ++i) {
        double s = 0.0;
        for (std::size_t m = 0; m < nm; ++m)
          s += eigvec_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a)) * z[m][i];
        buf[i] = s;
      }
      gram_->fft().forward(buf);
      for (std::size_t i = 0; i < cells; ++i) buf[i] *= mult[a][i];
      gram_->fft().backward(buf);
      gram_->extract(buf, image);
      for (std::size_t m = 0; m < nm; ++m) {
        const double v = eigvec_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a));
        for (std::size_t j = 0; j < nv; ++j) x[m * nv + j] += v * image[j];
      }
    }
    b_->apply_into(x, y);
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t v = 0; v < np; ++v)
        for (std::size_t d = 0; d < nd; ++d) {
          const double r = y[(b * np + v) * nd + d];
          est[v] += r * r;
        }
  }

  double total = 0.0;
  for (double& e : est) {
    e = std::max(e / probes_, 0.0);
    total += e;
  }
  if (total > 0.0)
    for (double& e : est) e *= n_eff / total;

  ScoreEstimate out;
  out.scores = BlockScores{std::move(est), lambda, nd * nb};
  out.n_eff = n_eff;
  out.surrogate_row_accesses = static_cast<std::uint64_t>(probes_) * np * nd * nb;
  return out;
}

ScoreEstimate estimate_block_scores_fft(const RadonGeometry& geom, const Eigen::MatrixXd& mixing,
                                        std::span<const double> inv_cov_diag, double lambda, int probes,
                                        std::uint64_t seed) {
  FftScoreEstimator est(geom, mixing, Vector(inv_cov_diag.begin(), inv_cov_diag.end()), probes);
  return est.estimate(lambda, seed);
}

}  // namespace dihs
