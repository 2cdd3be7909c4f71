#pragma once

#include <Eigen/Dense>

#include "dihs/linear_map.hpp"

namespace dihs {

/// A = C (x) R acting on x = vec(X), X = [x_1 ... x_Nm] (material-major):
/// A x = vec(R X C^T). Output channel b is the sinogram of sum_m C(b,m) x_m.
class KroneckerMap final : public ViewBlockedMap {
 public:
  KroneckerMap(Eigen::MatrixXd mixing, std::shared_ptr<const ViewBlockedMap> radon);

  std::size_t cols() const override { return radon_->cols() * n_materials(); }
  std::size_t n_views() const override { return radon_->n_views(); }
  std::size_t detectors() const override { return radon_->detectors(); }
  std::size_t channels() const override { return static_cast<std::size_t>(mixing_.rows()); }
  std::size_t n_materials() const { return static_cast<std::size_t>(mixing_.cols()); }

  void apply_views(std::span<const std::size_t> views, std::span<const double> x,
                   std::span<double> y) const override;
  void adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                     std::span<double> x) const override;

  const Eigen::MatrixXd& mixing() const { return mixing_; }
  const ViewBlockedMap& radon() const { return *radon_; }

 private:
  Eigen::MatrixXd mixing_;
  std::shared_ptr<const ViewBlockedMap> radon_;
};

}  // namespace dihs
