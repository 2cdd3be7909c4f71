#include "dihs/kronecker.hpp"

#include <algorithm>

namespace dihs {

KroneckerMap::KroneckerMap(Eigen::MatrixXd mixing, std::shared_ptr<const ViewBlockedMap> radon)
    : mixing_(std::move(mixing)), radon_(std::move(radon)) {
  require(radon_ != nullptr, "KroneckerMap: null operator");
  require(radon_->channels() == 1, "KroneckerMap: right factor must be single-channel");
  require(mixing_.rows() >= 1 && mixing_.cols() >= 1, "KroneckerMap: empty mixing matrix");
}

void KroneckerMap::apply_views(std::span<const std::size_t> views, std::span<const double> x,
                               std::span<double> y) const {
  require(x.size() == cols() && y.size() == rows_for(views.size()), "KroneckerMap::apply_views: size mismatch");
  const std::size_t nv = radon_->cols(), nm = n_materials();
  const std::size_t block = radon_->rows_for(views.size());
  Vector mixed(nv);
  for (std::size_t b = 0; b < channels(); ++b) {
    std::fill(mixed.begin(), mixed.end(), 0.0);
    for (std::size_t m = 0; m < nm; ++m) {
      const double c = mixing_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m));
      if (c != 0.0) axpy(c, x.subspan(m * nv, nv), mixed);
    }
    radon_->apply_views(views, mixed, y.subspan(b * block, block));
  }
}

void KroneckerMap::adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                                 std::span<double> x) const {
  require(x.size() == cols() && y.size() == rows_for(views.size()), "KroneckerMap::adjoint_views: size mismatch");
  const std::size_t nv = radon_->cols(), nm = n_materials();
  const std::size_t block = radon_->rows_for(views.size());
  std::fill(x.begin(), x.end(), 0.0);
  Vector back(nv);
  for (std::size_t b = 0; b < channels(); ++b) {
    radon_->adjoint_views(views, y.subspan(b * block, block), back);
    for (std::size_t m = 0; m < nm; ++m) {
      const double c = mixing_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m));
      if (c != 0.0) axpy(c, back, x.subspan(m * nv, nv));
    }
  }
}

}  // namespace dihs
