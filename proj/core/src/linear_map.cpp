#include "dihs/linear_map.hpp"

#include <algorithm>
#include <numeric>

namespace dihs {

Vector LinearMap::apply(std::span<const double> x) const {
  Vector y(rows());
  apply_into(x, y);
  return y;
}

Vector LinearMap::adjoint(std::span<const double> y) const {
  Vector x(cols());
  adjoint_into(y, x);
  return x;
}

void LinearMap::check_apply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == cols(), "LinearMap::apply: input has " + std::to_string(x.size()) +
                                  " entries, expected " + std::to_string(cols()));
  require(y.size() == rows(), "LinearMap::apply: output has " + std::to_string(y.size()) +
                                  " entries, expected " + std::to_string(rows()));
}

void LinearMap::check_adjoint(std::span<const double> y, std::span<double> x) const {
  require(y.size() == rows(), "LinearMap::adjoint: input has " + std::to_string(y.size()) +
                                  " entries, expected " + std::to_string(rows()));
  require(x.size() == cols(), "LinearMap::adjoint: output has " + std::to_string(x.size()) +
                                  " entries, expected " + std::to_string(cols()));
}

// ---------------------------------------------------------------------------

const std::vector<std::size_t>& ViewBlockedMap::all_views() const {
  std::call_once(all_views_once_, [this] {
    all_views_.resize(n_views());
    std::iota(all_views_.begin(), all_views_.end(), std::size_t{0});
  });
  return all_views_;
}

void ViewBlockedMap::check_views(std::span<const std::size_t> views) const {
  for (std::size_t v : views) require(v < n_views(), "view index " + std::to_string(v) + " out of range");
}

void ViewBlockedMap::apply_into(std::span<const double> x, std::span<double> y) const {
  check_apply(x, y);
  apply_views(all_views(), x, y);
}

void ViewBlockedMap::adjoint_into(std::span<const double> y, std::span<double> x) const {
  check_adjoint(y, x);
  adjoint_views(all_views(), y, x);
}

// ---------------------------------------------------------------------------

CountingViewMap::CountingViewMap(std::shared_ptr<const ViewBlockedMap> inner)
    : inner_(std::move(inner)), per_view_(inner_->n_views()) {}

void CountingViewMap::record(std::span<const std::size_t> views) const {
  rows_ += views.size() * detectors() * channels();
  ++calls_;
  for (std::size_t v : views) per_view_[v].fetch_add(1, std::memory_order_relaxed);
}

void CountingViewMap::apply_views(std::span<const std::size_t> views, std::span<const double> x,
                                  std::span<double> y) const {
  record(views);
  inner_->apply_views(views, x, y);
}

void CountingViewMap::adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                                    std::span<double> x) const {
  record(views);
  inner_->adjoint_views(views, y, x);
}

std::vector<std::uint64_t> CountingViewMap::view_histogram() const {
  std::vector<std::uint64_t> h(per_view_.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = per_view_[i].load();
  return h;
}

void CountingViewMap::reset() {
  rows_ = 0;
  calls_ = 0;
  for (auto& c : per_view_) c = 0;
}

// ---------------------------------------------------------------------------

RowScaledMap::RowScaledMap(Vector weights, std::shared_ptr<const ViewBlockedMap> inner)
    : weights_(std::move(weights)), inner_(std::move(inner)) {
  require(weights_.size() == inner_->rows(), "RowScaledMap: weight count must equal operator rows");
}

void RowScaledMap::scale_selected(std::span<const std::size_t> views, std::span<double> y) const {
  const std::size_t nd = detectors(), np = n_views(), ns = views.size();
  for (std::size_t c = 0; c < channels(); ++c) {
    for (std::size_t k = 0; k < ns; ++k) {
      const double* w = weights_.data() + (c * np + views[k]) * nd;
      double* out = y.data() + (c * ns + k) * nd;
      for (std::size_t d = 0; d < nd; ++d) out[d] *= w[d];
    }
  }
}

void RowScaledMap::apply_views(std::span<const std::size_t> views, std::span<const double> x,
                               std::span<double> y) const {
  inner_->apply_views(views, x, y);
  scale_selected(views, y);
}

void RowScaledMap::adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                                 std::span<double> x) const {
  Vector scaled(y.begin(), y.end());
  scale_selected(views, scaled);
  inner_->adjoint_views(views, scaled, x);
}

// ---------------------------------------------------------------------------

DenseMap::DenseMap(std::size_t rows, std::size_t cols, Vector row_major)
    : rows_(rows), cols_(cols), a_(std::move(row_major)) {
  require(a_.size() == rows * cols, "DenseMap: storage size mismatch");
}

void DenseMap::apply_into(std::span<const double> x, std::span<double> y) const {
  check_apply(x, y);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    const double* row = a_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void DenseMap::adjoint_into(std::span<const double> y, std::span<double> x) const {
  check_adjoint(y, x);
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = a_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) x[j] += row[j] * y[i];
  }
}

Vector materialize(const LinearMap& map) {
  const std::size_t m = map.rows(), n = map.cols();
  Vector dense(m * n), e(n, 0.0), col(m);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    map.apply_into(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < m; ++i) dense[i * n + j] = col[i];
  }
  return dense;
}

AdjointCheck check_adjoint(const LinearMap& map, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  AdjointCheck out;
  Vector u(map.cols()), v(map.rows()), au(map.rows()), atv(map.cols());
  for (int p = 0; p < pairs; ++p) {
    for (double& a : u) a = normal(rng);
    for (double& a : v) a = normal(rng);
    map.apply_into(u, au);
    map.adjoint_into(v, atv);
    const double gap = std::abs(dot(au, v) - dot(u, atv));
    out.max_abs_gap = std::max(out.max_abs_gap, gap);
    out.max_scaled_gap = std::max(out.max_scaled_gap, gap / (norm2(u) * norm2(v) + 1.0));
    const double denom = norm2(au) * norm2(v);
    out.max_relative_gap = std::max(out.max_relative_gap, denom > 0.0 ? gap / denom : gap);
  }
  return out;
}

}  // namespace dihs
