#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "dihs/common.hpp"

namespace dihs {

/// Matrix-free linear operator y = A x with its adjoint x = A^T y.
///
/// Implementations are immutable after construction; `apply_into` and
/// `adjoint_into` may be called concurrently on distinct output buffers.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;

  /// y <- A x. `y` is overwritten.
  virtual void apply_into(std::span<const double> x, std::span<double> y) const = 0;
  /// x <- A^T y. `x` is overwritten.
  virtual void adjoint_into(std::span<const double> y, std::span<double> x) const = 0;

  Vector apply(std::span<const double> x) const;
  Vector adjoint(std::span<const double> y) const;

 protected:
  void check_apply(std::span<const double> x, std::span<double> y) const;
  void check_adjoint(std::span<const double> y, std::span<double> x) const;
};

/// A linear map whose rows are grouped by projection view.
///
/// Row layout is channel-major: row = (channel * n_views + view) * detectors + det.
/// `apply_views` evaluates only the rows of the selected views, written as
/// (channel * selected.size() + k) * detectors + det; `adjoint_views` is its
/// transpose. Views may be listed in any order but must be distinct.
class ViewBlockedMap : public LinearMap {
 public:
  virtual std::size_t n_views() const = 0;
  virtual std::size_t detectors() const = 0;
  virtual std::size_t channels() const { return 1; }

  std::size_t rows() const override { return channels() * n_views() * detectors(); }
  std::size_t rows_for(std::size_t n_selected) const { return channels() * n_selected * detectors(); }

  virtual void apply_views(std::span<const std::size_t> views, std::span<const double> x,
                           std::span<double> y) const = 0;
  virtual void adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                             std::span<double> x) const = 0;

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void adjoint_into(std::span<const double> y, std::span<double> x) const override;

 protected:
  void check_views(std::span<const std::size_t> views) const;
  const std::vector<std::size_t>& all_views() const;

 private:
  mutable std::vector<std::size_t> all_views_;
  mutable std::once_flag all_views_once_;
};

/// Decorator that counts every view-row touched by the wrapped operator, in
/// either direction. A "view-row" is one detector reading of one view in one
/// channel; a full apply of an N_d x N_p sinogram touches N_d * N_p of them.
class CountingViewMap final : public ViewBlockedMap {
 public:
  explicit CountingViewMap(std::shared_ptr<const ViewBlockedMap> inner);

  std::size_t cols() const override { return inner_->cols(); }
  std::size_t n_views() const override { return inner_->n_views(); }
  std::size_t detectors() const override { return inner_->detectors(); }
  std::size_t channels() const override { return inner_->channels(); }

  void apply_views(std::span<const std::size_t> views, std::span<const double> x,
                   std::span<double> y) const override;
  void adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                     std::span<double> x) const override;

  std::uint64_t row_accesses() const { return rows_.load(); }
  std::uint64_t calls() const { return calls_.load(); }
  /// Number of times each view has been touched since construction or reset().
  std::vector<std::uint64_t> view_histogram() const;
  void reset();

 private:
  void record(std::span<const std::size_t> views) const;

  std::shared_ptr<const ViewBlockedMap> inner_;
  mutable std::atomic<std::uint64_t> rows_{0};
  mutable std::atomic<std::uint64_t> calls_{0};
  mutable std::vector<std::atomic<std::uint64_t>> per_view_;
};

/// y = diag(w) A x.
class RowScaledMap final : public ViewBlockedMap {
 public:
  RowScaledMap(Vector weights, std::shared_ptr<const ViewBlockedMap> inner);

  std::size_t cols() const override { return inner_->cols(); }
  std::size_t n_views() const override { return inner_->n_views(); }
  std::size_t detectors() const override { return inner_->detectors(); }
  std::size_t channels() const override { return inner_->channels(); }

  void apply_views(std::span<const std::size_t> views, std::span<const double> x,
                   std::span<double> y) const override;
  void adjoint_views(std::span<const std::size_t> views, std::span<const double> y,
                     std::span<double> x) const override;

  std::span<const double> weights() const { return weights_; }

 private:
  void scale_selected(std::span<const std::size_t> views, std::span<double> y) const;

  Vector weights_;
  std::shared_ptr<const ViewBlockedMap> inner_;
};

/// Dense matrix as a LinearMap (used for oracles and small problems).
class DenseMap final : public LinearMap {
 public:
  DenseMap(std::size_t rows, std::size_t cols, Vector row_major);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void adjoint_into(std::span<const double> y, std::span<double> x) const override;

 private:
  std::size_t rows_, cols_;
  Vector a_;
};

/// Materializes any LinearMap column by column (row-major result). Test and
/// oracle use only: costs cols() applies.
Vector materialize(const LinearMap& map);

/// Result of the randomized adjoint identity check.
struct AdjointCheck {
  double max_abs_gap = 0.0;       ///< max |<Au,v> - <u,A^T v>|
  double max_scaled_gap = 0.0;    ///< max gap / (|u| |v| + 1)
  double max_relative_gap = 0.0;  ///< max gap / (|Au| |v|)
};

/// Draws `pairs` Gaussian (u, v) pairs and records the adjoint mismatch.
AdjointCheck check_adjoint(const LinearMap& map, int pairs, std::uint64_t seed);

}  // namespace dihs
