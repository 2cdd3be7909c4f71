#include <map>
#include <random>

#include "dihs/sketch.hpp"

namespace dihs {

std::vector<std::size_t> SketchPlan::views() const {
  std::vector<std::size_t> v;
  v.reserve(sampled_blocks.size());
  for (const auto& [view, count] : sampled_blocks) v.push_back(view);
  return v;
}

Vector SketchPlan::rescale() const {
  Vector w;
  w.reserve(sampled_blocks.size());
  for (const auto& [view, count] : sampled_blocks)
    w.push_back(1.0 / std::sqrt(static_cast<double>(s_blocks) * probabilities[view]));
  return w;
}

Vector SketchPlan::block_weights() const {
  Vector w = rescale();
  for (std::size_t k = 0; k < w.size(); ++k) w[k] *= std::sqrt(static_cast<double>(sampled_blocks[k].second));
  return w;
}

SketchPlan draw_sketch(const BlockScores& scores, std::size_t s_blocks, std::uint64_t seed) {
  require(s_blocks >= 1, "draw_sketch: s_blocks must be >= 1");
  require(!scores.per_block.empty(), "draw_sketch: no blocks");
  SketchPlan plan;
  plan.s_blocks = s_blocks;
  const double total = scores.total();
  plan.probabilities.resize(scores.per_block.size());
  for (std::size_t i = 0; i < plan.probabilities.size(); ++i) {
    require(scores.per_block[i] >= 0.0 && std::isfinite(scores.per_block[i]), "draw_sketch: scores must be >= 0");
    plan.probabilities[i] = total > 0.0 ? scores.per_block[i] / total
                                        : 1.0 / static_cast<double>(plan.probabilities.size());
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(plan.probabilities.begin(), plan.probabilities.end());
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t k = 0; k < s_blocks; ++k) ++counts[pick(rng)];
  plan.sampled_blocks.assign(counts.begin(), counts.end());
  return plan;
}

SketchPlan full_plan(std::size_t n_views) {
  require(n_views >= 1, "full_plan: no views");
  SketchPlan plan;
  plan.s_blocks = n_views;
  plan.probabilities.assign(n_views, 1.0 / static_cast<double>(n_views));
  for (std::size_t v = 0; v < n_views; ++v) plan.sampled_blocks.emplace_back(v, 1);
  return plan;
}

SketchedMap::SketchedMap(SketchPlan plan, std::shared_ptr<const ViewBlockedMap> b)
    : plan_(std::move(plan)), b_(std::move(b)), views_(plan_.views()), weights_(plan_.block_weights()) {
  require(plan_.probabilities.size() == b_->n_views(), "SketchedMap: plan does not match operator views");
  for (double w : weights_) require(std::isfinite(w), "SketchedMap: sampled block with zero probability");
}

void SketchedMap::scale_rows(std::span<double> y) const {
  const std::size_t nd = b_->detectors(), nk = views_.size();
  for (std::size_t ch = 0; ch < b_->channels(); ++ch)
    for (std::size_t k = 0; k < nk; ++k) {
      double* row = y.data() + (ch * nk + k) * nd;
      for (std::size_t d = 0; d < nd; ++d) row[d] *= weights_[k];
    }
}

void SketchedMap::apply_into(std::span<const double> x, std::span<double> y) const {
  check_apply(x, y);
  b_->apply_views(views_, x, y);
  scale_rows(y);
}

void SketchedMap::adjoint_into(std::span<const double> y, std::span<double> x) const {
  check_adjoint(y, x);
  Vector scaled(y.begin(), y.end());
  scale_rows(scaled);
  b_->adjoint_views(views_, scaled, x);
}

Vector sketched_sqrt_apply(const SketchPlan& plan, std::shared_ptr<const ViewBlockedMap> b,
                           std::span<const double> v) {
  return SketchedMap(plan, std::move(b)).apply(v);
}

}  // namespace dihs
