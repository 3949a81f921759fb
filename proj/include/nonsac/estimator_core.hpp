#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nonsac/rng.hpp"

namespace nonsac {

// Result of one per-sample estimation. Residuals cover the whole sample and
// residual[i] < threshold exactly characterizes membership in inlier_indices.
template <typename Model>
struct EstimatorOutput {
  Model model{};
  std::vector<int> inlier_indices;
  std::vector<double> residuals;
  int iterations_used = 0;
  bool low_support = false;
};

struct RansacConfig {
  int minimal_iterations = 100;  // fixed budget, not adaptive
  double inlier_threshold = 0.0;
  std::uint64_t seed = 0;
  int budget_multiplier = 1;  // fixed-sample mode scales the budget by m

  void validate() const {
    if (minimal_iterations < 1) throw std::invalid_argument("ransac: iterations must be >= 1");
    if (inlier_threshold <= 0) throw std::invalid_argument("ransac: threshold must be > 0");
  }
};

namespace detail {

// (count, residual sum, iteration) ordering used everywhere a winner is
// picked: more inliers, then smaller inlier-residual sum, then earlier.
struct Support {
  int count = -1;
  double residual_sum = std::numeric_limits<double>::infinity();
  int iteration = std::numeric_limits<int>::max();

  bool better_than(const Support& o) const {
    if (count != o.count) return count > o.count;
    if (residual_sum != o.residual_sum) return residual_sum < o.residual_sum;
    return iteration < o.iteration;
  }
};

}  // namespace detail

// Fixed-budget RANSAC. Solver: (const std::vector<int>& minimal_idx) ->
// std::vector<Model>; ResidualFn: (const Model&, int idx) -> double.
// Every solution of every draw is scored over the full sample; the winner is
// re-evaluated at the end so the returned residual vector is authoritative.
template <typename Model, typename Solver, typename ResidualFn>
std::optional<EstimatorOutput<Model>> ransac(int sample_size, int minimal_size,
                                             const Solver& solver, const ResidualFn& residual_fn,
                                             const RansacConfig& config) {
  config.validate();
  if (sample_size < minimal_size) {
    throw std::invalid_argument("ransac: sample smaller than minimal size");
  }
  Rng rng(config.seed);
  const int iterations = config.minimal_iterations * std::max(1, config.budget_multiplier);

  std::vector<int> pool(sample_size);
  for (int i = 0; i < sample_size; ++i) pool[i] = i;

  Model best_model{};
  detail::Support best;
  bool found = false;

  std::vector<int> minimal(minimal_size);
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i < minimal_size; ++i) {
      const int j = i + static_cast<int>(rng.uniform_index(sample_size - i));
      std::swap(pool[i], pool[j]);
      minimal[i] = pool[i];
    }
    for (const Model& model : solver(minimal)) {
      detail::Support s;
      s.count = 0;
      s.residual_sum = 0.0;
      s.iteration = it;
      for (int i = 0; i < sample_size; ++i) {
        const double r = residual_fn(model, i);
        if (r < config.inlier_threshold) {
          ++s.count;
          s.residual_sum += r;
        }
      }
      if (!found || s.better_than(best)) {
        best = s;
        best_model = model;
        found = true;
      }
    }
  }
  if (!found || best.count < minimal_size) return std::nullopt;

  EstimatorOutput<Model> out;
  out.model = best_model;
  out.iterations_used = iterations;
  out.residuals.resize(sample_size);
  for (int i = 0; i < sample_size; ++i) {
    out.residuals[i] = residual_fn(best_model, i);
    if (out.residuals[i] < config.inlier_threshold) out.inlier_indices.push_back(i);
  }
  const int count = static_cast<int>(out.inlier_indices.size());
  out.low_support = count < 2 * minimal_size || 10 * count < sample_size;
  return out;
}

// Deterministic tie-break over finished candidates (count, then inlier
// residual sum, then position in the list).
template <typename Model>
const EstimatorOutput<Model>& tie_break(const std::vector<EstimatorOutput<Model>>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("tie_break: empty candidate list");
  int best = 0;
  detail::Support bs;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    detail::Support s;
    s.count = static_cast<int>(candidates[i].inlier_indices.size());
    s.residual_sum = 0.0;
    for (int idx : candidates[i].inlier_indices) s.residual_sum += candidates[i].residuals[idx];
    s.iteration = i;
    if (i == 0 || s.better_than(bs)) {
      bs = s;
      best = i;
    }
  }
  return candidates[best];
}

}  // namespace nonsac
