#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nonsac/estimator_core.hpp"
#include "nonsac/geometry.hpp"
#include "nonsac/rng.hpp"

namespace nonsac {

// 3D-3D correspondences (source point p, target point q).
struct Pair3D3D {
  std::vector<Eigen::Vector3d> p;
  std::vector<Eigen::Vector3d> q;

  int size() const { return static_cast<int>(p.size()); }
};

enum class PcrTermination { kBudget, kInlierRatio };

struct Pcr99Config {
  double prescreen_tolerance = 0.0;   // delta; inlier pairs preserve distances
  double inlier_threshold = 0.0;      // tau
  int n_hypothesis_cap = 1000;        // valid (prescreen-passing) triplets
  long long max_total_triplets = 10000;
  PcrTermination termination = PcrTermination::kBudget;
  double target_inlier_ratio = 0.0009;
  long long ratio_mode_hard_cap = 1000000;
  int scoring_subset_size = 0;  // K; 0 compares against every other correspondence
  std::uint64_t seed = 0;
  int budget_multiplier = 1;  // fixed-sample mode scales max_total_triplets only

  // prioritized-search shape
  double priority_sharpness = 2.5;  // softmax exponent over standardized scores
  int draws_per_anchor = 100;

  void validate() const {
    if (prescreen_tolerance <= 0) throw std::invalid_argument("pcr: delta must be > 0");
    if (inlier_threshold <= 0) throw std::invalid_argument("pcr: tau must be > 0");
    if (n_hypothesis_cap < 1 || max_total_triplets < 1) {
      throw std::invalid_argument("pcr: caps must be >= 1");
    }
    if (termination == PcrTermination::kInlierRatio &&
        (target_inlier_ratio <= 0 || target_inlier_ratio >= 1)) {
      throw std::invalid_argument("pcr: target inlier ratio must be in (0,1)");
    }
  }
};

// Rigid motions preserve pairwise distances, so two inlier correspondences
// keep this near zero.
inline double pairwise_consistency(const Eigen::Vector3d& pa, const Eigen::Vector3d& qa,
                                   const Eigen::Vector3d& pb, const Eigen::Vector3d& qb) {
  return std::abs((pa - pb).norm() - (qa - qb).norm());
}

// Per-correspondence score: how many partners (a seeded random K-subset, or
// everyone when K = 0) are pairwise-consistent with it.
inline std::vector<double> score_correspondences(const Pair3D3D& set, const Pcr99Config& config) {
  const int n = set.size();
  std::vector<double> scores(n, 0.0);
  const double delta = config.prescreen_tolerance;
  if (config.scoring_subset_size <= 0 || config.scoring_subset_size >= n - 1) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (pairwise_consistency(set.p[i], set.q[i], set.p[j], set.q[j]) < delta) {
          scores[i] += 1.0;
          scores[j] += 1.0;
        }
      }
    }
    return scores;
  }
  const int k = config.scoring_subset_size;
  Rng rng = derive_rng(config.seed, 77);
  for (int i = 0; i < n; ++i) {
    int counted = 0;
    // draw partners from [0, n-1) and skip over i
    std::vector<int> subset = rng.sample_without_replacement(k, n - 1);
    for (int j : subset) {
      const int b = j >= i ? j + 1 : j;
      if (pairwise_consistency(set.p[i], set.q[i], set.p[b], set.q[b]) < delta) ++counted;
    }
    scores[i] = counted;
  }
  return scores;
}

// Least-squares rigid fit of one 3-point sample; collinear triplets are
// rejected.
inline std::optional<RigidTransform> procrustes_3pt(const std::array<Eigen::Vector3d, 3>& p,
                                                    const std::array<Eigen::Vector3d, 3>& q) {
  return fit_rigid({p[0], p[1], p[2]}, {q[0], q[1], q[2]});
}

// Modified PCR-99: score correspondences by pairwise-distance consistency,
// then draw 3-point samples in score-prioritized order (anchors sweep the
// score ranking; the two partners are drawn from the anchor's consistency
// set, weighted by score). A triplet is valid only if all three pairwise
// consistencies pass; each valid triplet yields a Procrustes hypothesis
// scored by inlier count over the sample.
inline std::optional<EstimatorOutput<RigidTransform>> estimate_pcr(const Pair3D3D& sample,
                                                                   const Pcr99Config& config) {
  config.validate();
  const int n = sample.size();
  if (n < 3) throw std::invalid_argument("pcr: sample smaller than minimal size");
  const double delta = config.prescreen_tolerance;
  const double tau = config.inlier_threshold;

  const std::vector<double> scores = score_correspondences(sample, config);

  double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double sdev = std::sqrt(var / std::max(1, n - 1));

  std::vector<double> weight(n);
  for (int i = 0; i < n; ++i) {
    const double z = sdev > 1e-12 ? (scores[i] - mean) / sdev : 0.0;
    weight[i] = std::exp(config.priority_sharpness * std::min(z, 6.0));
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return scores[i] > scores[j]; });

  const long long total_cap = config.termination == PcrTermination::kBudget
                                  ? config.max_total_triplets *
                                        std::max(1, config.budget_multiplier)
                                  : config.ratio_mode_hard_cap;
  const double ratio_bar = config.target_inlier_ratio * n;

  Rng rng = derive_rng(config.seed, 1);
  long long total_draws = 0;
  int n_valid = 0;
  int best_count = -1;
  double best_sum = 0.0;
  RigidTransform best_model;

  std::vector<int> cset;
  std::vector<double> cweight;

  auto count_inliers = [&](const RigidTransform& rt, int* count, double* sum) {
    const Eigen::Matrix3d r = rt.rotation.matrix();
    int c = 0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = (r * sample.p[i] + rt.translation - sample.q[i]).norm();
      if (d < tau) {
        ++c;
        s += d;
      }
    }
    *count = c;
    *sum = s;
  };

  auto done = [&]() {
    if (total_draws >= total_cap) return true;
    if (config.termination == PcrTermination::kBudget) {
      return n_valid >= config.n_hypothesis_cap;
    }
    return best_count >= ratio_bar && n_valid >= 1000;
  };

  long long anchor_rank = 0;
  while (!done()) {
    const int a = order[anchor_rank % n];  // sweep the ranking; revisits get fresh partner draws
    ++anchor_rank;

    cset.clear();
    cweight.clear();
    double wsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == a) continue;
      if (pairwise_consistency(sample.p[a], sample.q[a], sample.p[j], sample.q[j]) < delta) {
        cset.push_back(j);
        wsum += weight[j];
        cweight.push_back(wsum);
      }
    }
    if (cset.size() < 2) {
      ++total_draws;
      continue;
    }

    auto pick = [&]() {
      const double u = rng.uniform01() * wsum;
      const auto it = std::upper_bound(cweight.begin(), cweight.end(), u);
      return cset[std::min<std::size_t>(it - cweight.begin(), cset.size() - 1)];
    };

    for (int d = 0; d < config.draws_per_anchor && !done(); ++d) {
      ++total_draws;
      const int b = pick();
      int c = pick();
      if (c == b) continue;
      if (pairwise_consistency(sample.p[b], sample.q[b], sample.p[c], sample.q[c]) >= delta) {
        continue;
      }
      ++n_valid;
      const auto rt = procrustes_3pt({sample.p[a], sample.p[b], sample.p[c]},
                                     {sample.q[a], sample.q[b], sample.q[c]});
      if (!rt) continue;  // degenerate triplet
      int count = 0;
      double sum = 0.0;
      count_inliers(*rt, &count, &sum);
      if (count > best_count || (count == best_count && sum < best_sum)) {
        best_count = count;
        best_sum = sum;
        best_model = *rt;
      }
    }
  }

  if (best_count < 3) return std::nullopt;  // no usable triplet within budget

  EstimatorOutput<RigidTransform> out;
  out.model = best_model;
  out.iterations_used = static_cast<int>(std::min<long long>(total_draws, INT32_MAX));
  out.residuals.resize(n);
  const Eigen::Matrix3d r = best_model.rotation.matrix();
  for (int i = 0; i < n; ++i) {
    out.residuals[i] = (r * sample.p[i] + best_model.translation - sample.q[i]).norm();
    if (out.residuals[i] < tau) out.inlier_indices.push_back(i);
  }
  out.low_support = static_cast<int>(out.inlier_indices.size()) < 6;
  return out;
}

}  // namespace nonsac
