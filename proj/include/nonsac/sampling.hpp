#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonsac/rng.hpp"

namespace nonsac {

enum class SampleMode { kUniformWithoutReplacement, kDisjointPartition };

// How the m non-minimal samples are drawn from a dataset of n points.
struct SamplePlan {
  int m = 10;           // number of non-minimal samples
  int sample_size = 1000;  // N, points per sample
  SampleMode mode = SampleMode::kUniformWithoutReplacement;
  bool fixed_sample = false;  // reuse one sample in every slot

  void validate(int n, int minimal_size) const {
    if (m < 1) throw std::invalid_argument("sample plan: m must be >= 1");
    if (sample_size < minimal_size) {
      throw std::invalid_argument("sample plan: sample size below minimal-sample size");
    }
    if (n < sample_size) throw std::invalid_argument("dataset smaller than sample size");
    if (mode == SampleMode::kDisjointPartition && !fixed_sample &&
        static_cast<long long>(m) * sample_size > n) {
      throw std::invalid_argument("cannot partition: dataset smaller than m*N");
    }
  }
};

struct SampleSet {
  std::vector<std::vector<int>> indices;  // m lists of length N
  std::vector<std::uint64_t> seeds;       // per-sample estimation seeds
};

// Deterministic given (plan, n, seed). In disjoint mode the samples are the
// consecutive chunks of one random permutation prefix. With fixed_sample the
// first drawn sample fills every slot; per-slot seeds still differ.
inline SampleSet draw_samples(const SamplePlan& plan, int n, std::uint64_t seed) {
  if (plan.sample_size > n) throw std::invalid_argument("dataset smaller than sample size");
  if (plan.mode == SampleMode::kDisjointPartition && !plan.fixed_sample &&
      static_cast<long long>(plan.m) * plan.sample_size > n) {
    throw std::invalid_argument("cannot partition: dataset smaller than m*N");
  }
  SampleSet out;
  out.indices.reserve(plan.m);
  out.seeds.reserve(plan.m);
  for (int s = 0; s < plan.m; ++s) out.seeds.push_back(split_seed(seed, 1000 + s));

  if (plan.fixed_sample) {
    Rng rng = derive_rng(seed, 0);
    const std::vector<int> one = rng.sample_without_replacement(plan.sample_size, n);
    out.indices.assign(plan.m, one);
    return out;
  }
  if (plan.mode == SampleMode::kDisjointPartition) {
    Rng rng = derive_rng(seed, 0);
    const std::vector<int> prefix =
        rng.sample_without_replacement(plan.m * plan.sample_size, n);
    for (int s = 0; s < plan.m; ++s) {
      out.indices.emplace_back(prefix.begin() + static_cast<long>(s) * plan.sample_size,
                               prefix.begin() + static_cast<long>(s + 1) * plan.sample_size);
    }
    return out;
  }
  for (int s = 0; s < plan.m; ++s) {
    Rng rng = derive_rng(seed, s);
    out.indices.push_back(rng.sample_without_replacement(plan.sample_size, n));
  }
  return out;
}

struct ProportionStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Empirical sampling distribution of the per-sample inlier proportion.
inline ProportionStats sample_inlier_proportion_stats(const std::vector<bool>& inlier_mask,
                                                      const SamplePlan& plan, std::uint64_t seed,
                                                      int draws) {
  const int n = static_cast<int>(inlier_mask.size());
  std::vector<double> props(draws);
  for (int d = 0; d < draws; ++d) {
    Rng rng = derive_rng(seed, d);
    const std::vector<int> idx = rng.sample_without_replacement(plan.sample_size, n);
    int count = 0;
    for (int i : idx) count += inlier_mask[i] ? 1 : 0;
    props[d] = static_cast<double>(count) / plan.sample_size;
  }
  ProportionStats st;
  for (double p : props) st.mean += p;
  st.mean /= draws;
  double var = 0.0;
  for (double p : props) var += (p - st.mean) * (p - st.mean);
  if (draws > 1) var /= (draws - 1);
  st.stddev = std::sqrt(var);
  return st;
}

}  // namespace nonsac
