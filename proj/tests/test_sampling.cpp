#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nonsac/rng.hpp"
#include "nonsac/sampling.hpp"

using namespace nonsac;

TEST_CASE("disjoint partition covers a permutation prefix") {
  SamplePlan plan;
  plan.m = 10;
  plan.sample_size = 1000;
  plan.mode = SampleMode::kDisjointPartition;
  const SampleSet set = draw_samples(plan, 10000, 123);
  REQUIRE(set.indices.size() == 10);
  std::set<int> seen;
  for (const auto& s : set.indices) {
    REQUIRE(s.size() == 1000);
    for (int i : s) {
      CHECK(i >= 0);
      CHECK(i < 10000);
      CHECK(seen.insert(i).second);  // pairwise disjoint
    }
  }
  CHECK(static_cast<int>(seen.size()) == 10000);
}

TEST_CASE("single full-size sample is a permutation of the dataset") {
  SamplePlan plan;
  plan.m = 1;
  plan.sample_size = 64;
  const SampleSet set = draw_samples(plan, 64, 5);
  std::set<int> seen(set.indices[0].begin(), set.indices[0].end());
  CHECK(static_cast<int>(seen.size()) == 64);
}

TEST_CASE("draws are reproducible byte for byte") {
  SamplePlan plan;
  plan.m = 3;
  plan.sample_size = 5;
  const SampleSet a = draw_samples(plan, 6, 77);
  const SampleSet b = draw_samples(plan, 6, 77);
  CHECK(a.indices == b.indices);
  CHECK(a.seeds == b.seeds);
}

TEST_CASE("plan validation errors") {
  SamplePlan plan;
  plan.m = 3;
  plan.sample_size = 10;
  CHECK_THROWS_WITH_AS(draw_samples(plan, 9, 1), "dataset smaller than sample size",
                       std::invalid_argument);
  plan.mode = SampleMode::kDisjointPartition;
  CHECK_THROWS_WITH_AS(draw_samples(plan, 25, 1), "cannot partition: dataset smaller than m*N",
                       std::invalid_argument);
}

TEST_CASE("fixed-sample mode copies one draw into every slot") {
  SamplePlan plan;
  plan.m = 5;
  plan.sample_size = 20;
  plan.fixed_sample = true;
  const SampleSet set = draw_samples(plan, 100, 9);
  REQUIRE(set.indices.size() == 5);
  for (int s = 1; s < 5; ++s) CHECK(set.indices[s] == set.indices[0]);
  // per-slot estimation seeds still differ
  std::set<std::uint64_t> seeds(set.seeds.begin(), set.seeds.end());
  CHECK(seeds.size() == 5);
}

TEST_CASE("uniform samples have in-bounds distinct indices") {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    SamplePlan plan;
    plan.m = 1 + static_cast<int>(rng.uniform_index(6));
    plan.sample_size = 2 + static_cast<int>(rng.uniform_index(50));
    const int n = plan.sample_size + static_cast<int>(rng.uniform_index(100));
    const SampleSet set = draw_samples(plan, n, rng.bits());
    for (const auto& s : set.indices) {
      std::set<int> uniq(s.begin(), s.end());
      CHECK(uniq.size() == s.size());
      CHECK(*uniq.begin() >= 0);
      CHECK(*uniq.rbegin() < n);
    }
  }
}

TEST_CASE("sample proportion statistics match the CLT prediction") {
  // population inlier ratio P = 0.5, sample size N = 1000:
  // predicted std = sqrt(P(1-P)/N) = 0.0158
  const int n = 100000;
  std::vector<bool> mask(n, false);
  for (int i = 0; i < n / 2; ++i) mask[i] = true;
  SamplePlan plan;
  plan.m = 1;
  plan.sample_size = 1000;
  const ProportionStats st = sample_inlier_proportion_stats(mask, plan, 2024, 2000);
  const double predicted = std::sqrt(0.5 * 0.5 / 1000.0);
  CHECK(st.mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(st.stddev > 0.8 * predicted);
  CHECK(st.stddev < 1.2 * predicted);
}

TEST_CASE("degenerate proportions have zero spread") {
  const int n = 5000;
  SamplePlan plan;
  plan.m = 1;
  plan.sample_size = 200;
  const ProportionStats zero =
      sample_inlier_proportion_stats(std::vector<bool>(n, false), plan, 3, 200);
  CHECK(zero.mean == 0.0);
  CHECK(zero.stddev == 0.0);
  const ProportionStats one =
      sample_inlier_proportion_stats(std::vector<bool>(n, true), plan, 3, 200);
  CHECK(one.mean == 1.0);
  CHECK(one.stddev == 0.0);
}

TEST_CASE("about half of the samples exceed the population inlier ratio") {
  // requires NP >= 10 and N(1-P) >= 10
  const int n = 60000;
  const double p = 0.35;
  std::vector<bool> mask(n, false);
  for (int i = 0; i < static_cast<int>(p * n); ++i) mask[i] = true;
  SamplePlan plan;
  plan.m = 1;
  plan.sample_size = 1000;
  int above = 0;
  const int draws = 2000;
  for (int d = 0; d < draws; ++d) {
    Rng rng = derive_rng(909, d);
    const auto idx = rng.sample_without_replacement(plan.sample_size, n);
    int count = 0;
    for (int i : idx) count += mask[i] ? 1 : 0;
    if (static_cast<double>(count) / plan.sample_size > p) ++above;
  }
  const double frac = static_cast<double>(above) / draws;
  CHECK(frac > 0.42);
  CHECK(frac < 0.58);
}
