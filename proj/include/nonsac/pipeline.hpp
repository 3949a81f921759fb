#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonsac/datagen.hpp"
#include "nonsac/estimator_core.hpp"
#include "nonsac/pcr.hpp"
#include "nonsac/pnp.hpp"
#include "nonsac/relpose.hpp"
#include "nonsac/sampling.hpp"
#include "nonsac/scoring.hpp"

namespace nonsac {

struct RuleOutcome {
  std::string rule;
  bool ok = false;
  std::string error;
  int selected = -1;
  std::vector<double> scores;
};

// One full sampling -> estimation -> selection pass.
struct NonsacRun {
  SampleSet samples;
  std::vector<HypothesisRecord> hypotheses;
  std::vector<RuleOutcome> selections;
  // diagnostics; excluded from determinism comparisons
  double sampling_seconds = 0.0;
  double estimation_seconds = 0.0;
  double scoring_seconds = 0.0;

  const RuleOutcome* outcome(const std::string& rule_name) const {
    for (const auto& o : selections) {
      if (o.rule == rule_name) return &o;
    }
    return nullptr;
  }
};

struct PipelineOptions {
  bool tlp_full_dataset = false;  // evaluate TLP over the whole dataset
};

namespace pipeline_detail {

// Problem adapters: how to gather a sample, run the estimator, and evaluate
// one residual for the shared TLP set.

struct RelposeAdapter {
  const Pair2D2D& data;
  RansacConfig config;

  using Model = RelposeModel;
  static constexpr int kMinimalSize = 5;

  int size() const { return data.size(); }

  Pair2D2D gather(const std::vector<int>& idx) const {
    Pair2D2D s;
    s.x1.reserve(idx.size());
    s.x2.reserve(idx.size());
    for (int i : idx) {
      s.x1.push_back(data.x1[i]);
      s.x2.push_back(data.x2[i]);
    }
    return s;
  }

  std::optional<EstimatorOutput<Model>> estimate(const Pair2D2D& sample,
                                                 std::uint64_t seed) const {
    RansacConfig c = config;
    c.seed = seed;
    return estimate_relpose(sample, c);
  }

  double residual(const Model& m, long long index) const {
    return sampson_error(data.x1[index], data.x2[index], m.essential);
  }

  static Rotation rotation_of(const Model& m) { return m.pose.rotation; }
  static Eigen::Vector3d translation_of(const Model& m) { return m.pose.translation; }
  double default_tau() const { return config.inlier_threshold; }
};

struct PnpAdapter {
  const Pair3D2D& data;
  RansacConfig config;

  using Model = RigidTransform;
  static constexpr int kMinimalSize = 3;

  int size() const { return data.size(); }

  Pair3D2D gather(const std::vector<int>& idx) const {
    Pair3D2D s;
    s.world.reserve(idx.size());
    s.image.reserve(idx.size());
    for (int i : idx) {
      s.world.push_back(data.world[i]);
      s.image.push_back(data.image[i]);
    }
    return s;
  }

  std::optional<EstimatorOutput<Model>> estimate(const Pair3D2D& sample,
                                                 std::uint64_t seed) const {
    RansacConfig c = config;
    c.seed = seed;
    return estimate_pnp(sample, c);
  }

  double residual(const Model& m, long long index) const {
    return reprojection_error(m, data.world[index], data.image[index]);
  }

  static Rotation rotation_of(const Model& m) { return m.rotation; }
  static Eigen::Vector3d translation_of(const Model& m) { return m.translation; }
  double default_tau() const { return config.inlier_threshold; }
};

struct PcrAdapter {
  const Pair3D3D& data;
  Pcr99Config config;

  using Model = RigidTransform;
  static constexpr int kMinimalSize = 3;

  int size() const { return data.size(); }

  Pair3D3D gather(const std::vector<int>& idx) const {
    Pair3D3D s;
    s.p.reserve(idx.size());
    s.q.reserve(idx.size());
    for (int i : idx) {
      s.p.push_back(data.p[i]);
      s.q.push_back(data.q[i]);
    }
    return s;
  }

  std::optional<EstimatorOutput<Model>> estimate(const Pair3D3D& sample,
                                                 std::uint64_t seed) const {
    Pcr99Config c = config;
    c.seed = seed;
    return estimate_pcr(sample, c);
  }

  double residual(const Model& m, long long index) const {
    return (m.rotation * data.p[index] + m.translation - data.q[index]).norm();
  }

  static Rotation rotation_of(const Model& m) { return m.rotation; }
  static Eigen::Vector3d translation_of(const Model& m) { return m.translation; }
  double default_tau() const { return config.inlier_threshold; }
};

// Lazy all-to-all pair set; samples are materialized by index arithmetic.
struct CorfreeAdapter {
  const CorfreeData& data;
  Pcr99Config config;

  using Model = RigidTransform;
  static constexpr int kMinimalSize = 3;

  long long size() const { return data.pair_count(); }

  Pair3D3D gather(const std::vector<int>& idx) const {
    Pair3D3D s;
    s.p.reserve(idx.size());
    s.q.reserve(idx.size());
    for (int i : idx) {
      s.p.push_back(data.p(i));
      s.q.push_back(data.q(i));
    }
    return s;
  }

  std::optional<EstimatorOutput<Model>> estimate(const Pair3D3D& sample,
                                                 std::uint64_t seed) const {
    Pcr99Config c = config;
    c.seed = seed;
    return estimate_pcr(sample, c);
  }

  double residual(const Model& m, long long index) const {
    return (m.rotation * data.p(index) + m.translation - data.q(index)).norm();
  }

  static Rotation rotation_of(const Model& m) { return m.rotation; }
  static Eigen::Vector3d translation_of(const Model& m) { return m.translation; }
  double default_tau() const { return config.inlier_threshold; }
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Adapter>
NonsacRun run_nonsac_impl(const Adapter& adapter, const SamplePlan& plan,
                          const std::vector<ScoringRule>& rules, std::uint64_t seed,
                          const GroundTruth* gt, const PipelineOptions& options) {
  using Model = typename Adapter::Model;
  if (adapter.size() <= 0) throw std::invalid_argument("pipeline: empty dataset");
  if (rules.empty()) throw std::invalid_argument("pipeline: no scoring rule requested");
  const long long n = adapter.size();
  if (n > INT32_MAX) throw std::invalid_argument("pipeline: dataset too large to index");
  plan.validate(static_cast<int>(n), Adapter::kMinimalSize);

  NonsacRun run;
  auto t0 = std::chrono::steady_clock::now();
  run.samples = draw_samples(plan, static_cast<int>(n), seed);
  run.sampling_seconds = seconds_since(t0);

  // In fixed-sample mode the single sample is estimated once with an
  // m-times budget instead of m times with fresh seeds.
  const int estimations = plan.fixed_sample ? 1 : plan.m;

  t0 = std::chrono::steady_clock::now();
  std::vector<std::optional<EstimatorOutput<Model>>> outputs(estimations);
  for (int s = 0; s < estimations; ++s) {
    auto sample = adapter.gather(run.samples.indices[s]);
    if (plan.fixed_sample) {
      Adapter scaled = adapter;
      scaled.config.budget_multiplier = plan.m;
      outputs[s] = scaled.estimate(sample, run.samples.seeds[s]);
    } else {
      outputs[s] = adapter.estimate(sample, run.samples.seeds[s]);
    }
  }
  run.estimation_seconds = seconds_since(t0);

  run.hypotheses.resize(estimations);
  int usable = 0;
  for (int s = 0; s < estimations; ++s) {
    HypothesisRecord& h = run.hypotheses[s];
    h.sample_index = s;
    if (!outputs[s]) {
      h.failed = true;
      continue;
    }
    const auto& out = *outputs[s];
    h.rotation = Adapter::rotation_of(out.model);
    h.translation = Adapter::translation_of(out.model);
    h.n_inliers = static_cast<int>(out.inlier_indices.size());
    h.sample_residuals = out.residuals;
    h.inlier_residuals.reserve(out.inlier_indices.size());
    for (int i : out.inlier_indices) h.inlier_residuals.push_back(out.residuals[i]);
    ++usable;
  }
  if (usable == 0) throw std::runtime_error("no viable hypothesis: every estimation failed");

  t0 = std::chrono::steady_clock::now();
  // Shared TLP evaluation set: union of the drawn samples (bounded by m*N),
  // or the full dataset behind the explicit switch.
  TlpEvalContext eval;
  bool eval_built = false;
  auto build_eval = [&]() {
    if (eval_built) return;
    std::vector<long long> points;
    if (options.tlp_full_dataset) {
      points.resize(n);
      for (long long i = 0; i < n; ++i) points[i] = i;
    } else {
      std::set<int> uniq;
      for (const auto& idx : run.samples.indices) uniq.insert(idx.begin(), idx.end());
      points.assign(uniq.begin(), uniq.end());
    }
    eval.residuals.assign(estimations, {});
    for (int s = 0; s < estimations; ++s) {
      if (!outputs[s]) continue;
      auto& row = eval.residuals[s];
      row.reserve(points.size());
      for (long long p : points) row.push_back(adapter.residual(outputs[s]->model, p));
    }
    eval_built = true;
  };

  for (const ScoringRule& rule : rules) {
    RuleOutcome outcome;
    ScoringRule r = rule;
    outcome.rule = r.name();
    try {
      const Rotation* gt_rot = gt ? &gt->rotation : nullptr;
      const TlpEvalContext* ctx = nullptr;
      if (r.kind == RuleKind::kTlpCost) {
        if (r.tau <= 0) r.tau = adapter.default_tau();
        build_eval();
        ctx = &eval;
      }
      const Selection s = select(run.hypotheses, r, ctx, gt_rot);
      outcome.ok = true;
      outcome.selected = s.selected;
      outcome.scores = s.scores;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
    run.selections.push_back(std::move(outcome));
  }
  run.scoring_seconds = seconds_since(t0);
  return run;
}

}  // namespace pipeline_detail

inline NonsacRun run_nonsac_relpose(const Pair2D2D& data, const SamplePlan& plan,
                                    const RansacConfig& config,
                                    const std::vector<ScoringRule>& rules, std::uint64_t seed,
                                    const GroundTruth* gt = nullptr,
                                    const PipelineOptions& options = {}) {
  return pipeline_detail::run_nonsac_impl(pipeline_detail::RelposeAdapter{data, config}, plan,
                                          rules, seed, gt, options);
}

inline NonsacRun run_nonsac_pnp(const Pair3D2D& data, const SamplePlan& plan,
                                const RansacConfig& config, const std::vector<ScoringRule>& rules,
                                std::uint64_t seed, const GroundTruth* gt = nullptr,
                                const PipelineOptions& options = {}) {
  return pipeline_detail::run_nonsac_impl(pipeline_detail::PnpAdapter{data, config}, plan, rules,
                                          seed, gt, options);
}

inline NonsacRun run_nonsac_pcr(const Pair3D3D& data, const SamplePlan& plan,
                                const Pcr99Config& config, const std::vector<ScoringRule>& rules,
                                std::uint64_t seed, const GroundTruth* gt = nullptr,
                                const PipelineOptions& options = {}) {
  return pipeline_detail::run_nonsac_impl(pipeline_detail::PcrAdapter{data, config}, plan, rules,
                                          seed, gt, options);
}

inline NonsacRun run_nonsac_corfree(const CorfreeData& data, const SamplePlan& plan,
                                    const Pcr99Config& config,
                                    const std::vector<ScoringRule>& rules, std::uint64_t seed,
                                    const GroundTruth* gt = nullptr,
                                    const PipelineOptions& options = {}) {
  return pipeline_detail::run_nonsac_impl(pipeline_detail::CorfreeAdapter{data, config}, plan,
                                          rules, seed, gt, options);
}

}  // namespace nonsac
