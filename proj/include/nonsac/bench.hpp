#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nonsac/datagen.hpp"
#include "nonsac/metrics.hpp"
#include "nonsac/pipeline.hpp"

namespace nonsac {

// One grid cell x one rule, with the raw per-trial rotation errors kept for
// anything mAA does not capture (medians, envelope checks).
struct RuleResult {
  ResultRow row;
  std::vector<double> errors_deg;
};

struct GridSpec {
  Problem problem = Problem::kRelpose;
  std::vector<double> sigmas;
  std::vector<double> outlier_ratios;
  std::vector<int> m_values;
  int sample_size = 1000;
  int dataset_n = 0;  // 0: n = m * sample_size (the zero-overlap construction)
  bool disjoint = true;
  bool fixed_sample_mode = false;
  int trials = 100;
  int theta_max = 10;
  std::vector<ScoringRule> rules;
  int ransac_iterations = 100;
  // PCR search caps (thresholds are derived from sigma per cell)
  int pcr_hypothesis_cap = 1000;
  long long pcr_max_total = 10000;
  bool collect_timings = false;
  bool tlp_full_dataset = false;
};

namespace bench_detail {

inline double rule_error(const NonsacRun& run, const std::string& rule_name,
                         const GroundTruth& gt) {
  const RuleOutcome* o = run.outcome(rule_name);
  if (o == nullptr || !o->ok || o->selected < 0) {
    return std::numeric_limits<double>::infinity();
  }
  return rotation_distance_deg(run.hypotheses[o->selected].rotation, gt.rotation);
}

// delta at 6 sigma accepts ~all inlier pairs; tau at 3 sigma keeps chance
// alignments of outliers from accumulating on garbage hypotheses
inline Pcr99Config pcr_config_for(double sigma, const GridSpec& grid) {
  Pcr99Config c;
  c.prescreen_tolerance = 6.0 * sigma;
  c.inlier_threshold = 3.0 * sigma;
  c.n_hypothesis_cap = grid.pcr_hypothesis_cap;
  c.max_total_triplets = grid.pcr_max_total;
  return c;
}

}  // namespace bench_detail

// Monte-Carlo grid: every cell runs `trials` fresh scenes, every requested
// rule is evaluated on the same hypothesis sets per trial, and a fixed-sample
// rule gets its own collapsed pass over the same scene.
inline std::vector<RuleResult> run_grid(const GridSpec& grid, std::uint64_t master_seed) {
  if (grid.problem == Problem::kCorfree) {
    throw std::invalid_argument("run_grid: use run_corfree for the correspondence-free problem");
  }
  MetricConfig metric{grid.trials, grid.theta_max};
  metric.validate();

  std::vector<RuleResult> results;
  bool want_fixed_rule = false;
  std::vector<ScoringRule> direct_rules;
  for (const auto& r : grid.rules) {
    if (r.kind == RuleKind::kFixedSample && !grid.fixed_sample_mode) {
      want_fixed_rule = true;
    } else {
      direct_rules.push_back(r);
    }
  }

  int cell_id = 0;
  for (double sigma : grid.sigmas) {
    for (double outlier_ratio : grid.outlier_ratios) {
      for (int m : grid.m_values) {
        const auto cell_start = std::chrono::steady_clock::now();
        const int n = grid.dataset_n > 0 ? grid.dataset_n : m * grid.sample_size;

        SamplePlan plan;
        plan.m = m;
        plan.sample_size = grid.sample_size;
        plan.mode = grid.disjoint ? SampleMode::kDisjointPartition
                                  : SampleMode::kUniformWithoutReplacement;
        plan.fixed_sample = grid.fixed_sample_mode;

        std::map<std::string, std::vector<double>> errors;
        for (int trial = 0; trial < grid.trials; ++trial) {
          const std::uint64_t scene_seed =
              split_seed(master_seed, static_cast<std::uint64_t>(cell_id) * 1000003 + trial);
          const std::uint64_t run_seed = split_seed(scene_seed, 0xA11CE);
          Rng rng(scene_seed);

          SceneConfig scene;
          scene.problem = grid.problem;
          scene.n = n;
          scene.sigma = sigma;
          scene.outlier_ratio = outlier_ratio;

          PipelineOptions opts;
          opts.tlp_full_dataset = grid.tlp_full_dataset;

          auto eval_trial = [&](auto&& run_fn, const GroundTruth& gt, auto&& fixed_fn) {
            try {
              const NonsacRun run = run_fn();
              for (const auto& rule : direct_rules) {
                errors[rule.name()].push_back(bench_detail::rule_error(run, rule.name(), gt));
              }
            } catch (const std::exception&) {
              for (const auto& rule : direct_rules) {
                errors[rule.name()].push_back(std::numeric_limits<double>::infinity());
              }
            }
            if (want_fixed_rule) {
              try {
                const NonsacRun fixed_run = fixed_fn();
                errors["fixed-sample"].push_back(
                    bench_detail::rule_error(fixed_run, "fixed-sample", gt));
              } catch (const std::exception&) {
                errors["fixed-sample"].push_back(std::numeric_limits<double>::infinity());
              }
            }
          };

          static const std::vector<ScoringRule> kFixedOnly = {
              ScoringRule{RuleKind::kFixedSample}};

          if (grid.problem == Problem::kRelpose) {
            const auto [data, gt] = gen_relpose(scene, rng);
            RansacConfig rc;
            rc.minimal_iterations = grid.ransac_iterations;
            rc.inlier_threshold = std::pow(5.0 * sigma, 2);
            eval_trial(
                [&] { return run_nonsac_relpose(data, plan, rc, direct_rules, run_seed, &gt, opts); },
                gt,
                [&] {
                  SamplePlan fp = plan;
                  fp.fixed_sample = true;
                  fp.mode = SampleMode::kUniformWithoutReplacement;
                  return run_nonsac_relpose(data, fp, rc, kFixedOnly, run_seed, &gt, opts);
                });
          } else if (grid.problem == Problem::kPnp) {
            const auto [data, gt] = gen_pnp(scene, rng);
            RansacConfig rc;
            rc.minimal_iterations = grid.ransac_iterations;
            rc.inlier_threshold = 5.0 * sigma;
            eval_trial(
                [&] { return run_nonsac_pnp(data, plan, rc, direct_rules, run_seed, &gt, opts); },
                gt,
                [&] {
                  SamplePlan fp = plan;
                  fp.fixed_sample = true;
                  fp.mode = SampleMode::kUniformWithoutReplacement;
                  return run_nonsac_pnp(data, fp, rc, kFixedOnly, run_seed, &gt, opts);
                });
          } else {
            const auto [data, gt] = gen_pcr(scene, rng);
            const Pcr99Config pc = bench_detail::pcr_config_for(sigma, grid);
            eval_trial(
                [&] { return run_nonsac_pcr(data, plan, pc, direct_rules, run_seed, &gt, opts); },
                gt,
                [&] {
                  SamplePlan fp = plan;
                  fp.fixed_sample = true;
                  fp.mode = SampleMode::kUniformWithoutReplacement;
                  return run_nonsac_pcr(data, fp, pc, kFixedOnly, run_seed, &gt, opts);
                });
          }
        }

        const double cell_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start).count();
        for (const auto& rule : grid.rules) {
          const std::string name =
              rule.kind == RuleKind::kFixedSample && !grid.fixed_sample_mode ? "fixed-sample"
                                                                             : rule.name();
          RuleResult rr;
          rr.errors_deg = errors[name];
          rr.row.problem = problem_name(grid.problem);
          rr.row.sigma = sigma;
          rr.row.outlier_ratio = outlier_ratio;
          rr.row.m = m;
          rr.row.rule = name;
          rr.row.maa = maa(rr.errors_deg, metric);
          rr.row.trials = grid.trials;
          rr.row.seconds = grid.collect_timings ? cell_seconds : 0.0;
          results.push_back(std::move(rr));
        }
        ++cell_id;
      }
    }
  }
  return results;
}

struct CorfreeSpec {
  std::vector<Eigen::Vector3d> cloud;
  int points_per_cloud = 500;
  double overlap = 0.5;
  double sigma = 0.01;
  int m = 10;
  int sample_size = 10000;
  int trials = 100;
  int theta_max = 10;
  std::vector<ScoringRule> rules;
  double target_inlier_ratio = 0.0009;
  long long hard_cap = 1000000;
  bool collect_timings = false;
};

// Correspondence-free registration over the lazy all-to-all pair set, with
// the inlier-ratio termination variant of the PCR estimator.
inline std::vector<RuleResult> run_corfree(const CorfreeSpec& spec, std::uint64_t master_seed) {
  MetricConfig metric{spec.trials, spec.theta_max};
  metric.validate();

  std::map<std::string, std::vector<double>> errors;
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t scene_seed = split_seed(master_seed, trial);
    const std::uint64_t run_seed = split_seed(scene_seed, 0xA11CE);
    Rng rng(scene_seed);

    SceneConfig scene;
    scene.problem = Problem::kCorfree;
    scene.sigma = spec.sigma;
    scene.points_per_cloud = spec.points_per_cloud;
    scene.overlap = spec.overlap;
    const auto [data, gt] = gen_corfree(spec.cloud, scene, rng);

    SamplePlan plan;
    plan.m = spec.m;
    plan.sample_size = spec.sample_size;
    plan.mode = SampleMode::kUniformWithoutReplacement;

    Pcr99Config pc;
    pc.prescreen_tolerance = 6.0 * spec.sigma;
    pc.inlier_threshold = 3.0 * spec.sigma;
    pc.termination = PcrTermination::kInlierRatio;
    pc.target_inlier_ratio = spec.target_inlier_ratio;
    pc.ratio_mode_hard_cap = spec.hard_cap;

    try {
      const NonsacRun run = run_nonsac_corfree(data, plan, pc, spec.rules, run_seed, &gt);
      for (const auto& rule : spec.rules) {
        errors[rule.name()].push_back(bench_detail::rule_error(run, rule.name(), gt));
      }
    } catch (const std::exception&) {
      for (const auto& rule : spec.rules) {
        errors[rule.name()].push_back(std::numeric_limits<double>::infinity());
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<RuleResult> results;
  for (const auto& rule : spec.rules) {
    RuleResult rr;
    rr.errors_deg = errors[rule.name()];
    rr.row.problem = "corfree";
    rr.row.sigma = spec.sigma;
    rr.row.outlier_ratio =
        1.0 - spec.overlap * spec.points_per_cloud /
                  (static_cast<double>(spec.points_per_cloud) * spec.points_per_cloud);
    rr.row.m = spec.m;
    rr.row.rule = rule.name();
    rr.row.maa = maa(rr.errors_deg, metric);
    rr.row.trials = spec.trials;
    rr.row.seconds = spec.collect_timings ? seconds : 0.0;
    results.push_back(std::move(rr));
  }
  return results;
}

inline std::vector<ResultRow> rows_of(const std::vector<RuleResult>& results) {
  std::vector<ResultRow> rows;
  rows.reserve(results.size());
  for (const auto& r : results) rows.push_back(r.row);
  return rows;
}

}  // namespace nonsac
