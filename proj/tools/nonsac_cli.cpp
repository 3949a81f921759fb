// Command-line benchmark runner: Monte-Carlo grids for the three simulated
// problems, the correspondence-free registration experiment, and aggregation
// of result tables.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "nonsac/bench.hpp"
#include "nonsac/metrics.hpp"
#include "nonsac/ply.hpp"

namespace {

constexpr const char* kDefaultRules =
    "ideal,fixed-sample,most-inliers,closest-pair,closest-triplet,min-mean,min-median,min-q3,"
    "pair:0.02,pair:0.05,pair:0.1,pair:0.2,pair:0.5,pair:1,"
    "tlp:0.01,tlp:0.1,tlp:0.2,tlp:0.3,tlp:0.5,tlp:1,tlp:2";

void write_rows(const std::vector<nonsac::ResultRow>& rows, const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nonsac::emit_json(rows, path);
  } else {
    nonsac::emit_csv(rows, path);
  }
}

void print_summary(const std::vector<nonsac::RuleResult>& results) {
  for (const auto& r : results) {
    std::cout << r.row.problem << " sigma=" << r.row.sigma
              << " outliers=" << r.row.outlier_ratio << " m=" << r.row.m << " " << r.row.rule
              << ": mAA=" << r.row.maa << "\n";
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NONSAC benchmark harness"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo simulation for one problem cell");
  std::string problem_arg;
  sim->add_option("problem", problem_arg, "relpose|pnp|pcr")->required();
  double sigma = 0.002, outlier_ratio = 0.65;
  int n = 0, m = 10, sample_size = 1000, trials = 100, iterations = 100, theta_max = 10;
  std::uint64_t seed = 1;
  std::string rules_arg = kDefaultRules, out_path;
  bool disjoint = false, fixed_sample = false, timings = false, tlp_full = false;
  sim->add_option("--sigma", sigma, "noise standard deviation");
  sim->add_option("--outlier-ratio", outlier_ratio, "outlier fraction in [0,1)");
  sim->add_option("--n", n, "dataset size (default m * sample-size)");
  sim->add_option("--m", m, "number of non-minimal samples");
  sim->add_option("--sample-size", sample_size, "points per non-minimal sample");
  sim->add_option("--trials", trials, "Monte-Carlo trials");
  sim->add_option("--rules", rules_arg, "comma-separated scoring rules");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--out", out_path, "output file (.csv or .json)")->required();
  sim->add_option("--iterations", iterations, "RANSAC minimal iterations per sample");
  sim->add_option("--theta-max", theta_max, "mAA threshold ceiling in degrees");
  sim->add_flag("--disjoint", disjoint, "zero-overlap samples (simulation fidelity mode)");
  sim->add_flag("--fixed-sample", fixed_sample, "reuse one sample with an m-times budget");
  sim->add_flag("--timings", timings, "record wall-clock seconds in the output rows");
  sim->add_flag("--tlp-full-dataset", tlp_full, "evaluate TLP over the full dataset");

  // --- corfree ---
  auto* cf = app.add_subcommand("corfree", "correspondence-free registration experiment");
  std::string ply_path;
  int cf_points = 500;
  double cf_overlap = 0.5, cf_sigma = 0.01, cf_target_ratio = 0.0009;
  int cf_m = 10, cf_sample = 10000, cf_trials = 100, cf_theta = 10;
  long long cf_cap = 1000000;
  std::uint64_t cf_seed = 1;
  std::string cf_rules = kDefaultRules, cf_out;
  bool cf_timings = false;
  cf->add_option("--ply", ply_path, "input point cloud (ascii or binary_little_endian)")
      ->required();
  cf->add_option("--points", cf_points, "points per subset");
  cf->add_option("--overlap", cf_overlap, "overlap fraction between the subsets");
  cf->add_option("--sigma", cf_sigma, "noise standard deviation (unit-cube scale)");
  cf->add_option("--m", cf_m, "number of non-minimal samples");
  cf->add_option("--sample-size", cf_sample, "pairs per non-minimal sample");
  cf->add_option("--trials", cf_trials, "Monte-Carlo trials");
  cf->add_option("--rules", cf_rules, "comma-separated scoring rules");
  cf->add_option("--seed", cf_seed, "master seed");
  cf->add_option("--out", cf_out, "output file (.csv or .json)")->required();
  cf->add_option("--target-inlier-ratio", cf_target_ratio, "termination inlier-ratio bar");
  cf->add_option("--hard-cap", cf_cap, "hard cap on drawn triplets per sample");
  cf->add_option("--theta-max", cf_theta, "mAA threshold ceiling in degrees");
  cf->add_flag("--timings", cf_timings, "record wall-clock seconds in the output rows");

  // --- report ---
  auto* rep = app.add_subcommand("report", "aggregate result rows (average mAA layout)");
  std::string rep_in, group_by = "rule,m";
  rep->add_option("--in", rep_in, "input csv")->required();
  rep->add_option("--group-by", group_by, "comma-separated grouping columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      nonsac::GridSpec grid;
      if (problem_arg == "relpose") grid.problem = nonsac::Problem::kRelpose;
      else if (problem_arg == "pnp") grid.problem = nonsac::Problem::kPnp;
      else if (problem_arg == "pcr") grid.problem = nonsac::Problem::kPcr;
      else {
        std::cerr << "unknown problem: " << problem_arg << "\n";
        return 1;
      }
      grid.sigmas = {sigma};
      grid.outlier_ratios = {outlier_ratio};
      grid.m_values = {m};
      grid.sample_size = sample_size;
      grid.dataset_n = n;
      grid.disjoint = disjoint;
      grid.fixed_sample_mode = fixed_sample;
      grid.trials = trials;
      grid.theta_max = theta_max;
      grid.rules = nonsac::parse_rules(rules_arg);
      grid.ransac_iterations = iterations;
      grid.collect_timings = timings;
      grid.tlp_full_dataset = tlp_full;
      const auto results = nonsac::run_grid(grid, seed);
      write_rows(nonsac::rows_of(results), out_path);
      print_summary(results);
    } else if (cf->parsed()) {
      nonsac::CorfreeSpec spec;
      spec.cloud = nonsac::load_ply(ply_path);
      spec.points_per_cloud = cf_points;
      spec.overlap = cf_overlap;
      spec.sigma = cf_sigma;
      spec.m = cf_m;
      spec.sample_size = cf_sample;
      spec.trials = cf_trials;
      spec.theta_max = cf_theta;
      spec.rules = nonsac::parse_rules(cf_rules);
      spec.target_inlier_ratio = cf_target_ratio;
      spec.hard_cap = cf_cap;
      spec.collect_timings = cf_timings;
      const auto results = nonsac::run_corfree(spec, cf_seed);
      write_rows(nonsac::rows_of(results), cf_out);
      // mAA at the thresholds the correspondence-free experiment reports
      for (const auto& r : results) {
        std::cout << "corfree " << r.row.rule << ": median_err="
                  << median_of(r.errors_deg) << " deg";
        for (int t : {5, 10, 15, 20}) {
          std::cout << " mAA(" << t << ")="
                    << nonsac::maa(r.errors_deg, nonsac::MetricConfig{r.row.trials, t});
        }
        std::cout << "\n";
      }
    } else if (rep->parsed()) {
      const auto rows = nonsac::parse_csv(rep_in);
      std::vector<std::string> cols;
      std::size_t pos = 0;
      while (pos <= group_by.size()) {
        const std::size_t c = group_by.find(',', pos);
        cols.push_back(group_by.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
      }
      auto key_of = [&](const nonsac::ResultRow& r) {
        std::string key;
        for (const auto& c : cols) {
          if (!key.empty()) key += ',';
          if (c == "problem") key += r.problem;
          else if (c == "sigma") key += nonsac::metrics_detail::fmt(r.sigma);
          else if (c == "outlier_ratio") key += nonsac::metrics_detail::fmt(r.outlier_ratio);
          else if (c == "m") key += std::to_string(r.m);
          else if (c == "rule") key += r.rule;
          else if (c == "trials") key += std::to_string(r.trials);
          else throw std::runtime_error("unknown group-by column: " + c);
        }
        return key;
      };
      std::vector<std::string> order;
      std::map<std::string, std::pair<double, int>> agg;
      for (const auto& r : rows) {
        const std::string key = key_of(r);
        if (agg.find(key) == agg.end()) order.push_back(key);
        agg[key].first += r.maa;
        agg[key].second += 1;
      }
      std::cout << group_by << ",avg_maa,rows\n";
      for (const auto& key : order) {
        const auto& [sum, count] = agg[key];
        std::cout << key << "," << nonsac::metrics_detail::fmt(sum / count, "%.6f") << ","
                  << count << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
