#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonsac/geometry.hpp"

namespace nonsac {

// One per-sample estimation result as seen by the selection rules.
struct HypothesisRecord {
  int sample_index = 0;
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int n_inliers = 0;
  std::vector<double> inlier_residuals;
  std::vector<double> sample_residuals;
  bool failed = false;
};

enum class RuleKind {
  kIdeal,
  kFixedSample,
  kMostInliers,
  kClosestPair,
  kClosestTriplet,
  kMinMean,
  kMinMedian,
  kMinQ3,
  kPairCost,
  kTlpCost,
};

struct ScoringRule {
  RuleKind kind = RuleKind::kMostInliers;
  double k = 0.1;    // pair-cost exponent
  double p = 0.1;    // TLP exponent
  double tau = 0.0;  // TLP truncation; 0 defers to the estimator threshold

  std::string name() const {
    auto num = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", v);
      return std::string(buf);
    };
    switch (kind) {
      case RuleKind::kIdeal: return "ideal";
      case RuleKind::kFixedSample: return "fixed-sample";
      case RuleKind::kMostInliers: return "most-inliers";
      case RuleKind::kClosestPair: return "closest-pair";
      case RuleKind::kClosestTriplet: return "closest-triplet";
      case RuleKind::kMinMean: return "min-mean";
      case RuleKind::kMinMedian: return "min-median";
      case RuleKind::kMinQ3: return "min-q3";
      case RuleKind::kPairCost: return "pair:" + num(k);
      case RuleKind::kTlpCost: return "tlp:" + num(p);
    }
    return "?";
  }
};

inline ScoringRule parse_rule(const std::string& token) {
  ScoringRule r;
  if (token == "ideal") r.kind = RuleKind::kIdeal;
  else if (token == "fixed-sample") r.kind = RuleKind::kFixedSample;
  else if (token == "most-inliers") r.kind = RuleKind::kMostInliers;
  else if (token == "closest-pair") r.kind = RuleKind::kClosestPair;
  else if (token == "closest-triplet") r.kind = RuleKind::kClosestTriplet;
  else if (token == "min-mean") r.kind = RuleKind::kMinMean;
  else if (token == "min-median") r.kind = RuleKind::kMinMedian;
  else if (token == "min-q3") r.kind = RuleKind::kMinQ3;
  else if (token.rfind("pair:", 0) == 0) {
    r.kind = RuleKind::kPairCost;
    r.k = std::stod(token.substr(5));
    if (!(r.k > 0)) throw std::invalid_argument("pair cost: k must be > 0");
  } else if (token.rfind("tlp:", 0) == 0) {
    r.kind = RuleKind::kTlpCost;
    r.p = std::stod(token.substr(4));
    if (!(r.p > 0)) throw std::invalid_argument("tlp cost: p must be > 0");
  } else {
    throw std::invalid_argument("unknown scoring rule: " + token);
  }
  return r;
}

inline std::vector<ScoringRule> parse_rules(const std::string& csv) {
  std::vector<ScoringRule> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                                       : comma - pos);
    if (!tok.empty()) out.push_back(parse_rule(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty rule list");
  return out;
}

// Linear-interpolation quantile: q*(len-1) indexes the sorted list
// fractionally.
inline double quartile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quartile: empty list");
  if (q < 0 || q > 1) throw std::invalid_argument("quartile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - lo;
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

// Residuals of every hypothesis over one shared evaluation set, for TLP.
struct TlpEvalContext {
  std::vector<std::vector<double>> residuals;  // [hypothesis][eval point]
};

struct Selection {
  int selected = -1;
  // per-hypothesis diagnostic score in the rule's own units (NaN when the
  // rule does not define one for that hypothesis)
  std::vector<double> scores;
};

namespace scoring_detail {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kDistClampDeg = 1e-9;  // identical models; keeps pair cost finite

// larger n_i, then smaller sample_index
inline bool tie_prefer(const HypothesisRecord& a, const HypothesisRecord& b) {
  if (a.n_inliers != b.n_inliers) return a.n_inliers > b.n_inliers;
  return a.sample_index < b.sample_index;
}

inline int require_usable(const std::vector<HypothesisRecord>& hs, const char* rule, int need,
                          std::vector<int>* usable) {
  usable->clear();
  for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
    if (!hs[i].failed) usable->push_back(i);
  }
  if (static_cast<int>(usable->size()) < need) {
    throw std::invalid_argument(std::string(rule) + ": needs >= " + std::to_string(need) +
                                " non-failed hypotheses, have " +
                                std::to_string(usable->size()));
  }
  return static_cast<int>(usable->size());
}

}  // namespace scoring_detail

// Deterministic hypothesis selection for one rule. TLP requires eval; ideal
// requires the ground-truth rotation.
inline Selection select(const std::vector<HypothesisRecord>& hypotheses, const ScoringRule& rule,
                        const TlpEvalContext* eval = nullptr,
                        const Rotation* gt_rotation = nullptr) {
  using namespace scoring_detail;
  const int m = static_cast<int>(hypotheses.size());
  Selection sel;
  sel.scores.assign(m, kNan);
  std::vector<int> usable;

  auto pick_min = [&](auto value_of, const char* rule_name) {
    require_usable(hypotheses, rule_name, 1, &usable);
    int best = -1;
    double best_v = 0.0;
    for (int i : usable) {
      const double v = value_of(i);
      sel.scores[i] = v;
      if (std::isnan(v)) continue;
      if (best < 0 || v < best_v ||
          (v == best_v && tie_prefer(hypotheses[i], hypotheses[best]))) {
        best = i;
        best_v = v;
      }
    }
    if (best < 0) {
      throw std::invalid_argument(std::string(rule_name) +
                                  ": no hypothesis with a defined statistic");
    }
    sel.selected = best;
  };

  auto dist = [&](int i, int j) {
    return std::max(rotation_distance_deg(hypotheses[i].rotation, hypotheses[j].rotation),
                    kDistClampDeg);
  };

  switch (rule.kind) {
    case RuleKind::kIdeal: {
      if (gt_rotation == nullptr) throw std::invalid_argument("ideal: ground truth required");
      pick_min([&](int i) { return rotation_distance_deg(hypotheses[i].rotation, *gt_rotation); },
               "ideal");
      break;
    }
    case RuleKind::kFixedSample:
    case RuleKind::kMostInliers: {
      const char* name = rule.kind == RuleKind::kFixedSample ? "fixed-sample" : "most-inliers";
      require_usable(hypotheses, name, 1, &usable);
      int best = -1;
      for (int i : usable) {
        sel.scores[i] = hypotheses[i].n_inliers;
        if (best < 0 || tie_prefer(hypotheses[i], hypotheses[best])) best = i;
      }
      sel.selected = best;
      break;
    }
    case RuleKind::kClosestPair: {
      require_usable(hypotheses, "closest-pair", 2, &usable);
      int bi = -1, bj = -1;
      double bd = 0.0;
      for (std::size_t a = 0; a < usable.size(); ++a) {
        for (std::size_t b = a + 1; b < usable.size(); ++b) {
          const double d = dist(usable[a], usable[b]);
          sel.scores[usable[a]] = std::isnan(sel.scores[usable[a]])
                                      ? d
                                      : std::min(sel.scores[usable[a]], d);
          sel.scores[usable[b]] = std::isnan(sel.scores[usable[b]])
                                      ? d
                                      : std::min(sel.scores[usable[b]], d);
          if (bi < 0 || d < bd) {
            bd = d;
            bi = usable[a];
            bj = usable[b];
          }
        }
      }
      sel.selected = tie_prefer(hypotheses[bi], hypotheses[bj]) ? bi : bj;
      break;
    }
    case RuleKind::kClosestTriplet: {
      require_usable(hypotheses, "closest-triplet", 3, &usable);
      int t[3] = {-1, -1, -1};
      double bd = 0.0;
      for (std::size_t a = 0; a < usable.size(); ++a) {
        for (std::size_t b = a + 1; b < usable.size(); ++b) {
          const double dab = dist(usable[a], usable[b]);
          for (std::size_t c = b + 1; c < usable.size(); ++c) {
            const double d = std::max({dab, dist(usable[a], usable[c]),
                                       dist(usable[b], usable[c])});
            if (t[0] < 0 || d < bd) {
              bd = d;
              t[0] = usable[a];
              t[1] = usable[b];
              t[2] = usable[c];
            }
          }
        }
      }
      int best = t[0];
      for (int i : {t[1], t[2]}) {
        if (tie_prefer(hypotheses[i], hypotheses[best])) best = i;
      }
      for (int i : t) sel.scores[i] = bd;
      sel.selected = best;
      break;
    }
    case RuleKind::kMinMean: {
      pick_min(
          [&](int i) -> double {
            const auto& r = hypotheses[i].inlier_residuals;
            if (r.empty()) return kNan;  // no inliers: undefined, skipped
            double s = 0.0;
            for (double v : r) s += v;
            return s / r.size();
          },
          "min-mean");
      break;
    }
    case RuleKind::kMinMedian: {
      pick_min(
          [&](int i) -> double {
            const auto& r = hypotheses[i].inlier_residuals;
            return r.empty() ? kNan : quartile(r, 0.5);
          },
          "min-median");
      break;
    }
    case RuleKind::kMinQ3: {
      pick_min(
          [&](int i) -> double {
            const auto& r = hypotheses[i].inlier_residuals;
            return r.empty() ? kNan : quartile(r, 0.75);
          },
          "min-q3");
      break;
    }
    case RuleKind::kPairCost: {
      require_usable(hypotheses, "pair-cost", 2, &usable);
      int bi = -1, bj = -1;
      double bc = 0.0;
      for (std::size_t a = 0; a < usable.size(); ++a) {
        for (std::size_t b = a + 1; b < usable.size(); ++b) {
          const int i = usable[a], j = usable[b];
          const double c =
              std::max(hypotheses[i].n_inliers, hypotheses[j].n_inliers) /
              std::pow(dist(i, j), rule.k);
          sel.scores[i] = std::isnan(sel.scores[i]) ? c : std::max(sel.scores[i], c);
          sel.scores[j] = std::isnan(sel.scores[j]) ? c : std::max(sel.scores[j], c);
          if (bi < 0 || c > bc) {
            bc = c;
            bi = i;
            bj = j;
          }
        }
      }
      sel.selected = tie_prefer(hypotheses[bi], hypotheses[bj]) ? bi : bj;
      break;
    }
    case RuleKind::kTlpCost: {
      if (eval == nullptr) throw std::invalid_argument("tlp: evaluation context required");
      if (eval->residuals.size() != hypotheses.size()) {
        throw std::invalid_argument("tlp: evaluation context size mismatch");
      }
      if (!(rule.tau > 0)) throw std::invalid_argument("tlp: truncation threshold must be > 0");
      const double tau_p = std::pow(rule.tau, rule.p);
      pick_min(
          [&](int i) -> double {
            double c = 0.0;
            for (double r : eval->residuals[i]) {
              c += std::min(std::pow(std::abs(r), rule.p), tau_p);
            }
            return c;
          },
          "tlp");
      break;
    }
  }
  return sel;
}

}  // namespace nonsac
