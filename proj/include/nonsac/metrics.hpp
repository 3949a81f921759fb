#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace nonsac {

struct MetricConfig {
  int trials = 100;   // N_s
  int theta_max = 10;  // integer-degree thresholds 1..theta_max

  void validate() const {
    if (trials < 1) throw std::invalid_argument("metric: trials must be >= 1");
    if (theta_max < 1) throw std::invalid_argument("metric: theta_max must be >= 1");
  }
};

// Mean average accuracy: (1/(theta_max*N_s)) sum_{theta=1..theta_max}
// sum_trials [e < theta]. Failed trials enter as +inf and miss every
// threshold. Accumulated in integers so the result is exactly reproducible.
inline double maa(const std::vector<double>& errors_deg, const MetricConfig& config) {
  config.validate();
  if (errors_deg.empty()) throw std::invalid_argument("maa: empty error list");
  const int t = config.theta_max;
  long long hits = 0;
  for (double e : errors_deg) {
    if (!(e < t)) continue;  // covers +inf and NaN
    const int f = e <= 0 ? 0 : static_cast<int>(std::floor(e));
    hits += t - std::min(f, t);
  }
  return static_cast<double>(hits) /
         (static_cast<double>(t) * static_cast<double>(errors_deg.size()));
}

struct ResultRow {
  std::string problem;
  double sigma = 0.0;
  double outlier_ratio = 0.0;
  int m = 0;
  std::string rule;
  double maa = 0.0;
  int trials = 0;
  double seconds = 0.0;
};

namespace metrics_detail {

inline std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace metrics_detail

inline std::string csv_header() { return "problem,sigma,outlier_ratio,m,rule,maa,trials,seconds"; }

inline std::string to_csv_line(const ResultRow& r) {
  using metrics_detail::fmt;
  return r.problem + "," + fmt(r.sigma) + "," + fmt(r.outlier_ratio) + "," + std::to_string(r.m) +
         "," + r.rule + "," + fmt(r.maa, "%.6f") + "," + std::to_string(r.trials) + "," +
         fmt(r.seconds, "%.6f");
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << csv_header() << "\n";
  for (const auto& r : rows) out << to_csv_line(r) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void emit_json(const std::vector<ResultRow>& rows, const std::string& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"problem", r.problem},
                   {"sigma", r.sigma},
                   {"outlier_ratio", r.outlier_ratio},
                   {"m", r.m},
                   {"rule", r.rule},
                   {"maa", r.maa},
                   {"trials", r.trials},
                   {"seconds", r.seconds}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << arr.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<ResultRow> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      f.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (f.size() != 8) throw std::runtime_error("malformed csv row: " + line);
    ResultRow r;
    r.problem = f[0];
    r.sigma = std::stod(f[1]);
    r.outlier_ratio = std::stod(f[2]);
    r.m = std::stoi(f[3]);
    r.rule = f[4];
    r.maa = std::stod(f[5]);
    r.trials = std::stoi(f[6]);
    r.seconds = std::stod(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace nonsac
