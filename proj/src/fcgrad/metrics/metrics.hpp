#pragma once

#include <map>
#include <span>
#include <vector>

namespace fcg::metrics {

// Floor applied to each return before taking the geometric mean.
inline constexpr double kGeoMeanFloor = 1e-6;

struct FairnessReport {
  std::vector<double> per_agent_returns;
  double mean = 0.0;
  double geomean = 0.0;
  // Sum of log(max(r, floor)); the alpha = 1 utility on clamped returns.
  double sum_log = 0.0;
  double min = 0.0;
  double gini = 0.0;
  double jain = 1.0;
  // Set when some return is negative; gini and jain are then reported on the
  // raw values and fall outside their usual ranges.
  bool has_negative = false;
  std::map<double, double> alpha_utilities;
};

// sum r^(1-a)/(1-a), or sum log r at a = 1. Throws Domain for a nonpositive
// return when alpha >= 1.
double alpha_fairness(std::span<const double> returns, double alpha);

// All-zero input is defined as perfectly equal: gini 0, jain 1.
double gini(std::span<const double> returns);
double jain(std::span<const double> returns);

struct ReportOptions {
  // Shift returns so the smallest is 0 before computing gini and jain.
  bool shift_negative = false;
  std::vector<double> alphas;
};

FairnessReport report(std::span<const double> returns,
                      const ReportOptions& opts = {});

}  // namespace fcg::metrics
