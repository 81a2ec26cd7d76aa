#include "fcgrad/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fcgrad/common/error.hpp"

namespace fcg::metrics {

namespace {

void check_input(std::span<const double> r) {
  require(!r.empty(), "metrics need at least one return");
  for (double x : r) require(std::isfinite(x), "metrics need finite returns");
}

}  // namespace

double alpha_fairness(std::span<const double> returns, double alpha) {
  check_input(returns);
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
  double s = 0.0;
  if (alpha == 1.0) {
    for (double r : returns) {
      require(r > 0.0, "log utility needs positive returns", ErrorCode::Domain);
      s += std::log(r);
    }
    return s;
  }
  const double e = 1.0 - alpha;
  for (double r : returns) {
    if (alpha > 1.0)
      require(r > 0.0, "alpha > 1 needs positive returns", ErrorCode::Domain);
    else
      require(r >= 0.0, "alpha-fairness needs nonnegative returns",
              ErrorCode::Domain);
    s += std::pow(r, e) / e;
  }
  return s;
}

double gini(std::span<const double> returns) {
  check_input(returns);
  double total = 0.0;
  for (double r : returns) total += r;
  if (total == 0.0) return 0.0;
  double pair = 0.0;
  for (double a : returns)
    for (double b : returns) pair += std::abs(a - b);
  return pair / (2.0 * double(returns.size()) * total);
}

double jain(std::span<const double> returns) {
  check_input(returns);
  double s = 0.0, sq = 0.0;
  for (double r : returns) {
    s += r;
    sq += r * r;
  }
  if (sq == 0.0) return 1.0;
  return s * s / (double(returns.size()) * sq);
}

FairnessReport report(std::span<const double> returns,
                      const ReportOptions& opts) {
  check_input(returns);
  FairnessReport rep;
  rep.per_agent_returns.assign(returns.begin(), returns.end());
  const double n = double(returns.size());
  double s = 0.0;
  for (double r : returns) {
    s += r;
    rep.sum_log += std::log(std::max(r, kGeoMeanFloor));
    if (r < 0.0) rep.has_negative = true;
  }
  rep.mean = s / n;
  rep.geomean = std::exp(rep.sum_log / n);
  rep.min = *std::min_element(returns.begin(), returns.end());
  if (opts.shift_negative && rep.min < 0.0) {
    std::vector<double> shifted(returns.begin(), returns.end());
    for (double& r : shifted) r -= rep.min;
    rep.gini = gini(shifted);
    rep.jain = jain(shifted);
  } else {
    rep.gini = gini(returns);
    rep.jain = jain(returns);
  }
  for (double a : opts.alphas) {
    try {
      rep.alpha_utilities[a] = alpha_fairness(returns, a);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Domain) throw;
      rep.alpha_utilities[a] = -INFINITY;
    }
  }
  return rep;
}

}  // namespace fcg::metrics
