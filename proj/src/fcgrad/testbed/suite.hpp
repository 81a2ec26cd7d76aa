#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcgrad/testbed/testbed.hpp"

namespace fcg::testbed {

struct SuiteConfig {
  std::size_t instances = 20;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
  // Instance i uses dims[i % dims.size()].
  std::vector<std::size_t> dims{2, 10};
  std::size_t steps = 2000;
  double curvature = 1.0;
  double center_box = 2.0;
  double start_box = 3.0;
  double beta = 0.8;
  // GapScaled rule with c = step_scale / L.
  double step_scale = 0.4;
  double gap_epsilon = 1e-3;
  double tail_fraction = 0.1;
  double monotone_tol = 1e-10;
  double lyapunov_tol = 1e-9;
  std::size_t lemma_trials = 10;
  std::size_t consistency_points = 100;
  // Weighted must fail the gap check on at least this fraction of instances.
  double negative_control_fraction = 0.75;
  std::uint64_t master_seed = 20250;
};

struct SuiteRecord {
  std::string check;
  std::string combiner;
  std::size_t instance = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  // false for negative controls, which are expected to fail.
  bool expected_pass = true;
  bool passed = false;
  bool skipped = false;
  double worst_margin = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::vector<SuiteRecord> records;
  std::size_t negative_control_failures = 0;  // instances where Weighted failed
  bool negative_control_ok = true;
  std::vector<std::string> warnings;

  // Every expected-pass check passed (or was skipped) and the negative
  // control behaved as expected.
  bool ok() const;
};

struct SuiteInstance {
  ParamVector center_ind;
  ParamVector center_col;
  SmoothBiObjective objective;
};

SuiteInstance make_suite_instance(const SuiteConfig& cfg, std::size_t index);
ParamVector suite_start_point(const SuiteConfig& cfg, std::size_t index,
                              std::size_t dim, std::uint64_t seed);

SuiteReport run_suite(const SuiteConfig& cfg);

void write_suite_csv(const SuiteReport& report, const std::string& path);

}  // namespace fcg::testbed
