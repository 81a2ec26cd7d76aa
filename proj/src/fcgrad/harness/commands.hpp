#pragma once

#include <string>
#include <vector>

#include "fcgrad/harness/config.hpp"
#include "fcgrad/harness/train.hpp"
#include "fcgrad/testbed/suite.hpp"

namespace fcg::harness {

// All commands take a resolved, validated config and write into out_dir,
// creating it when needed. Filesystem failures raise Error(Io).

// Writes verify.csv. The caller decides the exit status from report.ok().
testbed::SuiteReport cmd_verify(const ExperimentConfig& cfg,
                                const std::string& out_dir);

// Writes results.csv, config.resolved.txt and, when save_checkpoints is set,
// checkpoints/<run_id>-seed<S>.ckpt.
std::vector<SeedRun> cmd_train(const ExperimentConfig& cfg,
                               const std::string& out_dir);

struct EvalOutcome {
  EvalResult result;
  std::vector<ResultRow> rows;
};

// Writes eval.csv (results schema) and events.csv. episodes must be >= 1.
EvalOutcome cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint,
                     std::size_t episodes, std::uint64_t seed,
                     const std::string& out_dir);

struct SweepPoint {
  double beta = 0.0;
  // Final GeoMean per seed, in seed-list order.
  std::vector<double> final_geomean;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// One cmd_train per beta under out_dir/beta-<value>/, plus sweep.csv.
std::vector<SweepPoint> cmd_sweep_beta(const ExperimentConfig& cfg,
                                       const std::vector<double>& betas,
                                       const std::string& out_dir);

// Reads results CSVs and writes one SVG per metric plus overview.svg.
// Returns the paths written.
std::vector<std::string> cmd_plot(const std::vector<std::string>& csv_paths,
                                  const std::string& out_dir);

// Final evaluation row per seed (agent 0 carries the aggregates).
std::vector<ResultRow> final_rows(const std::vector<SeedRun>& runs);

}  // namespace fcg::harness
