#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fcgrad/agent/update.hpp"
#include "fcgrad/envs/env.hpp"
#include "fcgrad/harness/config.hpp"
#include "fcgrad/harness/results.hpp"
#include "fcgrad/metrics/metrics.hpp"

namespace fcg::harness {

struct EvalResult {
  metrics::FairnessReport report;
  // Per agent, averaged over episodes.
  std::vector<double> apples;
  std::vector<double> coins_own;
  std::vector<double> coins_other;
  std::vector<double> waste_cleaned;
  std::size_t episodes = 0;
};

// Runs `episodes` full episodes with frozen policies. Deterministic in
// (agents, cfg, stream_seed).
EvalResult evaluate(const ExperimentConfig& cfg,
                    const std::vector<agent::AgentState>& agents,
                    std::size_t episodes, std::uint64_t stream_seed);

std::vector<agent::AgentState> init_agents(const ExperimentConfig& cfg,
                                           std::uint64_t seed);

struct SeedRun {
  std::vector<ResultRow> rows;
  std::vector<agent::AgentState> agents;
  // Largest deviation seen between the collective reward and the mean of
  // the individual rewards.
  double collective_bookkeeping_error = 0.0;
};

SeedRun train_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// All seeds, concurrently; rows come back in seed-list order.
std::vector<SeedRun> train_all(const ExperimentConfig& cfg);

}  // namespace fcg::harness
