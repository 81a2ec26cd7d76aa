#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fcg::harness {

// One row per (evaluation point, agent). The fairness aggregates repeat on
// every agent row of the same evaluation point. geomean floors each return
// at 1e-6 before averaging logs.
struct ResultRow {
  std::string run_id;
  std::string env;
  std::string method;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t update = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t agent_id = 0;
  double episodic_return = 0.0;
  double mean = 0.0;
  double geomean = 0.0;
  double min = 0.0;
  double gini = 0.0;
  double jain = 0.0;
  double conflict_rate = 0.0;
  double branch_blend = 0.0;
  double branch_proj_ind = 0.0;
  double branch_proj_col = 0.0;
};

const std::vector<std::string>& result_columns();

void write_results(const std::vector<ResultRow>& rows, const std::string& path);
// Throws Error(Io) with the line number on malformed rows and names missing
// columns.
std::vector<ResultRow> read_results(const std::string& path);

}  // namespace fcg::harness
