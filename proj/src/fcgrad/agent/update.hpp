#pragma once

#include <array>
#include <string_view>

#include "fcgrad/agent/network.hpp"
#include "fcgrad/agent/optim.hpp"
#include "fcgrad/agent/ppo.hpp"

namespace fcg::agent {

enum class Method { Col, Ind, IA, Weighted, PCGrad, AgA, FCGrad };

std::string_view method_name(Method m);
// Case-insensitive.
Method parse_method(std::string_view s);

struct UpdateConfig {
  double clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double grad_clip = 0.5;
  double beta = 0.5;
  double aga_lambda = 1.0;
  double hvp_eps = 1e-4;
  std::size_t epochs = 2;
  std::size_t minibatches = 8;
  // Compare critic means instead of empirical discounted returns in the
  // FCGrad branch test.
  bool critic_values = false;
};

struct AgentState {
  PolicyNetwork net;
  Adam policy_opt;
  Adam value_opt;

  explicit AgentState(const NetShape& shape);
  AgentState() = default;
};

struct StepDiagnostics {
  gradcore::CombineResult combine;
  double policy_grad_norm = 0.0;
  double value_grad_norm = 0.0;
};

// One optimizer step on a minibatch. For IA the batch's individual stream
// must already carry shaped rewards; the update itself is the Ind update.
StepDiagnostics update_agent(AgentState& agent, const TrajectoryBatch& minibatch,
                             Method method, const UpdateConfig& cfg, double lr,
                             double v_ind, double v_col);

struct UpdateStats {
  std::size_t steps = 0;
  std::size_t conflicts = 0;
  // Indexed by gradcore::Branch.
  std::array<std::size_t, 4> branches{};
  double v_ind = 0.0;
  double v_col = 0.0;
};

// Normalises both advantage streams over the whole batch, then runs
// cfg.epochs passes of cfg.minibatches shuffled minibatch steps.
UpdateStats ppo_update(AgentState& agent, TrajectoryBatch& batch,
                       Method method, const UpdateConfig& cfg, double lr,
                       Rng& shuffle_rng);

}  // namespace fcg::agent
