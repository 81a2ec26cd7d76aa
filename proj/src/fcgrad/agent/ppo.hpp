#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fcgrad/agent/network.hpp"

namespace fcg::agent {

// One agent's experience. Samples are stored segment-major: segment s (one
// environment) occupies [s * segment_length, (s + 1) * segment_length) in
// time order.
struct TrajectoryBatch {
  Matrix obs;  // obs_dim x N
  std::vector<int> actions;
  std::vector<double> logp;  // log-probability at collection time
  std::vector<double> reward_ind;
  std::vector<double> reward_col;
  std::vector<double> value_ind;
  std::vector<double> value_col;
  std::vector<std::uint8_t> done;  // episode ended after this step

  std::vector<double> adv_ind, adv_col;
  std::vector<double> ret_ind, ret_col;
  // Empirical discounted reward-to-go, no critic involved.
  std::vector<double> disc_ind, disc_col;
  bool has_advantages = false;

  std::size_t size() const { return actions.size(); }
  void resize(std::size_t obs_dim, std::size_t n);
  // Copy of the selected samples (advantages and returns included).
  TrajectoryBatch gather(std::span<const std::size_t> idx) const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma v_{t+1} (1 - done_t) - v_t,
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}, returns = A + v.
// v_T is `bootstrap`.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values, double bootstrap,
                      double gamma, double lambda,
                      std::span<const std::uint8_t> done);

// Discounted reward-to-go, reset at episode ends, zero beyond the segment.
std::vector<double> discounted_returns(std::span<const double> rewards,
                                       double gamma,
                                       std::span<const std::uint8_t> done);

// Fills advantages, returns and discounted returns of both streams for a
// segment-major batch. Bootstraps hold one value per segment.
void finish_batch(TrajectoryBatch& batch, std::size_t segment_length,
                  std::span<const double> bootstrap_ind,
                  std::span<const double> bootstrap_col, double gamma,
                  double lambda);

// Zero mean, unit variance. A (near-)constant vector is only centred.
void normalize(std::vector<double>& v);

enum class Stream { Individual, Collective };

struct SurrogateOptions {
  double clip = 0.2;
  double entropy_coef = 0.0;
};

// Mean clipped surrogate of one stream plus entropy_coef * mean entropy.
double ppo_surrogate(const PolicyNetwork& net, const TrajectoryBatch& batch,
                     Stream stream, const SurrogateOptions& opts);

struct PolicyGradients {
  ParamVector g_ind;
  ParamVector g_col;
  double surrogate_ind = 0.0;
  double surrogate_col = 0.0;
  double entropy = 0.0;
};

// Ascent gradients of ppo_surrogate for both streams from one forward pass.
// The entropy term, when enabled, appears in both.
// `fwd`, when given, must be net.forward(batch.obs).
PolicyGradients ppo_policy_gradients(const PolicyNetwork& net,
                                     const TrajectoryBatch& batch,
                                     const SurrogateOptions& opts,
                                     const Forward* fwd = nullptr);
ParamVector ppo_policy_gradient(const PolicyNetwork& net,
                                const TrajectoryBatch& batch, Stream stream,
                                double clip);

// c_v * (MSE(v_ind, ret_ind) + MSE(v_col, ret_col)).
double value_loss(const PolicyNetwork& net, const TrajectoryBatch& batch,
                  double value_coef);
// Descent gradient of value_loss over value_params. The encoder is held
// fixed here; it is trained through the policy objective only.
ParamVector value_gradient(const PolicyNetwork& net,
                           const TrajectoryBatch& batch, double value_coef,
                           const Forward* fwd = nullptr);

// r'_i = r_i - a/(N-1) sum_j max(r_j - r_i, 0) - b/(N-1) sum_j max(r_i - r_j, 0)
std::vector<double> inequity_aversion_shape(std::span<const double> rewards,
                                            double alpha_ia, double beta_ia);

}  // namespace fcg::agent
