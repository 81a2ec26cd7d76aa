#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fcgrad/agent/update.hpp"
#include "fcgrad/envs/env.hpp"
#include "fcgrad/testbed/suite.hpp"

namespace fcg::harness {

// Plain-text configuration: one `key = value` per line, '#' starts a
// comment, lists are comma-separated. Keys are listed by config_keys().
// Values not set explicitly take per-environment defaults in resolve().
struct ExperimentConfig {
  envs::EnvKind env = envs::EnvKind::Coins;
  agent::Method method = agent::Method::FCGrad;
  double beta = 0.5;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};

  std::size_t num_envs = 16;
  std::size_t rollout_length = 200;
  std::size_t total_updates = 300;
  std::size_t ppo_epochs = 2;
  std::size_t minibatches = 8;
  std::size_t hidden = 64;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 1e-4;
  bool anneal_lr = true;
  double entropy_coef = 0.1;
  double value_coef = 0.1;
  double grad_clip = 0.5;
  double aga_lambda = 1.0;
  double hvp_eps = 1e-4;
  double ia_alpha = 5.0;
  double ia_beta = 0.05;
  bool critic_values = false;

  std::size_t eval_every = 25;
  std::size_t eval_episodes = 32;
  bool greedy_eval = false;
  bool shift_negative = false;

  // 0 picks min(hardware threads, seeds). Results do not depend on it.
  std::size_t threads = 0;
  bool save_checkpoints = true;
  // Empty means derived from env, method and beta.
  std::string run_id;

  envs::EnvConfig env_cfg;
  std::string layout_file;

  testbed::SuiteConfig suite;

  std::set<std::string> explicit_keys;

  // Sets a key from its text form; throws Error(Config) on unknown keys or
  // malformed values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  // Fills unset keys with per-environment defaults and loads layout_file.
  void resolve();
  // Throws Error(Config) on out-of-range values.
  void validate() const;
  std::string dump() const;

  std::string effective_run_id() const;
  agent::UpdateConfig update_config() const;
};

std::vector<std::string> config_keys();

// Applies `key = value` lines from text.
void apply_config_text(ExperimentConfig& cfg, std::string_view text,
                       const std::string& source);
void load_config_file(ExperimentConfig& cfg, const std::string& path);
// "KEY=VALUE".
void apply_override(ExperimentConfig& cfg, std::string_view kv);

}  // namespace fcg::harness
