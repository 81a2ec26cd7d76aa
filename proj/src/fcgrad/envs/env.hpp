#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fcgrad/envs/grid.hpp"

namespace fcg::envs {

enum class EnvKind { Coins, Cleanup, Harvest };

std::string_view env_name(EnvKind k);
// Accepts "coins", "cleanup", "harvest" (case-insensitive).
EnvKind parse_env_kind(std::string_view s);

struct EnvConfig {
  // Empty means the embedded default for the environment.
  std::string layout;
  int episode_length = 200;
  int view_radius = 2;

  // Coins
  double p_green = 15.0 / 16.0;
  double coin_penalty = 2.0;

  // Cleanup
  double p_waste = 0.5;
  // Waste density (fraction of river cells) at which apples stop growing.
  double waste_threshold = 0.4;
  double p_apple = 0.25;

  // Harvest: regrowth probability by neighbour count 0, 1, 2, >=3.
  std::array<double, 4> regrow{0.0, 0.005, 0.02, 0.05};
  int regrow_radius = 2;
};

struct EventCounters {
  int coins_own = 0;
  int coins_other = 0;
  int apples = 0;
  int waste_cleaned = 0;
};

struct StepOutcome {
  // Agent-major, obs_dim values per agent.
  std::vector<double> observations;
  std::vector<double> rewards;
  bool done = false;
  std::vector<EventCounters> info;
};

// Single-owner simulator. reset() must be called before step().
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  virtual int num_actions() const = 0;
  std::size_t num_agents() const { return layout_.spawns.size(); }
  std::size_t obs_dim() const;

  // Returns agent-major observations.
  const std::vector<double>& reset(std::uint64_t seed);
  const StepOutcome& step(std::span<const int> actions);
  bool done() const { return state_.step_count >= state_.episode_length; }

  void observe(std::size_t agent, std::span<double> out) const;
  std::string render() const;

  const GridWorld& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  // Cell kinds, in channel order, used for the observation one-hot.
  std::span<const Cell> channels() const { return channels_; }

 protected:
  Environment(EnvConfig cfg, Layout layout, std::vector<Cell> channels);

  virtual void on_reset() = 0;
  // Called after movement; fills rewards and info for this step.
  virtual void on_step(std::span<const int> actions,
                       std::span<const int> order, StepOutcome& out) = 0;

  // Uniform over empty, unoccupied cells, restricted to one region when
  // given. Returns false when no such cell exists.
  bool random_free_cell(Pos& out, std::optional<Cell> region = std::nullopt);

  EnvConfig cfg_;
  Layout layout_;
  GridWorld state_;

 private:
  void fill_observations();

  std::vector<Cell> channels_;
  std::array<int, kNumCellKinds> channel_of_{};
  StepOutcome outcome_;
  std::vector<int> order_;
};

std::unique_ptr<Environment> make_env(EnvKind kind, const EnvConfig& cfg = {});

std::string_view default_layout(EnvKind kind);

}  // namespace fcg::envs
