#include "fcgrad/envs/env.hpp"

#include <algorithm>
#include <cctype>

#include "fcgrad/common/error.hpp"

namespace fcg::envs {

std::string_view env_name(EnvKind k) {
  switch (k) {
    case EnvKind::Coins: return "coins";
    case EnvKind::Cleanup: return "cleanup";
    case EnvKind::Harvest: return "harvest";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = char(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "coins") return EnvKind::Coins;
  if (lower == "cleanup") return EnvKind::Cleanup;
  if (lower == "harvest") return EnvKind::Harvest;
  throw Error(ErrorCode::Config, "unknown env '" + std::string(s) + "'");
}

Environment::Environment(EnvConfig cfg, Layout layout,
                         std::vector<Cell> channels)
    : cfg_(std::move(cfg)), layout_(std::move(layout)),
      channels_(std::move(channels)) {
  require(cfg_.episode_length >= 1, "episode_length must be >= 1",
          ErrorCode::Config);
  require(cfg_.view_radius >= 0, "view_radius must be >= 0", ErrorCode::Config);
  require(!layout_.spawns.empty(), "layout has no agent spawns",
          ErrorCode::Config);
  channel_of_.fill(-1);
  for (std::size_t i = 0; i < channels_.size(); ++i)
    channel_of_[std::size_t(channels_[i])] = int(i);
  for (const Pos& p : layout_.spawns)
    require(layout_.at(p.x, p.y) == Cell::Empty,
            "spawn must be on an empty, non-region cell", ErrorCode::Config);
  order_.resize(num_agents());
}

std::size_t Environment::obs_dim() const {
  const std::size_t side = std::size_t(2 * cfg_.view_radius + 1);
  return side * side * (channels_.size() + 2);
}

const std::vector<double>& Environment::reset(std::uint64_t seed) {
  GridWorld& s = state_;
  s.width = layout_.width;
  s.height = layout_.height;
  s.cells.assign(layout_.cells.size(), Cell::Empty);
  s.region.assign(layout_.cells.size(), Cell::Empty);
  for (std::size_t i = 0; i < layout_.cells.size(); ++i) {
    const Cell c = layout_.cells[i];
    if (c == Cell::River || c == Cell::Orchard)
      s.region[i] = c;
    else
      s.cells[i] = c;
  }
  s.agent_spawns = layout_.spawns;
  s.agent_positions = layout_.spawns;
  s.facing.assign(num_agents(), Down);
  s.rng = Rng::stream(seed, {kStreamEnv});
  s.step_count = 0;
  s.episode_length = cfg_.episode_length;
  on_reset();
  outcome_.done = false;
  outcome_.rewards.assign(num_agents(), 0.0);
  outcome_.info.assign(num_agents(), EventCounters{});
  fill_observations();
  return outcome_.observations;
}

const StepOutcome& Environment::step(std::span<const int> actions) {
  require(!state_.agent_positions.empty(), "step before reset");
  require(!done(), "step called on a finished episode");
  require(actions.size() == num_agents(), "one action per agent required");
  for (int a : actions)
    require(a >= 0 && a < num_actions(), "action out of range");

  GridWorld& s = state_;
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = int(i);
  s.rng.shuffle(std::span<int>(order_));

  // Sequential resolution in the drawn order: a move into a wall, outside
  // the grid, or into a cell held by another agent at that moment is a Stay.
  for (int i : order_) {
    const int a = actions[std::size_t(i)];
    if (a > Right) continue;
    s.facing[std::size_t(i)] = a;
    const Pos target = moved(s.agent_positions[std::size_t(i)], a);
    if (s.cell(target) == Cell::Wall) continue;
    if (s.agent_at(target) >= 0) continue;
    s.agent_positions[std::size_t(i)] = target;
  }

  std::fill(outcome_.rewards.begin(), outcome_.rewards.end(), 0.0);
  std::fill(outcome_.info.begin(), outcome_.info.end(), EventCounters{});
  on_step(actions, order_, outcome_);
  ++s.step_count;
  outcome_.done = done();
  fill_observations();
  return outcome_;
}

void Environment::observe(std::size_t agent, std::span<double> out) const {
  require(out.size() == obs_dim(), "observation buffer has the wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  const int k = cfg_.view_radius;
  const std::size_t stride = channels_.size() + 2;
  const Pos me = state_.agent_positions[agent];
  std::size_t cell = 0;
  for (int dy = -k; dy <= k; ++dy) {
    for (int dx = -k; dx <= k; ++dx, ++cell) {
      const Pos p{me.x + dx, me.y + dy};
      double* v = out.data() + cell * stride;
      const int ch = channel_of_[std::size_t(state_.visible(p))];
      if (ch >= 0) v[ch] = 1.0;
      if (dx == 0 && dy == 0) {
        v[channels_.size()] = 1.0;
      } else if (state_.in_bounds(p) && state_.agent_at(p) >= 0) {
        v[channels_.size() + 1] = 1.0;
      }
    }
  }
}

void Environment::fill_observations() {
  const std::size_t d = obs_dim();
  outcome_.observations.resize(d * num_agents());
  for (std::size_t i = 0; i < num_agents(); ++i)
    observe(i, std::span<double>(outcome_.observations).subspan(i * d, d));
}

std::string Environment::render() const {
  std::string out;
  for (int y = 0; y < state_.height; ++y) {
    for (int x = 0; x < state_.width; ++x) {
      const Pos p{x, y};
      const int a = state_.agent_at(p);
      out += a >= 0 ? char('0' + a % 10) : cell_char(state_.visible(p));
    }
    out += '\n';
  }
  return out;
}

bool Environment::random_free_cell(Pos& out, std::optional<Cell> region) {
  std::vector<Pos> free;
  for (int y = 0; y < state_.height; ++y) {
    for (int x = 0; x < state_.width; ++x) {
      const Pos p{x, y};
      const std::size_t i = state_.index(p);
      if (state_.cells[i] != Cell::Empty) continue;
      if (region && state_.region[i] != *region) continue;
      if (state_.agent_at(p) >= 0) continue;
      free.push_back(p);
    }
  }
  if (free.empty()) return false;
  out = free[state_.rng.below(free.size())];
  return true;
}

}  // namespace fcg::envs
