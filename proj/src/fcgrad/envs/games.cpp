#include <cmath>

#include "fcgrad/common/error.hpp"
#include "fcgrad/envs/env.hpp"

namespace fcg::envs {

namespace {

void check_prob(double p, const char* name) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
          std::string(name) + " must lie in [0,1]", ErrorCode::Config);
}

Layout load_layout(EnvKind kind, const EnvConfig& cfg) {
  return parse_layout(cfg.layout.empty() ? default_layout(kind) : cfg.layout);
}

std::size_t count_free(const Layout& l) {
  std::size_t n = 0;
  for (Cell c : l.cells)
    if (c != Cell::Wall) ++n;
  return n;
}

// Agent 0 collects green, agent 1 red. One coin is on the board at a time;
// after a collection the next coin appears at the end of the following step.
class Coins final : public Environment {
 public:
  explicit Coins(const EnvConfig& cfg)
      : Environment(cfg, load_layout(EnvKind::Coins, cfg),
                    {Cell::Empty, Cell::Wall, Cell::CoinGreen, Cell::CoinRed}) {
    require(num_agents() == 2, "coins needs exactly 2 spawns", ErrorCode::Config);
    check_prob(cfg.p_green, "p_green");
    require(std::isfinite(cfg.coin_penalty), "coin_penalty must be finite",
            ErrorCode::Config);
    require(count_free(layout_) >= 3,
            "coins grid too small for two agents and a coin", ErrorCode::Config);
  }

  EnvKind kind() const override { return EnvKind::Coins; }
  int num_actions() const override { return 5; }

 private:
  void on_reset() override {
    for (auto& c : state_.cells)
      if (c == Cell::CoinGreen || c == Cell::CoinRed) c = Cell::Empty;
    pending_ = false;
    spawn();
  }

  void spawn() {
    Pos p;
    if (!random_free_cell(p)) return;
    state_.set(p, state_.rng.bernoulli(cfg_.p_green) ? Cell::CoinGreen
                                                     : Cell::CoinRed);
  }

  void on_step(std::span<const int>, std::span<const int> order,
               StepOutcome& out) override {
    const bool spawn_now = pending_;
    pending_ = false;
    for (int i : order) {
      const Pos p = state_.agent_positions[std::size_t(i)];
      const Cell c = state_.cell(p);
      if (c != Cell::CoinGreen && c != Cell::CoinRed) continue;
      const Cell own = i == 0 ? Cell::CoinGreen : Cell::CoinRed;
      out.rewards[std::size_t(i)] += 1.0;
      if (c == own) {
        ++out.info[std::size_t(i)].coins_own;
      } else {
        ++out.info[std::size_t(i)].coins_other;
        out.rewards[std::size_t(1 - i)] -= cfg_.coin_penalty;
      }
      state_.set(p, Cell::Empty);
      pending_ = true;
    }
    if (spawn_now) spawn();
  }

  bool pending_ = false;
};

class Cleanup final : public Environment {
 public:
  explicit Cleanup(const EnvConfig& cfg)
      : Environment(cfg, load_layout(EnvKind::Cleanup, cfg),
                    {Cell::Empty, Cell::Wall, Cell::Apple, Cell::Waste,
                     Cell::River, Cell::Orchard}) {
    check_prob(cfg.p_waste, "p_waste");
    check_prob(cfg.p_apple, "p_apple");
    require(cfg.waste_threshold > 0.0 && cfg.waste_threshold <= 1.0,
            "waste_threshold must lie in (0,1]", ErrorCode::Config);
    for (Cell c : layout_.cells) {
      if (c == Cell::River) ++river_cells_;
      if (c == Cell::Orchard) ++orchard_cells_;
    }
    require(river_cells_ > 0 && orchard_cells_ > 0,
            "cleanup layout needs river and orchard cells", ErrorCode::Config);
  }

  EnvKind kind() const override { return EnvKind::Cleanup; }
  int num_actions() const override { return 6; }

  double waste_density() const {
    std::size_t w = 0;
    for (Cell c : state_.cells)
      if (c == Cell::Waste) ++w;
    return double(w) / double(river_cells_);
  }

 private:
  void on_reset() override {
    for (auto& c : state_.cells)
      if (c == Cell::Apple || c == Cell::Waste) c = Cell::Empty;
    // Start saturated so nothing grows until someone cleans.
    const auto initial = std::min<std::size_t>(
        river_cells_, std::size_t(std::ceil(cfg_.waste_threshold *
                                            double(river_cells_) - 1e-9)));
    for (std::size_t k = 0; k < initial; ++k) {
      Pos p;
      if (!random_free_cell(p, Cell::River)) break;
      state_.set(p, Cell::Waste);
    }
  }

  void on_step(std::span<const int> actions, std::span<const int> order,
               StepOutcome& out) override {
    GridWorld& s = state_;
    for (int i : order) {
      const Pos p = s.agent_positions[std::size_t(i)];
      if (s.cell(p) == Cell::Apple) {
        s.set(p, Cell::Empty);
        out.rewards[std::size_t(i)] += 1.0;
        ++out.info[std::size_t(i)].apples;
      }
    }
    for (int i : order) {
      if (actions[std::size_t(i)] != Clean) continue;
      Pos p = s.agent_positions[std::size_t(i)];
      if (s.cell(p) != Cell::Waste) p = moved(p, s.facing[std::size_t(i)]);
      if (s.cell(p) == Cell::Waste) {
        s.set(p, Cell::Empty);
        ++out.info[std::size_t(i)].waste_cleaned;
      }
    }
    if (s.rng.bernoulli(cfg_.p_waste)) {
      Pos p;
      if (random_free_cell(p, Cell::River)) s.set(p, Cell::Waste);
    }
    const double growth =
        cfg_.p_apple *
        std::max(0.0, 1.0 - waste_density() / cfg_.waste_threshold);
    if (growth <= 0.0) return;
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        const Pos p{x, y};
        const std::size_t idx = s.index(p);
        if (s.region[idx] != Cell::Orchard || s.cells[idx] != Cell::Empty)
          continue;
        if (s.agent_at(p) >= 0) continue;
        if (s.rng.bernoulli(growth)) s.cells[idx] = Cell::Apple;
      }
    }
  }

  std::size_t river_cells_ = 0;
  std::size_t orchard_cells_ = 0;
};

class Harvest final : public Environment {
 public:
  explicit Harvest(const EnvConfig& cfg)
      : Environment(cfg, load_layout(EnvKind::Harvest, cfg),
                    {Cell::Empty, Cell::Wall, Cell::Apple}) {
    for (double p : cfg.regrow) check_prob(p, "regrow probability");
    require(cfg.regrow[0] == 0.0, "regrowth with no nearby apples must be 0",
            ErrorCode::Config);
    for (std::size_t i = 1; i < cfg.regrow.size(); ++i)
      require(cfg.regrow[i] >= cfg.regrow[i - 1],
              "regrowth table must be nondecreasing", ErrorCode::Config);
    require(cfg.regrow_radius >= 1, "regrow_radius must be >= 1",
            ErrorCode::Config);
  }

  EnvKind kind() const override { return EnvKind::Harvest; }
  int num_actions() const override { return 5; }

 private:
  void on_reset() override {}

  void on_step(std::span<const int>, std::span<const int> order,
               StepOutcome& out) override {
    GridWorld& s = state_;
    for (int i : order) {
      const Pos p = s.agent_positions[std::size_t(i)];
      if (s.cell(p) == Cell::Apple) {
        s.set(p, Cell::Empty);
        out.rewards[std::size_t(i)] += 1.0;
        ++out.info[std::size_t(i)].apples;
      }
    }
    // Neighbour counts are taken before any regrowth this step.
    const int r = cfg_.regrow_radius;
    grow_.clear();
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        const Pos p{x, y};
        if (s.cells[s.index(p)] != Cell::Empty || s.agent_at(p) >= 0) continue;
        int n = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            if (s.cell({x + dx, y + dy}) == Cell::Apple) ++n;
        const double prob = cfg_.regrow[std::size_t(std::min(n, 3))];
        if (prob > 0.0 && s.rng.bernoulli(prob)) grow_.push_back(p);
      }
    }
    for (const Pos& p : grow_) s.set(p, Cell::Apple);
  }

  std::vector<Pos> grow_;
};

}  // namespace

std::unique_ptr<Environment> make_env(EnvKind kind, const EnvConfig& cfg) {
  switch (kind) {
    case EnvKind::Coins: return std::make_unique<Coins>(cfg);
    case EnvKind::Cleanup: return std::make_unique<Cleanup>(cfg);
    case EnvKind::Harvest: return std::make_unique<Harvest>(cfg);
  }
  throw Error(ErrorCode::Config, "unknown env kind");
}

std::string_view default_layout(EnvKind kind) {
  switch (kind) {
    case EnvKind::Coins:
      return "0....\n"
             ".....\n"
             ".....\n"
             ".....\n"
             "....1\n";
    case EnvKind::Cleanup:
      // Agents 0 and 1 start by the river, 2 and 3 by the orchard.
      return "~~......OO\n"
             "~~......OO\n"
             "~~0.....OO\n"
             "~~.....2OO\n"
             "~~1.....OO\n"
             "~~.....3OO\n"
             "~~......OO\n"
             "~~......OO\n";
    case EnvKind::Harvest:
      // Agents 0 and 1 start beside the two patches, 2 and 3 far right.
      return "............\n"
             ".@@@........\n"
             ".@@@0.......\n"
             ".@@@.......2\n"
             "............\n"
             "............\n"
             ".@@@.......3\n"
             ".@@@1.......\n"
             ".@@@........\n"
             "............\n";
  }
  return "";
}

}  // namespace fcg::envs
