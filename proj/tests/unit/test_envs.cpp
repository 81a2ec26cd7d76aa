#include "doctest.h"

#include <cmath>
#include <set>

#include "fcgrad/common/error.hpp"
#include "fcgrad/envs/env.hpp"

using namespace fcg;
using namespace fcg::envs;

namespace {

std::vector<int> all(std::size_t n, int a) { return std::vector<int>(n, a); }

int count(const GridWorld& s, Cell c) {
  int n = 0;
  for (Cell x : s.cells) n += x == c;
  return n;
}

std::optional<Pos> find(const GridWorld& s, Cell c) {
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      if (s.cells[s.index({x, y})] == c) return Pos{x, y};
  return std::nullopt;
}

// Greedy step toward target; Stay when already there.
int toward(Pos from, Pos to) {
  if (to.x > from.x) return Right;
  if (to.x < from.x) return Left;
  if (to.y > from.y) return Down;
  if (to.y < from.y) return Up;
  return Stay;
}

int manhattan(Pos a, Pos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

double collective_per_step(bool own_only, std::uint64_t seed) {
  auto env = make_env(EnvKind::Coins);
  double total = 0.0;
  int steps = 0;
  for (std::uint64_t ep = 0; ep < 20; ++ep) {
    env->reset(seed + ep);
    while (!env->done()) {
      const auto& s = env->state();
      std::vector<int> act(2, Stay);
      const auto green = find(s, Cell::CoinGreen);
      const auto red = find(s, Cell::CoinRed);
      for (int i = 0; i < 2; ++i) {
        const Pos me = s.agent_positions[std::size_t(i)];
        const auto own = i == 0 ? green : red;
        const auto other = i == 0 ? red : green;
        if (own) act[std::size_t(i)] = toward(me, *own);
        else if (!own_only && other) act[std::size_t(i)] = toward(me, *other);
      }
      const auto& out = env->step(act);
      total += out.rewards[0] + out.rewards[1];
      ++steps;
    }
  }
  return total / steps;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("layout parsing") {
  const Layout l = parse_layout("0.#\n~O1\n");
  CHECK(l.width == 3);
  CHECK(l.height == 2);
  CHECK(l.at(2, 0) == Cell::Wall);
  CHECK(l.at(0, 1) == Cell::River);
  REQUIRE(l.spawns.size() == 2);
  CHECK(l.spawns[1] == Pos{2, 1});
  CHECK_THROWS_AS(parse_layout("0..\n.."), Error);
  CHECK_THROWS_AS(parse_layout("0.x\n..."), Error);
  CHECK_THROWS_AS(parse_layout("0.2\n..."), Error);
}

TEST_CASE("env names") {
  CHECK(parse_env_kind("Harvest") == EnvKind::Harvest);
  CHECK_THROWS_AS(parse_env_kind("chess"), Error);
}

TEST_CASE("coins reset") {
  auto a = make_env(EnvKind::Coins), b = make_env(EnvKind::Coins);
  CHECK(a->num_agents() == 2);
  CHECK(a->obs_dim() == 25 * 6);
  const auto oa = a->reset(42);
  const auto ob = b->reset(42);
  CHECK(oa == ob);
  CHECK(a->render() == b->render());
  CHECK(count(a->state(), Cell::CoinGreen) + count(a->state(), Cell::CoinRed) == 1);
  CHECK(a->state().agent_positions[0] == Pos{0, 0});
  CHECK(a->state().agent_positions[1] == Pos{4, 4});
}

TEST_CASE("coins with p_green = 1 spawn only green") {
  EnvConfig cfg;
  cfg.p_green = 1.0;
  auto env = make_env(EnvKind::Coins, cfg);
  for (std::uint64_t s = 0; s < 200; ++s) {
    env->reset(s);
    CHECK(count(env->state(), Cell::CoinRed) == 0);
    CHECK(count(env->state(), Cell::CoinGreen) == 1);
  }
}

TEST_CASE("coin colour frequency") {
  auto env = make_env(EnvKind::Coins);
  const int n = 100000;
  int green = 0;
  for (int s = 0; s < n; ++s) {
    env->reset(std::uint64_t(s));
    green += count(env->state(), Cell::CoinGreen);
  }
  const double p = 15.0 / 16.0;
  const double sd = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(green - n * p) < 3 * sd);
}

TEST_CASE("coin rewards") {
  EnvConfig cfg;
  cfg.layout = "0.1\n";
  cfg.p_green = 1.0;
  auto env = make_env(EnvKind::Coins, cfg);

  env->reset(1);
  auto out = env->step(std::vector<int>{Right, Stay});
  CHECK(out.rewards == std::vector<double>{1.0, 0.0});
  CHECK(out.info[0].coins_own == 1);

  env->reset(1);
  out = env->step(std::vector<int>{Stay, Left});
  CHECK(out.rewards == std::vector<double>{-2.0, 1.0});
  CHECK(out.info[1].coins_other == 1);

  env->reset(1);
  out = env->step(std::vector<int>{Stay, Stay});
  CHECK(out.rewards == std::vector<double>{0.0, 0.0});
}

TEST_CASE("coin respawns one step after collection") {
  EnvConfig cfg;
  cfg.layout = "0..1\n";
  cfg.p_green = 0.0;
  auto env = make_env(EnvKind::Coins, cfg);
  env->reset(3);
  const Pos coin = *find(env->state(), Cell::CoinRed);
  const int i = coin.x == 1 ? 0 : 1;
  std::vector<int> act{Stay, Stay};
  act[std::size_t(i)] = i == 0 ? Right : Left;
  const auto out = env->step(act);
  CHECK(out.rewards[std::size_t(i)] == 1.0);
  CHECK(out.rewards[std::size_t(1 - i)] == (i == 0 ? -2.0 : 0.0));
  CHECK(count(env->state(), Cell::CoinRed) == 0);
  env->step(std::vector<int>{Stay, Stay});
  CHECK(count(env->state(), Cell::CoinRed) == 1);
}

TEST_CASE("collision safety and determinism") {
  for (EnvKind k : {EnvKind::Coins, EnvKind::Cleanup, EnvKind::Harvest}) {
    auto a = make_env(k), b = make_env(k);
    a->reset(9);
    b->reset(9);
    Rng rng(4);
    const std::size_t dim = a->obs_dim();
    while (!a->done()) {
      std::vector<int> act(a->num_agents());
      for (int& x : act) x = int(rng.below(std::uint64_t(a->num_actions())));
      const auto& oa = a->step(act);
      const auto& ob = b->step(act);
      CHECK(oa.observations == ob.observations);
      CHECK(oa.rewards == ob.rewards);
      CHECK(oa.observations.size() == dim * a->num_agents());
      std::set<std::pair<int, int>> seen;
      for (const Pos& p : a->state().agent_positions) {
        CHECK(seen.insert({p.x, p.y}).second);
        CHECK(a->state().cell(p) != Cell::Wall);
      }
      double sum = 0.0, events = 0.0;
      for (std::size_t i = 0; i < oa.rewards.size(); ++i) {
        sum += oa.rewards[i];
        events += oa.info[i].apples + oa.info[i].coins_own +
                  oa.info[i].coins_other * (1.0 - 2.0);
      }
      CHECK(sum == events);
    }
    CHECK(a->state().step_count == a->state().episode_length);
    CHECK_THROWS_AS(a->step(std::vector<int>(a->num_agents(), 0)), Error);
  }
}

TEST_CASE("observation window marks out-of-bounds cells as wall") {
  auto env = make_env(EnvKind::Coins);
  const auto obs = env->reset(5);
  const std::size_t stride = 6;
  // Agent 0 sits in the top-left corner; window cell (dx=-2, dy=-2) is outside.
  CHECK(obs[0 * stride + 1] == 1.0);
  // Centre cell carries the self marker.
  CHECK(obs[12 * stride + 4] == 1.0);
  double sum = 0.0;
  for (std::size_t c = 0; c < 25; ++c) sum += obs[c * stride + 4];
  CHECK(sum == 1.0);
}

TEST_CASE("action validation") {
  auto env = make_env(EnvKind::Coins);
  env->reset(0);
  CHECK_THROWS_AS(env->step(std::vector<int>{Clean, Stay}), Error);
  CHECK_THROWS_AS(env->step(std::vector<int>{Stay}), Error);
}

TEST_CASE("own-colour collection beats collecting everything") {
  CHECK(collective_per_step(true, 100) > collective_per_step(false, 100));
}

TEST_CASE("cleanup starts saturated with no apples") {
  auto env = make_env(EnvKind::Cleanup);
  CHECK(env->num_agents() == 4);
  CHECK(env->num_actions() == 6);
  env->reset(7);
  CHECK(count(env->state(), Cell::Apple) == 0);
  CHECK(count(env->state(), Cell::Waste) == 7);  // ceil(0.4 * 16)
  auto again = make_env(EnvKind::Cleanup);
  again->reset(7);
  CHECK(again->render() == env->render());
  // No cleaning: apples never appear while waste stays at or above threshold.
  for (int t = 0; t < 100; ++t) {
    env->step(all(4, Stay));
    CHECK(count(env->state(), Cell::Apple) == 0);
  }
}

TEST_CASE("cleanup clean action clears the facing cell") {
  EnvConfig cfg;
  cfg.layout = "0OO\n~OO\n";
  cfg.p_waste = 0.0;
  auto env = make_env(EnvKind::Cleanup, cfg);
  env->reset(1);
  CHECK(env->state().cell({0, 1}) == Cell::Waste);
  const auto& out = env->step(std::vector<int>{Clean});
  CHECK(out.rewards[0] == 0.0);
  CHECK(out.info[0].waste_cleaned == 1);
  CHECK(env->state().cell({0, 1}) == Cell::Empty);
  CHECK(env->state().visible({0, 1}) == Cell::River);
}

TEST_CASE("cleanup apple growth after cleaning") {
  EnvConfig cfg;
  cfg.layout = "0OO\n~OO\n";
  cfg.p_waste = 0.0;
  cfg.p_apple = 0.05;
  auto env = make_env(EnvKind::Cleanup, cfg);
  const int T = 5, episodes = 4000, cells = 4;
  double apples = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env->reset(std::uint64_t(e));
    env->step(std::vector<int>{Clean});
    for (int t = 1; t < T; ++t) env->step(std::vector<int>{Stay});
    apples += count(env->state(), Cell::Apple);
  }
  // Each orchard cell has T independent chances to sprout.
  const double q = 1.0 - std::pow(1.0 - cfg.p_apple, T);
  const double mean = double(episodes) * cells * q;
  const double sd = std::sqrt(double(episodes) * cells * q * (1 - q));
  CHECK(std::abs(apples - mean) < 3 * sd);
}

TEST_CASE("cleanup growth is zero at the threshold") {
  EnvConfig cfg;
  cfg.layout = "0OO\n~OO\n";
  cfg.p_waste = 0.0;
  cfg.p_apple = 1.0;
  auto env = make_env(EnvKind::Cleanup, cfg);
  env->reset(2);
  for (int t = 0; t < 50; ++t) env->step(std::vector<int>{Stay});
  CHECK(count(env->state(), Cell::Apple) == 0);
}

TEST_CASE("apple pickup gives one point") {
  EnvConfig cfg;
  cfg.layout = "0@..\n....\n";
  auto env = make_env(EnvKind::Harvest, cfg);
  env->reset(0);
  const auto& out = env->step(std::vector<int>{Right});
  CHECK(out.rewards[0] == 1.0);
  CHECK(out.info[0].apples == 1);
}

TEST_CASE("harvest spawn asymmetry") {
  auto env = make_env(EnvKind::Harvest);
  env->reset(0);
  const auto& s = env->state();
  auto nearest = [&](std::size_t i) {
    int best = 1 << 20;
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x)
        if (s.cells[s.index({x, y})] == Cell::Apple)
          best = std::min(best, manhattan(s.agent_positions[i], {x, y}));
    return best;
  };
  CHECK(std::max(nearest(0), nearest(1)) < std::min(nearest(2), nearest(3)));
  auto again = make_env(EnvKind::Harvest);
  again->reset(0);
  CHECK(again->render() == env->render());
}

TEST_CASE("harvest without apples stays empty") {
  EnvConfig cfg;
  cfg.layout = "0.....\n......\n.....1\n";
  auto env = make_env(EnvKind::Harvest, cfg);
  env->reset(3);
  while (!env->done()) env->step(all(2, Stay));
  CHECK(count(env->state(), Cell::Apple) == 0);
}

TEST_CASE("harvest saturated map cannot regrow") {
  EnvConfig cfg;
  cfg.layout = "0@@\n@@1\n";
  auto env = make_env(EnvKind::Harvest, cfg);
  env->reset(0);
  const int before = count(env->state(), Cell::Apple);
  env->step(all(2, Stay));
  CHECK(count(env->state(), Cell::Apple) == before);
}

TEST_CASE("harvest regrowth rate with three neighbours") {
  EnvConfig cfg;
  cfg.layout = "@@@#\n#.##\n0#1#\n";
  cfg.regrow_radius = 1;
  auto env = make_env(EnvKind::Harvest, cfg);
  const int n = 100000;
  int grown = 0;
  for (int s = 0; s < n; ++s) {
    env->reset(std::uint64_t(s));
    env->step(all(2, Stay));
    grown += env->state().cell({1, 1}) == Cell::Apple;
  }
  const double p = cfg.regrow[3];
  const double sd = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(grown - n * p) < 3 * sd);
}

TEST_CASE("harvest rejects a nonzero isolated regrowth rate") {
  EnvConfig cfg;
  cfg.regrow = {0.1, 0.1, 0.1, 0.1};
  CHECK_THROWS_AS(make_env(EnvKind::Harvest, cfg), Error);
}

}
