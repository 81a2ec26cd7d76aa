#include "fcgrad/harness/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "fcgrad/common/csv.hpp"
#include "fcgrad/common/error.hpp"
#include "fcgrad/common/log.hpp"
#include "fcgrad/common/rng.hpp"

namespace fcg::harness {

using agent::AgentState;
using agent::Matrix;

namespace {

std::vector<std::unique_ptr<envs::Environment>> make_envs(
    const ExperimentConfig& cfg, std::size_t n) {
  std::vector<std::unique_ptr<envs::Environment>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(envs::make_env(cfg.env, cfg.env_cfg));
  return out;
}

// Observation of one agent in every env, as columns.
void gather_obs(const std::vector<std::vector<double>>& obs, std::size_t agent,
                std::size_t dim, Matrix& out) {
  out.resize(Eigen::Index(dim), Eigen::Index(obs.size()));
  for (std::size_t e = 0; e < obs.size(); ++e)
    out.col(Eigen::Index(e)) =
        Eigen::Map<const agent::Vector>(obs[e].data() + agent * dim, Eigen::Index(dim));
}

int pick_action(const agent::Forward& f, Eigen::Index col, bool greedy, Rng& rng) {
  if (greedy) {
    Eigen::Index best = 0;
    f.probs.col(col).maxCoeff(&best);
    return int(best);
  }
  return int(rng.categorical(
      std::span<const double>(f.probs.col(col).data(), std::size_t(f.probs.rows()))));
}

}  // namespace

std::vector<AgentState> init_agents(const ExperimentConfig& cfg,
                                    std::uint64_t seed) {
  auto probe = envs::make_env(cfg.env, cfg.env_cfg);
  const agent::NetShape shape{probe->obs_dim(), cfg.hidden,
                              std::size_t(probe->num_actions())};
  std::vector<AgentState> agents;
  for (std::size_t i = 0; i < probe->num_agents(); ++i) {
    AgentState a(shape);
    Rng rng = Rng::stream(seed, {kStreamAgent, i});
    a.net.init(rng);
    agents.push_back(std::move(a));
  }
  return agents;
}

EvalResult evaluate(const ExperimentConfig& cfg,
                    const std::vector<AgentState>& agents,
                    std::size_t episodes, std::uint64_t stream_seed) {
  require(episodes >= 1, "evaluation needs at least one episode",
          ErrorCode::Config);
  const std::size_t width = std::min(episodes, std::max<std::size_t>(cfg.num_envs, 1));
  auto envs_ = make_envs(cfg, width);
  const std::size_t n = envs_[0]->num_agents();
  require(agents.size() == n, "agent count does not match the environment",
          ErrorCode::Config);
  const std::size_t dim = envs_[0]->obs_dim();
  for (const auto& a : agents)
    require(a.net.shape().obs_dim == dim &&
                a.net.shape().actions == std::size_t(envs_[0]->num_actions()),
            "network shape does not match the environment", ErrorCode::Config);

  EvalResult res;
  res.episodes = episodes;
  std::vector<double> totals(n, 0.0);
  res.apples.assign(n, 0.0);
  res.coins_own.assign(n, 0.0);
  res.coins_other.assign(n, 0.0);
  res.waste_cleaned.assign(n, 0.0);
  Rng rng = Rng::stream(stream_seed, {kStreamEval});

  std::vector<std::vector<double>> obs;
  std::vector<std::vector<int>> actions;
  Matrix x;
  for (std::size_t start = 0; start < episodes; start += width) {
    const std::size_t count = std::min(width, episodes - start);
    obs.assign(count, {});
    actions.assign(count, std::vector<int>(n, 0));
    for (std::size_t e = 0; e < count; ++e)
      obs[e] = envs_[e]->reset(Rng::derive(stream_seed, {kStreamEval, start + e}));
    while (!envs_[0]->done()) {
      for (std::size_t i = 0; i < n; ++i) {
        gather_obs(obs, i, dim, x);
        const agent::Forward f = agents[i].net.forward(x);
        for (std::size_t e = 0; e < count; ++e)
          actions[e][i] = pick_action(f, Eigen::Index(e), cfg.greedy_eval, rng);
      }
      for (std::size_t e = 0; e < count; ++e) {
        const envs::StepOutcome& out = envs_[e]->step(actions[e]);
        for (std::size_t i = 0; i < n; ++i) {
          totals[i] += out.rewards[i];
          res.apples[i] += out.info[i].apples;
          res.coins_own[i] += out.info[i].coins_own;
          res.coins_other[i] += out.info[i].coins_other;
          res.waste_cleaned[i] += out.info[i].waste_cleaned;
        }
        obs[e] = out.observations;
      }
    }
  }
  const double k = 1.0 / double(episodes);
  for (auto* v : {&totals, &res.apples, &res.coins_own, &res.coins_other,
                  &res.waste_cleaned})
    for (double& x : *v) x *= k;
  metrics::ReportOptions ro;
  ro.shift_negative = cfg.shift_negative;
  res.report = metrics::report(totals, ro);
  return res;
}

SeedRun train_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedRun run;
  run.agents = init_agents(cfg, seed);
  const std::size_t E = cfg.num_envs, T = cfg.rollout_length;
  auto envs_ = make_envs(cfg, E);
  const std::size_t n = envs_[0]->num_agents();
  const std::size_t dim = envs_[0]->obs_dim();
  const agent::UpdateConfig ucfg = cfg.update_config();
  const bool shaped = cfg.method == agent::Method::IA;
  const std::string run_id = cfg.effective_run_id();

  Rng sample_rng = Rng::stream(seed, {kStreamSample});
  std::vector<Rng> shuffle_rngs;
  for (std::size_t i = 0; i < n; ++i)
    shuffle_rngs.push_back(Rng::stream(seed, {kStreamShuffle, i}));

  std::vector<std::uint64_t> episode_no(E, 0);
  auto episode_seed = [&](std::size_t e) {
    return Rng::derive(seed, {kStreamEnv, e, episode_no[e]++});
  };
  std::vector<std::vector<double>> obs(E);
  for (std::size_t e = 0; e < E; ++e) obs[e] = envs_[e]->reset(episode_seed(e));

  std::vector<agent::TrajectoryBatch> batches(n);
  std::vector<std::vector<int>> actions(E, std::vector<int>(n, 0));
  std::vector<double> boot_ind(E), boot_col(E);
  Matrix x;

  // Per-agent diagnostics accumulated since the last evaluation.
  std::vector<agent::UpdateStats> window(n);

  for (std::size_t u = 1; u <= cfg.total_updates; ++u) {
    for (auto& b : batches) b.resize(dim, E * T);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        gather_obs(obs, i, dim, x);
        const agent::Forward f = run.agents[i].net.forward(x);
        agent::TrajectoryBatch& b = batches[i];
        for (std::size_t e = 0; e < E; ++e) {
          const std::size_t s = e * T + t;
          const auto col = Eigen::Index(e);
          const int a = pick_action(f, col, false, sample_rng);
          actions[e][i] = a;
          b.obs.col(Eigen::Index(s)) = x.col(col);
          b.actions[s] = a;
          b.logp[s] = f.logp(a, col);
          b.value_ind[s] = f.v_ind[col];
          b.value_col[s] = f.v_col[col];
        }
      }
      for (std::size_t e = 0; e < E; ++e) {
        const envs::StepOutcome& out = envs_[e]->step(actions[e]);
        const std::size_t s = e * T + t;
        double mean_r = 0.0;
        for (double r : out.rewards) mean_r += r;
        mean_r /= double(n);
        std::vector<double> ind = out.rewards;
        if (shaped) ind = agent::inequity_aversion_shape(out.rewards, cfg.ia_alpha, cfg.ia_beta);
        for (std::size_t i = 0; i < n; ++i) {
          batches[i].reward_ind[s] = ind[i];
          batches[i].reward_col[s] = mean_r;
          batches[i].done[s] = out.done ? 1 : 0;
        }
        double check = 0.0;
        for (double r : out.rewards) check += r / double(n);
        run.collective_bookkeeping_error =
            std::max(run.collective_bookkeeping_error, std::abs(check - mean_r));
        obs[e] = out.done ? envs_[e]->reset(episode_seed(e)) : out.observations;
      }
    }

    const double frac = cfg.anneal_lr
                            ? 1.0 - double(u - 1) / double(cfg.total_updates)
                            : 1.0;
    const double lr = cfg.learning_rate * frac;
    for (std::size_t i = 0; i < n; ++i) {
      gather_obs(obs, i, dim, x);
      const agent::Forward f = run.agents[i].net.forward(x);
      for (std::size_t e = 0; e < E; ++e) {
        boot_ind[e] = f.v_ind[Eigen::Index(e)];
        boot_col[e] = f.v_col[Eigen::Index(e)];
      }
      agent::finish_batch(batches[i], T, boot_ind, boot_col, cfg.gamma,
                          cfg.gae_lambda);
      const agent::UpdateStats st = agent::ppo_update(
          run.agents[i], batches[i], cfg.method, ucfg, lr, shuffle_rngs[i]);
      window[i].steps += st.steps;
      window[i].conflicts += st.conflicts;
      for (std::size_t k = 0; k < 4; ++k) window[i].branches[k] += st.branches[k];
    }

    if (u % cfg.eval_every != 0 && u != cfg.total_updates) continue;
    const EvalResult ev = evaluate(cfg, run.agents, cfg.eval_episodes,
                                   Rng::derive(seed, {kStreamEval, u}));
    for (std::size_t i = 0; i < n; ++i) {
      ResultRow r;
      r.run_id = run_id;
      r.env = std::string(envs::env_name(cfg.env));
      r.method = std::string(agent::method_name(cfg.method));
      r.beta = cfg.beta;
      r.seed = seed;
      r.update = u;
      r.env_steps = std::uint64_t(u) * E * T;
      r.agent_id = i;
      r.episodic_return = ev.report.per_agent_returns[i];
      r.mean = ev.report.mean;
      r.geomean = ev.report.geomean;
      r.min = ev.report.min;
      r.gini = ev.report.gini;
      r.jain = ev.report.jain;
      const double steps = double(std::max<std::size_t>(window[i].steps, 1));
      r.conflict_rate = double(window[i].conflicts) / steps;
      r.branch_blend = double(window[i].branches[0]) / steps;
      r.branch_proj_ind = double(window[i].branches[1]) / steps;
      r.branch_proj_col = double(window[i].branches[2]) / steps;
      run.rows.push_back(std::move(r));
      window[i] = {};
    }
    std::ostringstream msg;
    msg << run_id << " seed " << seed << " update " << u << "/"
        << cfg.total_updates << " mean " << ev.report.mean << " min "
        << ev.report.min << " gini " << ev.report.gini << " returns";
    for (double r : ev.report.per_agent_returns) msg << ' ' << r;
    if (ev.report.has_negative) msg << " (negative returns)";
    log::info(msg.str());
  }
  return run;
}

std::vector<SeedRun> train_all(const ExperimentConfig& cfg) {
  const std::size_t count = cfg.seeds.size();
  std::vector<SeedRun> runs(count);
  std::size_t threads = cfg.threads;
  if (threads == 0)
    threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) runs[k] = train_seed(cfg, cfg.seeds[k]);
    return runs;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < count;) {
        try {
          runs[k] = train_seed(cfg, cfg.seeds[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return runs;
}

}  // namespace fcg::harness
