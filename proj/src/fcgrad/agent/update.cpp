#include "fcgrad/agent/update.hpp"

#include <cctype>
#include <numeric>
#include <string>

#include "fcgrad/common/error.hpp"

namespace fcg::agent {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Col: return "Col";
    case Method::Ind: return "Ind";
    case Method::IA: return "IA";
    case Method::Weighted: return "Weighted";
    case Method::PCGrad: return "PCGrad";
    case Method::AgA: return "AgA";
    case Method::FCGrad: return "FCGrad";
  }
  return "unknown";
}

Method parse_method(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = char(std::tolower(static_cast<unsigned char>(c)));
  for (Method m : {Method::Col, Method::Ind, Method::IA, Method::Weighted,
                   Method::PCGrad, Method::AgA, Method::FCGrad}) {
    std::string name(method_name(m));
    for (auto& c : name) c = char(std::tolower(static_cast<unsigned char>(c)));
    if (name == lower) return m;
  }
  throw Error(ErrorCode::Config, "unknown method '" + std::string(s) + "'");
}

AgentState::AgentState(const NetShape& shape) : net(shape) {
  policy_opt.reset(shape.policy_size());
  value_opt.reset(shape.value_size());
}

StepDiagnostics update_agent(AgentState& agent, const TrajectoryBatch& mb,
                             Method method, const UpdateConfig& cfg, double lr,
                             double v_ind, double v_col) {
  const SurrogateOptions opts{cfg.clip, cfg.entropy_coef};
  // Both gradients are taken at the parameters the minibatch step starts
  // from.
  const Forward fwd = agent.net.forward(mb.obs);
  PolicyGradients pg = ppo_policy_gradients(agent.net, mb, opts, &fwd);
  ParamVector vg = value_gradient(agent.net, mb, cfg.value_coef, &fwd);

  StepDiagnostics diag;
  switch (method) {
    case Method::Col:
      diag.combine = gradcore::combine_weighted(pg.g_ind, pg.g_col, 1.0);
      break;
    case Method::Ind:
    case Method::IA:
      diag.combine = gradcore::combine_weighted(pg.g_ind, pg.g_col, 0.0);
      break;
    case Method::Weighted:
      diag.combine = gradcore::combine_weighted(pg.g_ind, pg.g_col, cfg.beta);
      break;
    case Method::PCGrad:
      diag.combine = gradcore::combine_pcgrad(pg.g_ind, pg.g_col);
      break;
    case Method::FCGrad:
      diag.combine =
          gradcore::combine_fcgrad({pg.g_ind, pg.g_col, v_ind, v_col, cfg.beta});
      break;
    case Method::AgA: {
      // Central differences of the collective gradient along v.
      const ParamVector base = agent.net.policy_params;
      PolicyNetwork probe = agent.net;
      auto g_col_at = [&](const ParamVector& shift, double s) {
        for (std::size_t i = 0; i < base.size(); ++i)
          probe.policy_params[i] = base[i] + s * shift[i];
        return ppo_policy_gradients(probe, mb, opts).g_col;
      };
      auto hvp = [&](ConstParams v) {
        const double nv = gradcore::norm(v);
        ParamVector out(v.size(), 0.0);
        if (nv == 0.0) return out;
        ParamVector unit(v.begin(), v.end());
        for (double& x : unit) x /= nv;
        const ParamVector up = g_col_at(unit, cfg.hvp_eps);
        const ParamVector down = g_col_at(unit, -cfg.hvp_eps);
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = (up[i] * nv - down[i] * nv) / (2.0 * cfg.hvp_eps);
        return out;
      };
      diag.combine =
          gradcore::combine_aga(pg.g_ind, pg.g_col, hvp, cfg.aga_lambda);
      break;
    }
  }

  ParamVector dir = diag.combine.direction;
  diag.policy_grad_norm = clip_global_norm(dir, cfg.grad_clip);
  agent.policy_opt.ascend(agent.net.policy_params, dir, lr);

  for (double& x : vg) x = -x;
  diag.value_grad_norm = clip_global_norm(vg, cfg.grad_clip);
  agent.value_opt.ascend(agent.net.value_params, vg, lr);
  return diag;
}

UpdateStats ppo_update(AgentState& agent, TrajectoryBatch& batch,
                       Method method, const UpdateConfig& cfg, double lr,
                       Rng& shuffle_rng) {
  require(batch.has_advantages, "ppo_update needs a finished batch");
  require(cfg.epochs >= 1 && cfg.minibatches >= 1,
          "epochs and minibatches must be >= 1");
  const std::size_t n = batch.size();
  require(n >= cfg.minibatches, "fewer samples than minibatches");

  UpdateStats st;
  const auto& vi = cfg.critic_values ? batch.value_ind : batch.disc_ind;
  const auto& vc = cfg.critic_values ? batch.value_col : batch.disc_col;
  st.v_ind = std::accumulate(vi.begin(), vi.end(), 0.0) / double(n);
  st.v_col = std::accumulate(vc.begin(), vc.end(), 0.0) / double(n);

  normalize(batch.adv_ind);
  normalize(batch.adv_col);

  std::vector<std::size_t> idx(n);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < cfg.minibatches; ++k) {
      const std::size_t lo = k * n / cfg.minibatches;
      const std::size_t hi = (k + 1) * n / cfg.minibatches;
      const TrajectoryBatch mb =
          batch.gather(std::span<const std::size_t>(idx).subspan(lo, hi - lo));
      const StepDiagnostics d =
          update_agent(agent, mb, method, cfg, lr, st.v_ind, st.v_col);
      ++st.steps;
      if (d.combine.conflict) ++st.conflicts;
      ++st.branches[std::size_t(d.combine.branch)];
    }
  }
  return st;
}

}  // namespace fcg::agent
