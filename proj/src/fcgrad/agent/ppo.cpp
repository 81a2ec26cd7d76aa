#include "fcgrad/agent/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "fcgrad/common/error.hpp"

namespace fcg::agent {

void TrajectoryBatch::resize(std::size_t obs_dim, std::size_t n) {
  obs.resize(Eigen::Index(obs_dim), Eigen::Index(n));
  actions.assign(n, 0);
  for (auto* v : {&logp, &reward_ind, &reward_col, &value_ind, &value_col})
    v->assign(n, 0.0);
  done.assign(n, 0);
  for (auto* v : {&adv_ind, &adv_col, &ret_ind, &ret_col, &disc_ind, &disc_col})
    v->clear();
  has_advantages = false;
}

TrajectoryBatch TrajectoryBatch::gather(std::span<const std::size_t> idx) const {
  TrajectoryBatch out;
  out.obs.resize(obs.rows(), Eigen::Index(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] < size(), "gather index out of range");
    out.obs.col(Eigen::Index(k)) = obs.col(Eigen::Index(idx[k]));
  }
  auto pick = [&](const auto& src, auto& dst) {
    dst.clear();
    if (src.empty()) return;
    dst.reserve(idx.size());
    for (auto i : idx) dst.push_back(src[i]);
  };
  pick(actions, out.actions);
  pick(logp, out.logp);
  pick(reward_ind, out.reward_ind);
  pick(reward_col, out.reward_col);
  pick(value_ind, out.value_ind);
  pick(value_col, out.value_col);
  pick(done, out.done);
  pick(adv_ind, out.adv_ind);
  pick(adv_col, out.adv_col);
  pick(ret_ind, out.ret_ind);
  pick(ret_col, out.ret_col);
  pick(disc_ind, out.disc_ind);
  pick(disc_col, out.disc_col);
  out.has_advantages = has_advantages;
  return out;
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values, double bootstrap,
                      double gamma, double lambda,
                      std::span<const std::uint8_t> done) {
  require(rewards.size() == values.size() && rewards.size() == done.size(),
          "GAE inputs must be aligned");
  require(gamma >= 0.0 && gamma <= 1.0 && lambda >= 0.0 && lambda <= 1.0,
          "gamma and lambda must lie in [0,1]");
  const std::size_t T = rewards.size();
  GaeResult out;
  out.advantages.assign(T, 0.0);
  out.returns.assign(T, 0.0);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    const double live = done[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    const double a = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = a;
    out.returns[k] = a + values[k];
    next_value = values[k];
    next_adv = a;
  }
  return out;
}

std::vector<double> discounted_returns(std::span<const double> rewards,
                                       double gamma,
                                       std::span<const std::uint8_t> done) {
  require(rewards.size() == done.size(), "reward and done lengths differ");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) {
    if (done[k]) acc = 0.0;
    acc = rewards[k] + gamma * acc;
    out[k] = acc;
  }
  return out;
}

void finish_batch(TrajectoryBatch& b, std::size_t segment_length,
                  std::span<const double> bootstrap_ind,
                  std::span<const double> bootstrap_col, double gamma,
                  double lambda) {
  const std::size_t n = b.size();
  require(segment_length > 0 && n % segment_length == 0,
          "batch size must be a multiple of the segment length");
  const std::size_t segs = n / segment_length;
  require(bootstrap_ind.size() == segs && bootstrap_col.size() == segs,
          "one bootstrap value per segment required");
  for (auto* v : {&b.adv_ind, &b.adv_col, &b.ret_ind, &b.ret_col, &b.disc_ind,
                  &b.disc_col})
    v->assign(n, 0.0);
  for (std::size_t s = 0; s < segs; ++s) {
    const std::size_t o = s * segment_length;
    auto sub = [&](const auto& v) {
      return std::span(v).subspan(o, segment_length);
    };
    auto put = [&](std::vector<double>& dst, const std::vector<double>& src) {
      std::copy(src.begin(), src.end(), dst.begin() + std::ptrdiff_t(o));
    };
    const GaeResult gi = compute_gae(sub(b.reward_ind), sub(b.value_ind),
                                     bootstrap_ind[s], gamma, lambda, sub(b.done));
    const GaeResult gc = compute_gae(sub(b.reward_col), sub(b.value_col),
                                     bootstrap_col[s], gamma, lambda, sub(b.done));
    put(b.adv_ind, gi.advantages);
    put(b.ret_ind, gi.returns);
    put(b.adv_col, gc.advantages);
    put(b.ret_col, gc.returns);
    put(b.disc_ind, discounted_returns(sub(b.reward_ind), gamma, sub(b.done)));
    put(b.disc_col, discounted_returns(sub(b.reward_col), gamma, sub(b.done)));
  }
  b.has_advantages = true;
}

void normalize(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= double(v.size());
  const double sd = std::sqrt(var);
  const double scale = sd > 1e-8 ? 1.0 / sd : 1.0;
  for (double& x : v) x = (x - mean) * scale;
}

namespace {

void check_batch(const PolicyNetwork& net, const TrajectoryBatch& b) {
  require(b.size() > 0, "empty batch");
  require(std::size_t(b.obs.cols()) == b.size() &&
              std::size_t(b.obs.rows()) == net.shape().obs_dim,
          "batch observations do not match the network");
  require(b.has_advantages && b.adv_ind.size() == b.size() &&
              b.adv_col.size() == b.size(),
          "batch has no advantages");
  require(b.logp.size() == b.size(), "batch has no behaviour log-probs");
}

// Per-sample d(surrogate)/d(log pi(a_t)), already divided by B.
void surrogate_terms(const Forward& f, const TrajectoryBatch& b,
                     const std::vector<double>& adv, double clip,
                     double& value, Vector& coef) {
  const auto B = Eigen::Index(b.size());
  coef.setZero(B);
  value = 0.0;
  for (Eigen::Index t = 0; t < B; ++t) {
    const double A = adv[std::size_t(t)];
    require(std::isfinite(A), "non-finite advantage");
    const double lp = f.logp(b.actions[std::size_t(t)], t);
    const double ratio = std::exp(lp - b.logp[std::size_t(t)]);
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    const double un = ratio * A, cl = clipped * A;
    if (un <= cl) {
      value += un;
      coef[t] = ratio * A;
    } else {
      value += cl;
    }
  }
  value /= double(B);
  coef /= double(B);
}

// d(mean entropy)/d(logits), actions x B.
Matrix entropy_logit_grad(const Forward& f, double& mean_entropy) {
  const auto B = f.probs.cols();
  Matrix g(f.probs.rows(), B);
  mean_entropy = 0.0;
  for (Eigen::Index t = 0; t < B; ++t) {
    const double H = -(f.probs.col(t).array() * f.logp.col(t).array()).sum();
    mean_entropy += H;
    g.col(t) = -(f.probs.col(t).array() * (f.logp.col(t).array() + H));
  }
  mean_entropy /= double(B);
  g /= double(B);
  return g;
}

// Backpropagates logit gradients (actions x B) to a flat policy gradient.
ParamVector backprop_policy(const PolicyNetwork& net, const Forward& f,
                            const Matrix& g_logits) {
  const auto& s = net.shape();
  // Owned temporaries keep the arithmetic independent of where `out` lands
  // in memory; see PolicyNetwork::forward.
  const Matrix d_pol_w = g_logits * f.hidden.transpose();
  const Vector d_pol_b = g_logits.rowwise().sum();
  const Matrix P = net.pol_w();
  Matrix dz = P.transpose() * g_logits;
  dz.array() *= 1.0 - f.hidden.array().square();
  Matrix d_enc_w = Matrix::Zero(Eigen::Index(s.hidden), Eigen::Index(s.obs_dim));
  for (Eigen::Index t = 0; t < dz.cols(); ++t) {
    const auto g = dz.col(t);
    for (int k = f.obs.start[std::size_t(t)]; k < f.obs.start[std::size_t(t) + 1]; ++k)
      d_enc_w.col(f.obs.row[std::size_t(k)]) += f.obs.value[std::size_t(k)] * g;
  }
  const Vector d_enc_b = dz.rowwise().sum();

  ParamVector out(s.policy_size());
  auto put = [&](const auto& m, std::size_t off) {
    std::copy(m.data(), m.data() + m.size(), out.begin() + std::ptrdiff_t(off));
  };
  put(d_enc_w, 0);
  put(d_enc_b, net.off_enc_b());
  put(d_pol_w, net.off_pol_w());
  put(d_pol_b, net.off_pol_b());
  return out;
}

// d(log pi(a_t))/d(logits) scaled per sample: coef_t (onehot(a_t) - p_t).
Matrix logit_grad(const Forward& f, const TrajectoryBatch& b, const Vector& coef) {
  Matrix g = -f.probs;
  for (Eigen::Index t = 0; t < g.cols(); ++t) {
    g(b.actions[std::size_t(t)], t) += 1.0;
    g.col(t) *= coef[t];
  }
  return g;
}

}  // namespace

double ppo_surrogate(const PolicyNetwork& net, const TrajectoryBatch& batch,
                     Stream stream, const SurrogateOptions& opts) {
  check_batch(net, batch);
  const Forward f = net.forward(batch.obs);
  double value = 0.0;
  Vector coef;
  surrogate_terms(f, batch,
                  stream == Stream::Individual ? batch.adv_ind : batch.adv_col,
                  opts.clip, value, coef);
  if (opts.entropy_coef != 0.0) {
    double H = 0.0;
    entropy_logit_grad(f, H);
    value += opts.entropy_coef * H;
  }
  return value;
}

PolicyGradients ppo_policy_gradients(const PolicyNetwork& net,
                                     const TrajectoryBatch& batch,
                                     const SurrogateOptions& opts,
                                     const Forward* fwd) {
  check_batch(net, batch);
  require(opts.clip > 0.0, "clip must be > 0");
  Forward local;
  if (!fwd) local = net.forward(batch.obs);
  const Forward& f = fwd ? *fwd : local;
  PolicyGradients out;
  Vector ci, cc;
  surrogate_terms(f, batch, batch.adv_ind, opts.clip, out.surrogate_ind, ci);
  surrogate_terms(f, batch, batch.adv_col, opts.clip, out.surrogate_col, cc);
  Matrix gi = logit_grad(f, batch, ci);
  Matrix gc = logit_grad(f, batch, cc);
  if (opts.entropy_coef != 0.0) {
    const Matrix ge = opts.entropy_coef * entropy_logit_grad(f, out.entropy);
    gi += ge;
    gc += ge;
    out.surrogate_ind += opts.entropy_coef * out.entropy;
    out.surrogate_col += opts.entropy_coef * out.entropy;
  }
  out.g_ind = backprop_policy(net, f, gi);
  out.g_col = backprop_policy(net, f, gc);
  return out;
}

ParamVector ppo_policy_gradient(const PolicyNetwork& net,
                                const TrajectoryBatch& batch, Stream stream,
                                double clip) {
  check_batch(net, batch);
  require(clip > 0.0, "clip must be > 0");
  const Forward f = net.forward(batch.obs);
  double value = 0.0;
  Vector coef;
  surrogate_terms(f, batch,
                  stream == Stream::Individual ? batch.adv_ind : batch.adv_col,
                  clip, value, coef);
  return backprop_policy(net, f, logit_grad(f, batch, coef));
}

double value_loss(const PolicyNetwork& net, const TrajectoryBatch& b,
                  double value_coef) {
  require(b.size() > 0, "empty batch");
  require(b.ret_ind.size() == b.size() && b.ret_col.size() == b.size(),
          "batch has no returns");
  const Forward f = net.forward(b.obs);
  double si = 0.0, sc = 0.0;
  for (std::size_t t = 0; t < b.size(); ++t) {
    const double ei = f.v_ind[Eigen::Index(t)] - b.ret_ind[t];
    const double ec = f.v_col[Eigen::Index(t)] - b.ret_col[t];
    si += ei * ei;
    sc += ec * ec;
  }
  return value_coef * (si + sc) / double(b.size());
}

ParamVector value_gradient(const PolicyNetwork& net, const TrajectoryBatch& b,
                           double value_coef, const Forward* fwd) {
  require(b.size() > 0, "empty batch");
  require(b.ret_ind.size() == b.size() && b.ret_col.size() == b.size(),
          "batch has no returns");
  Forward local;
  if (!fwd) local = net.forward(b.obs);
  const Forward& f = fwd ? *fwd : local;
  const auto B = Eigen::Index(b.size());
  Vector ei(B), ec(B);
  for (Eigen::Index t = 0; t < B; ++t) {
    ei[t] = f.v_ind[t] - b.ret_ind[std::size_t(t)];
    ec[t] = f.v_col[t] - b.ret_col[std::size_t(t)];
  }
  const double k = 2.0 * value_coef / double(B);
  const std::size_t H = net.shape().hidden;
  ParamVector out(net.shape().value_size());
  const Vector gi = k * (f.hidden * ei), gc = k * (f.hidden * ec);
  std::copy(gi.data(), gi.data() + H, out.begin());
  out[H] = k * ei.sum();
  std::copy(gc.data(), gc.data() + H, out.begin() + std::ptrdiff_t(net.off_vcol_w()));
  out.back() = k * ec.sum();
  return out;
}

std::vector<double> inequity_aversion_shape(std::span<const double> r,
                                            double alpha_ia, double beta_ia) {
  const std::size_t n = r.size();
  require(n >= 2, "inequity aversion needs at least two agents");
  std::vector<double> out(n);
  const double scale = 1.0 / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double envy = 0.0, guilt = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      envy += std::max(r[j] - r[i], 0.0);
      guilt += std::max(r[i] - r[j], 0.0);
    }
    out[i] = r[i] - alpha_ia * scale * envy - beta_ia * scale * guilt;
  }
  return out;
}

}  // namespace fcg::agent
