#include "fcgrad/agent/network.hpp"

#include <cmath>

#include "fcgrad/common/error.hpp"

namespace fcg::agent {

void SparseColumns::assign(const Eigen::Ref<const Matrix>& m) {
  start.assign(1, 0);
  row.clear();
  value.clear();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double* c = m.col(j).data();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (c[i] != 0.0) {
        row.push_back(int(i));
        value.push_back(c[i]);
      }
    }
    start.push_back(int(row.size()));
  }
}

std::size_t NetShape::policy_size() const {
  return hidden * obs_dim + hidden + actions * hidden + actions;
}

std::size_t NetShape::value_size() const { return 2 * (hidden + 1); }

std::string NetShape::layout_string() const {
  const auto h = std::to_string(hidden), d = std::to_string(obs_dim),
             a = std::to_string(actions);
  return "v1;enc_w:" + h + "x" + d + ":col;enc_b:" + h + ";pol_w:" + a + "x" +
         h + ":col;pol_b:" + a + ";vind_w:" + h + ";vind_b:1;vcol_w:" + h +
         ";vcol_b:1";
}

std::uint64_t NetShape::layout_hash() const {
  // FNV-1a, 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : layout_string()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

PolicyNetwork::PolicyNetwork(const NetShape& shape) : shape_(shape) {
  require(shape.obs_dim > 0 && shape.hidden > 0 && shape.actions > 0,
          "network dimensions must be positive");
  policy_params.assign(shape.policy_size(), 0.0);
  value_params.assign(shape.value_size(), 0.0);
}

void PolicyNetwork::init(Rng& rng, double policy_scale) {
  const std::size_t D = shape_.obs_dim, H = shape_.hidden, A = shape_.actions;
  std::fill(policy_params.begin(), policy_params.end(), 0.0);
  std::fill(value_params.begin(), value_params.end(), 0.0);
  const double enc_sd = 1.0 / std::sqrt(double(D));
  for (std::size_t i = 0; i < H * D; ++i) policy_params[i] = enc_sd * rng.normal();
  const double pol_sd = policy_scale / std::sqrt(double(H));
  for (std::size_t i = 0; i < A * H; ++i)
    policy_params[off_pol_w() + i] = pol_sd * rng.normal();
  const double v_sd = 1.0 / std::sqrt(double(H));
  for (std::size_t i = 0; i < H; ++i) value_params[i] = v_sd * rng.normal();
  for (std::size_t i = 0; i < H; ++i)
    value_params[off_vcol_w() + i] = v_sd * rng.normal();
}

PolicyNetwork::CMap PolicyNetwork::enc_w() const {
  return CMap(policy_params.data(), Eigen::Index(shape_.hidden),
              Eigen::Index(shape_.obs_dim));
}
PolicyNetwork::CVMap PolicyNetwork::enc_b() const {
  return CVMap(policy_params.data() + off_enc_b(), Eigen::Index(shape_.hidden));
}
PolicyNetwork::CMap PolicyNetwork::pol_w() const {
  return CMap(policy_params.data() + off_pol_w(), Eigen::Index(shape_.actions),
              Eigen::Index(shape_.hidden));
}
PolicyNetwork::CVMap PolicyNetwork::pol_b() const {
  return CVMap(policy_params.data() + off_pol_b(), Eigen::Index(shape_.actions));
}
PolicyNetwork::CVMap PolicyNetwork::vind_w() const {
  return CVMap(value_params.data(), Eigen::Index(shape_.hidden));
}
double PolicyNetwork::vind_b() const { return value_params[shape_.hidden]; }
PolicyNetwork::CVMap PolicyNetwork::vcol_w() const {
  return CVMap(value_params.data() + off_vcol_w(), Eigen::Index(shape_.hidden));
}
double PolicyNetwork::vcol_b() const { return value_params.back(); }

Forward PolicyNetwork::forward(const Eigen::Ref<const Matrix>& obs) const {
  require(std::size_t(obs.rows()) == shape_.obs_dim,
          "observation dimension does not match the network");
  Forward f;
  f.obs.assign(obs);
  // Eigen's vectorised paths peel by address, so products over maps of
  // std::vector storage round differently from run to run. Work on owned,
  // aligned copies instead.
  const Matrix W = enc_w();
  const Vector b = enc_b();
  f.hidden.resize(Eigen::Index(shape_.hidden), obs.cols());
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    auto h = f.hidden.col(j);
    h = b;
    for (int k = f.obs.start[std::size_t(j)]; k < f.obs.start[std::size_t(j) + 1]; ++k)
      h += f.obs.value[std::size_t(k)] * W.col(f.obs.row[std::size_t(k)]);
  }
  // tanh(z) = sign(z) (1 - e) / (1 + e) with e = exp(-2|z|); the vectorised
  // exp is several times faster than scalar tanh.
  {
    const Eigen::ArrayXXd e = (-2.0 * f.hidden.array().abs()).exp();
    f.hidden = (f.hidden.array().sign() * (1.0 - e) / (1.0 + e)).matrix();
  }
  const Matrix P = pol_w();
  const Vector pb = pol_b();
  Matrix logits = P * f.hidden;
  logits.colwise() += pb;
  f.logp.resize(logits.rows(), logits.cols());
  f.probs.resize(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const auto shifted = (logits.col(j).array() - m).eval();
    const double lse = std::log(shifted.exp().sum());
    f.logp.col(j) = shifted - lse;
    f.probs.col(j) = f.logp.col(j).array().exp();
  }
  const Vector wi = vind_w(), wc = vcol_w();
  f.v_ind = (f.hidden.transpose() * wi).array() + vind_b();
  f.v_col = (f.hidden.transpose() * wc).array() + vcol_b();
  return f;
}

ParamVector PolicyNetwork::flatten() const {
  ParamVector out(policy_params);
  out.insert(out.end(), value_params.begin(), value_params.end());
  return out;
}

void PolicyNetwork::unflatten(ConstParams flat) {
  require(flat.size() == policy_params.size() + value_params.size(),
          "flat parameter vector has the wrong length");
  std::copy(flat.begin(), flat.begin() + std::ptrdiff_t(policy_params.size()),
            policy_params.begin());
  std::copy(flat.begin() + std::ptrdiff_t(policy_params.size()), flat.end(),
            value_params.begin());
}

ActionDistribution policy_forward(const PolicyNetwork& net, ConstParams obs) {
  require(obs.size() == net.shape().obs_dim,
          "observation dimension does not match the network");
  Eigen::Map<const Matrix> x(obs.data(), Eigen::Index(obs.size()), 1);
  const Forward f = net.forward(x);
  ActionDistribution out;
  out.probs.assign(f.probs.data(), f.probs.data() + f.probs.size());
  out.v_ind = f.v_ind[0];
  out.v_col = f.v_col[0];
  return out;
}

}  // namespace fcg::agent
