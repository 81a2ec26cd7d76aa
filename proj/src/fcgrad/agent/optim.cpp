#include "fcgrad/agent/optim.hpp"

#include <cmath>

#include "fcgrad/common/error.hpp"

namespace fcg::agent {

void Adam::reset(std::size_t dim) {
  t = 0;
  m.assign(dim, 0.0);
  v.assign(dim, 0.0);
}

void Adam::ascend(ParamVector& params, ConstParams direction, double lr) {
  require(params.size() == direction.size() && m.size() == params.size() &&
              v.size() == params.size(),
          "optimizer state dimension mismatch");
  ++t;
  const double c1 = 1.0 - std::pow(beta1, double(t));
  const double c2 = 1.0 - std::pow(beta2, double(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = direction[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    params[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

double clip_global_norm(ParamVector& v, double max_norm) {
  const double n = gradcore::norm(v);
  if (max_norm > 0.0 && n > max_norm) {
    const double s = max_norm / n;
    for (double& x : v) x *= s;
  }
  return n;
}

}  // namespace fcg::agent
