#pragma once

#include <cstdint>

#include "fcgrad/gradcore/gradcore.hpp"

namespace fcg::agent {

using gradcore::ConstParams;
using gradcore::ParamVector;

struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  ParamVector m;
  ParamVector v;

  void reset(std::size_t dim);
  // params += lr * mhat / (sqrt(vhat) + eps), moments fed with `direction`.
  // Callers minimising a loss pass its negated gradient.
  void ascend(ParamVector& params, ConstParams direction, double lr);
};

// Rescales v in place so its norm is at most max_norm; returns the norm
// before clipping. max_norm <= 0 disables clipping.
double clip_global_norm(ParamVector& v, double max_norm);

}  // namespace fcg::agent
