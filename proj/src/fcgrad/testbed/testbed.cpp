#include "fcgrad/testbed/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fcgrad/common/error.hpp"
#include "fcgrad/common/rng.hpp"

namespace fcg::testbed {

using gradcore::dot;
using gradcore::norm;
using gradcore::norm_sq;

SmoothBiObjective make_quadratic_pair(ConstParams center_ind,
                                      ConstParams center_col,
                                      double curvature) {
  require(!center_ind.empty() && center_ind.size() == center_col.size(),
          "quadratic pair centers must share a nonzero dimension");
  require(std::isfinite(curvature) && curvature > 0.0,
          "curvature must be > 0");
  const std::size_t d = center_ind.size();
  ParamVector a(center_ind.begin(), center_ind.end());
  ParamVector b(center_col.begin(), center_col.end());
  const double c = curvature;

  auto value = [c](const ParamVector& center) {
    return [c, center](ConstParams theta) {
      double s = 0.0;
      for (std::size_t i = 0; i < center.size(); ++i) {
        const double r = theta[i] - center[i];
        s += r * r;
      }
      return -c * s;
    };
  };
  auto gradient = [c](const ParamVector& center) {
    return [c, center](ConstParams theta) {
      ParamVector g(center.size());
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = 2.0 * c * (center[i] - theta[i]);
      return g;
    };
  };

  double gap_sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) gap_sq += (a[i] - b[i]) * (a[i] - b[i]);

  SmoothBiObjective obj;
  obj.dim = d;
  obj.eval_ind = value(a);
  obj.eval_col = value(b);
  obj.grad_ind = gradient(a);
  obj.grad_col = gradient(b);
  obj.hvp_col = [c](ConstParams, ConstParams v) {
    ParamVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -2.0 * c * v[i];
    return out;
  };
  obj.smoothness_L = std::max(2.0 * c, 4.0 * c * c * gap_sq);
  return obj;
}

std::string combiner_name(Combiner c) {
  switch (c) {
    case Combiner::FCGrad: return "FCGrad";
    case Combiner::Weighted: return "Weighted";
    case Combiner::PCGrad: return "PCGrad";
    case Combiner::AgA: return "AgA";
  }
  return "unknown";
}

StepResult ascent_step(const SmoothBiObjective& obj, Combiner combiner,
                       ConstParams theta, double eta, double beta,
                       double lambda_mag) {
  require(theta.size() == obj.dim, "theta dimension does not match objective");
  require(std::isfinite(eta) && eta >= 0.0, "step size must be >= 0");
  const ParamVector g_ind = obj.grad_ind(theta);
  const ParamVector g_col = obj.grad_col(theta);

  StepResult out;
  switch (combiner) {
    case Combiner::FCGrad:
      out.combine = gradcore::combine_fcgrad(
          {g_ind, g_col, obj.eval_ind(theta), obj.eval_col(theta), beta});
      break;
    case Combiner::Weighted:
      out.combine = gradcore::combine_weighted(g_ind, g_col, beta);
      break;
    case Combiner::PCGrad:
      out.combine = gradcore::combine_pcgrad(g_ind, g_col);
      break;
    case Combiner::AgA: {
      ParamVector at(theta.begin(), theta.end());
      auto hvp = [&obj, at](ConstParams v) { return obj.hvp_col(at, v); };
      out.combine = gradcore::combine_aga(g_ind, g_col, hvp, lambda_mag);
      break;
    }
  }
  out.theta.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i)
    out.theta[i] = theta[i] + eta * out.combine.direction[i];
  return out;
}

double StepRule::eta(std::size_t t, double delta, double L) const {
  const double cap = std::abs(delta) / L;
  switch (kind) {
    case Kind::Constant: return c;
    case Kind::GapScaled: return std::min(c, cap);
    case Kind::Harmonic:
      return std::min(c / static_cast<double>(t + 1), cap);
  }
  return 0.0;
}

AscentTrace run_schedule(const SmoothBiObjective& obj, Combiner combiner,
                         ConstParams theta0, std::size_t steps,
                         const StepRule& rule, double beta,
                         double lambda_mag) {
  require(steps >= 1, "run_schedule needs at least one step");
  require(theta0.size() == obj.dim, "theta0 dimension does not match objective");
  AscentTrace trace;
  trace.entries.reserve(steps + 1);
  ParamVector theta(theta0.begin(), theta0.end());

  auto record = [&](TraceEntry& e) {
    e.theta = theta;
    e.v_ind = obj.eval_ind(theta);
    e.v_col = obj.eval_col(theta);
    e.delta = e.v_ind - e.v_col;
    if (!std::isfinite(e.v_ind) || !std::isfinite(e.v_col)) {
      trace.truncated = true;
      trace.error = "non-finite objective value at step " +
                    std::to_string(trace.entries.size());
      return false;
    }
    return true;
  };

  for (std::size_t t = 0; t < steps; ++t) {
    TraceEntry e;
    if (!record(e)) return trace;
    e.eta = rule.eta(t, e.delta, obj.smoothness_L);
    StepResult step = ascent_step(obj, combiner, theta, e.eta, beta, lambda_mag);
    e.conflict = step.combine.conflict;
    e.direction_norm = norm(step.combine.direction);
    trace.entries.push_back(std::move(e));
    theta = std::move(step.theta);
  }
  TraceEntry last;
  if (record(last)) trace.entries.push_back(std::move(last));
  return trace;
}

namespace {

Verdict finish(Verdict v, bool ok, const std::string& what) {
  v.status = ok ? Verdict::Status::Pass : Verdict::Status::Fail;
  std::ostringstream os;
  os << what << "; worst margin " << v.worst_margin;
  if (v.first_violation) os << "; first violation at " << *v.first_violation;
  v.detail = os.str();
  return v;
}

}  // namespace

Verdict verify_monotone(const AscentTrace& trace, double tol) {
  Verdict v;
  v.worst_margin = -tol;
  const auto& e = trace.entries;
  for (std::size_t t = 0; t + 1 < e.size(); ++t) {
    const double drop = std::max(e[t].v_ind - e[t + 1].v_ind,
                                 e[t].v_col - e[t + 1].v_col);
    const double margin = drop - tol;
    v.worst_margin = std::max(v.worst_margin, margin);
    if (margin > 0.0 && !v.first_violation) v.first_violation = t + 1;
  }
  return finish(v, !v.first_violation, "monotone non-decrease");
}

Verdict verify_gap_convergence(const AscentTrace& trace, double epsilon,
                               double tail_fraction) {
  require(tail_fraction > 0.0 && tail_fraction <= 1.0,
          "tail_fraction must lie in (0, 1]");
  Verdict v;
  const auto& e = trace.entries;
  if (e.empty()) {
    v.status = Verdict::Status::Skipped;
    v.detail = "empty trace";
    return v;
  }
  const auto n = e.size();
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * double(n))));
  double worst = 0.0;
  for (std::size_t t = n - tail; t < n; ++t) {
    const double g = std::abs(e[t].delta);
    if (g >= epsilon && !v.first_violation) v.first_violation = t;
    worst = std::max(worst, g);
  }
  v.worst_margin = worst - epsilon;
  return finish(v, worst < epsilon, "tail |delta| < epsilon");
}

Verdict verify_lyapunov_decrease(const AscentTrace& trace,
                                 const SmoothBiObjective& obj, double tol) {
  Verdict v;
  v.worst_margin = -tol;
  const auto& e = trace.entries;
  std::size_t conflict_steps = 0;
  for (std::size_t t = 0; t + 1 < e.size(); ++t) {
    if (!e[t].conflict) continue;
    ++conflict_steps;
    const double abs_delta = std::abs(e[t].delta);
    if (e[t].eta > abs_delta / obj.smoothness_L * (1.0 + 1e-12)) {
      v.status = Verdict::Status::Skipped;
      v.detail = "step size above |delta|/L on conflict step " +
                 std::to_string(t);
      return v;
    }
    const double lhs = 0.5 * e[t + 1].delta * e[t + 1].delta -
                       0.5 * e[t].delta * e[t].delta;
    const double rhs = -0.5 * e[t].eta * abs_delta * e[t].direction_norm *
                       e[t].direction_norm;
    const double margin = lhs - rhs - tol;
    v.worst_margin = std::max(v.worst_margin, margin);
    if (margin > 0.0 && !v.first_violation) v.first_violation = t;
  }
  return finish(v, !v.first_violation,
                "Lyapunov decrease over " + std::to_string(conflict_steps) +
                    " conflict steps");
}

Verdict verify_stepsize_lemma(const ScalarObjective& J, ConstParams theta,
                              ConstParams g2, std::size_t trials,
                              std::uint64_t seed) {
  Verdict v;
  const ParamVector g1 = J.grad(theta);
  require(g1.size() == g2.size(), "direction dimension mismatch");
  const double ip = dot(g1, g2);
  const double g2_sq = norm_sq(g2);
  if (!(ip > 0.0) || !(g2_sq > 0.0)) {
    v.status = Verdict::Status::Skipped;
    v.detail = "no positive-inner-product direction at theta";
    return v;
  }
  const double bound = 2.0 * ip / (J.smoothness_L * g2_sq);
  const double base = J.eval(theta);
  Rng rng(seed);
  v.worst_margin = -std::numeric_limits<double>::infinity();
  ParamVector probe(theta.size());
  for (std::size_t k = 0; k < trials; ++k) {
    const double eta = bound * rng.uniform_open();
    for (std::size_t i = 0; i < probe.size(); ++i)
      probe[i] = theta[i] + eta * g2[i];
    // Strict improvement: base - J(probe) must be negative.
    const double margin = base - J.eval(probe);
    v.worst_margin = std::max(v.worst_margin, margin);
    if (!(margin < 0.0) && !v.first_violation) v.first_violation = k;
  }
  return finish(v, !v.first_violation, "strict improvement inside step bound");
}

namespace {

ParamVector random_point(Rng& rng, std::size_t d, double box) {
  ParamVector p(d);
  for (auto& x : p) x = rng.uniform(-box, box);
  return p;
}

double relative_error(ConstParams approx, ConstParams exact) {
  double diff = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i)
    diff += (approx[i] - exact[i]) * (approx[i] - exact[i]);
  const double scale = std::max({norm(approx), norm(exact), 1e-12});
  return std::sqrt(diff) / scale;
}

}  // namespace

Verdict check_gradient_consistency(const SmoothBiObjective& obj,
                                   std::size_t points, std::uint64_t seed,
                                   double rel_tol, double box) {
  Verdict v;
  v.worst_margin = -rel_tol;
  Rng rng(seed);
  const double h = 1e-5;
  for (std::size_t k = 0; k < points; ++k) {
    ParamVector theta = random_point(rng, obj.dim, box);
    for (int which = 0; which < 2; ++which) {
      const auto& f = which == 0 ? obj.eval_ind : obj.eval_col;
      const ParamVector g = which == 0 ? obj.grad_ind(theta) : obj.grad_col(theta);
      ParamVector fd(obj.dim);
      for (std::size_t i = 0; i < obj.dim; ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        const double up = f(theta);
        theta[i] = keep - h;
        const double down = f(theta);
        theta[i] = keep;
        fd[i] = (up - down) / (2.0 * h);
      }
      const double margin = relative_error(fd, g) - rel_tol;
      v.worst_margin = std::max(v.worst_margin, margin);
      if (margin > 0.0 && !v.first_violation) v.first_violation = k;
    }
  }
  return finish(v, !v.first_violation, "gradient vs central differences");
}

Verdict check_hessian_consistency(const SmoothBiObjective& obj,
                                  std::size_t points, std::uint64_t seed,
                                  double rel_tol, double box) {
  Verdict v;
  v.worst_margin = -rel_tol;
  Rng rng(seed);
  const double eps = 1e-4;
  for (std::size_t k = 0; k < points; ++k) {
    const ParamVector theta = random_point(rng, obj.dim, box);
    ParamVector dir(obj.dim);
    for (auto& x : dir) x = rng.normal();
    ParamVector up(theta), down(theta);
    for (std::size_t i = 0; i < obj.dim; ++i) {
      up[i] += eps * dir[i];
      down[i] -= eps * dir[i];
    }
    const ParamVector gu = obj.grad_col(up);
    const ParamVector gd = obj.grad_col(down);
    ParamVector fd(obj.dim);
    for (std::size_t i = 0; i < obj.dim; ++i) fd[i] = (gu[i] - gd[i]) / (2.0 * eps);
    const double margin = relative_error(fd, obj.hvp_col(theta, dir)) - rel_tol;
    v.worst_margin = std::max(v.worst_margin, margin);
    if (margin > 0.0 && !v.first_violation) v.first_violation = k;
  }
  return finish(v, !v.first_violation, "Hessian-vector product vs differences");
}

}  // namespace fcg::testbed
