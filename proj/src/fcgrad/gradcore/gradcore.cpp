#include "fcgrad/gradcore/gradcore.hpp"

#include <cmath>
#include <string>

#include "fcgrad/common/error.hpp"

namespace fcg::gradcore {
namespace {

void check_finite(ConstParams v, const char* name) {
  for (double x : v)
    if (!std::isfinite(x))
      throw Error(ErrorCode::ContractViolation,
                  std::string(name) + " has non-finite entries");
}

void check_pair(ConstParams g_ind, ConstParams g_col) {
  require(!g_ind.empty(), "gradient dimension must be >= 1");
  require(g_ind.size() == g_col.size(),
          "dimension mismatch: g_ind has " + std::to_string(g_ind.size()) +
              ", g_col has " + std::to_string(g_col.size()));
  check_finite(g_ind, "g_ind");
  check_finite(g_col, "g_col");
}

ParamVector copy_of(ConstParams v) { return ParamVector(v.begin(), v.end()); }

// g - coef * onto
ParamVector subtract_scaled(ConstParams g, double coef, ConstParams onto) {
  ParamVector out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] - coef * onto[i];
  return out;
}

ParamVector blend(ConstParams g_ind, ConstParams g_col, double beta) {
  // Endpoints return the operand itself so that beta in {0, 1} reproduces
  // the single-objective direction bit for bit.
  if (beta == 0.0) return copy_of(g_ind);
  if (beta == 1.0) return copy_of(g_col);
  ParamVector out(g_ind.size());
  const double w_ind = 1.0 - beta;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = w_ind * g_ind[i] + beta * g_col[i];
  return out;
}

void check_beta(double beta) {
  require(std::isfinite(beta) && beta >= 0.0 && beta <= 1.0,
          "beta must lie in [0, 1]");
}

}  // namespace

std::string_view branch_name(Branch b) {
  switch (b) {
    case Branch::NonConflictBlend: return "blend";
    case Branch::ProjectIndOntoColNormal: return "proj_ind";
    case Branch::ProjectColOntoIndNormal: return "proj_col";
    case Branch::PassThrough: return "pass_through";
  }
  return "unknown";
}

double dot(ConstParams a, ConstParams b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(ConstParams a) { return dot(a, a); }

double norm(ConstParams a) { return std::sqrt(norm_sq(a)); }

bool detect_conflict(ConstParams g_ind, ConstParams g_col) {
  check_pair(g_ind, g_col);
  return dot(g_ind, g_col) < 0.0;
}

ParamVector project_onto_normal_plane(ConstParams g, ConstParams onto,
                                      double eps) {
  check_pair(g, onto);
  const double denom = norm_sq(onto);
  require(denom >= eps, "cannot project onto the normal plane of a zero vector",
          ErrorCode::DegenerateVector);
  return subtract_scaled(g, dot(onto, g) / denom, onto);
}

CombineResult combine_fcgrad(const CombineInput& in) {
  check_pair(in.g_ind, in.g_col);
  check_beta(in.beta);
  CombineResult r;
  r.inner_product = dot(in.g_ind, in.g_col);
  r.conflict = r.inner_product < 0.0;
  if (!r.conflict) {
    r.branch = Branch::NonConflictBlend;
    r.direction = blend(in.g_ind, in.g_col, in.beta);
    return r;
  }
  if (in.v_col >= in.v_ind) {
    const double denom = norm_sq(in.g_col);
    if (denom < kDegenerateEps) {
      r.branch = Branch::PassThrough;
      r.direction = copy_of(in.g_ind);
      return r;
    }
    r.branch = Branch::ProjectIndOntoColNormal;
    r.projection_coefficient = r.inner_product / denom;
    r.direction = subtract_scaled(in.g_ind, r.projection_coefficient, in.g_col);
    return r;
  }
  const double denom = norm_sq(in.g_ind);
  if (denom < kDegenerateEps) {
    r.branch = Branch::PassThrough;
    r.direction = copy_of(in.g_col);
    return r;
  }
  r.branch = Branch::ProjectColOntoIndNormal;
  r.projection_coefficient = r.inner_product / denom;
  r.direction = subtract_scaled(in.g_col, r.projection_coefficient, in.g_ind);
  return r;
}

CombineResult combine_weighted(ConstParams g_ind, ConstParams g_col,
                               double beta) {
  check_pair(g_ind, g_col);
  check_beta(beta);
  CombineResult r;
  r.inner_product = dot(g_ind, g_col);
  r.conflict = r.inner_product < 0.0;
  r.branch = Branch::NonConflictBlend;
  r.direction = blend(g_ind, g_col, beta);
  return r;
}

CombineResult combine_pcgrad(ConstParams g_ind, ConstParams g_col) {
  check_pair(g_ind, g_col);
  CombineResult r;
  r.inner_product = dot(g_ind, g_col);
  r.conflict = r.inner_product < 0.0;
  ParamVector out(g_ind.size());
  if (!r.conflict) {
    r.branch = Branch::NonConflictBlend;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = 0.5 * (g_ind[i] + g_col[i]);
    r.direction = std::move(out);
    return r;
  }
  const double n_ind = norm_sq(g_ind);
  const double n_col = norm_sq(g_col);
  const bool ind_degenerate = n_ind < kDegenerateEps;
  const bool col_degenerate = n_col < kDegenerateEps;
  if (ind_degenerate || col_degenerate) {
    r.branch = Branch::PassThrough;
    if (ind_degenerate && col_degenerate) {
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = 0.5 * (g_ind[i] + g_col[i]);
      r.direction = std::move(out);
    } else {
      r.direction = copy_of(col_degenerate ? g_ind : g_col);
    }
    return r;
  }
  // Both projections are applied; the coefficient reported is the one used
  // on g_ind.
  const double c_ind = r.inner_product / n_col;
  const double c_col = r.inner_product / n_ind;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p_ind = g_ind[i] - c_ind * g_col[i];
    const double p_col = g_col[i] - c_col * g_ind[i];
    out[i] = 0.5 * (p_ind + p_col);
  }
  r.branch = Branch::ProjectIndOntoColNormal;
  r.projection_coefficient = c_ind;
  r.direction = std::move(out);
  return r;
}

CombineResult combine_aga(ConstParams g_ind, ConstParams g_col,
                          const HvpOperator& hvp, double lambda_mag) {
  check_pair(g_ind, g_col);
  require(std::isfinite(lambda_mag) && lambda_mag > 0.0,
          "lambda_mag must be > 0");
  require(static_cast<bool>(hvp), "AgA needs a Hessian-vector operator");
  const ParamVector h = hvp(g_col);
  require(h.size() == g_col.size(),
          "Hessian-vector product returned the wrong dimension");
  check_finite(h, "H_col^T g_col");

  CombineResult r;
  r.inner_product = dot(g_ind, g_col);
  r.conflict = r.inner_product < 0.0;
  r.branch = Branch::NonConflictBlend;
  const double sign_arg = dot(g_col, h) * (dot(g_ind, h) + norm_sq(h));
  const double lambda = (sign_arg < 0.0 ? -1.0 : 1.0) * lambda_mag;
  r.direction.resize(g_col.size());
  for (std::size_t i = 0; i < g_col.size(); ++i)
    r.direction[i] = g_col[i] + lambda * (g_ind[i] + h[i]);
  return r;
}

}  // namespace fcg::gradcore
