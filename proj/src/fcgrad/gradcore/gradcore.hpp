#pragma once

// Gradient-space algebra shared by the analytic testbed and the agents:
// conflict detection, normal-plane projection and the four combiners.
// All functions are pure; identical inputs give bit-identical outputs.

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace fcg::gradcore {

using ParamVector = std::vector<double>;
using ConstParams = std::span<const double>;

// Squared norms below this are treated as zero vectors.
inline constexpr double kDegenerateEps = 1e-12;

enum class Branch {
  NonConflictBlend,
  ProjectIndOntoColNormal,
  ProjectColOntoIndNormal,
  PassThrough,
};

std::string_view branch_name(Branch b);

struct CombineResult {
  ParamVector direction;
  bool conflict = false;
  Branch branch = Branch::NonConflictBlend;
  double inner_product = 0.0;
  // The scalar <.,.>/||.||^2 actually applied; 0 when no projection ran.
  double projection_coefficient = 0.0;
};

struct CombineInput {
  ConstParams g_ind;
  ConstParams g_col;
  double v_ind = 0.0;
  double v_col = 0.0;
  double beta = 0.5;
};

// v -> H_col^T v at the current parameters.
using HvpOperator = std::function<ParamVector(ConstParams)>;

double dot(ConstParams a, ConstParams b);
double norm_sq(ConstParams a);
double norm(ConstParams a);

// True iff <g_ind, g_col> < 0. A zero inner product is not a conflict.
bool detect_conflict(ConstParams g_ind, ConstParams g_col);

// g - (<onto, g> / ||onto||^2) onto. Throws DegenerateVector when
// ||onto||^2 < eps.
ParamVector project_onto_normal_plane(ConstParams g, ConstParams onto,
                                      double eps = kDegenerateEps);

CombineResult combine_fcgrad(const CombineInput& in);
CombineResult combine_weighted(ConstParams g_ind, ConstParams g_col,
                               double beta);
CombineResult combine_pcgrad(ConstParams g_ind, ConstParams g_col);
CombineResult combine_aga(ConstParams g_ind, ConstParams g_col,
                          const HvpOperator& hvp, double lambda_mag);

}  // namespace fcg::gradcore
