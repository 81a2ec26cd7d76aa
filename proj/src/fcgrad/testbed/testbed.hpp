#pragma once

// Analytic two-objective problems and the checks that exercise the
// monotonicity, Lyapunov-decrease, step-size and gap-convergence guarantees
// of the conflict-aware combiner on them.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fcgrad/gradcore/gradcore.hpp"

namespace fcg::testbed {

using gradcore::ConstParams;
using gradcore::ParamVector;

struct SmoothBiObjective {
  std::size_t dim = 0;
  std::function<double(ConstParams)> eval_ind;
  std::function<double(ConstParams)> eval_col;
  std::function<ParamVector(ConstParams)> grad_ind;
  std::function<ParamVector(ConstParams)> grad_col;
  std::function<ParamVector(ConstParams theta, ConstParams v)> hvp_col;
  // Valid for both objectives and for the Lyapunov function delta^2 / 2.
  double smoothness_L = 1.0;
};

// V_ind = -c ||theta - a||^2, V_col = -c ||theta - b||^2.
//
// The value gap is affine in theta, so delta^2 / 2 has curvature
// ||grad delta||^2 = 4 c^2 ||a - b||^2; smoothness_L is the larger of that
// and the objectives' own 2c.
SmoothBiObjective make_quadratic_pair(ConstParams center_ind,
                                      ConstParams center_col,
                                      double curvature);

enum class Combiner { FCGrad, Weighted, PCGrad, AgA };

std::string combiner_name(Combiner c);

struct StepResult {
  ParamVector theta;
  gradcore::CombineResult combine;
};

StepResult ascent_step(const SmoothBiObjective& obj, Combiner combiner,
                       ConstParams theta, double eta, double beta,
                       double lambda_mag = 1.0);

struct StepRule {
  enum class Kind { Constant, GapScaled, Harmonic };
  Kind kind = Kind::GapScaled;
  double c = 0.0;

  static StepRule constant(double eta) { return {Kind::Constant, eta}; }
  // eta_t = min(c, |delta_t| / L)
  static StepRule gap_scaled(double c) { return {Kind::GapScaled, c}; }
  // eta_t = min(c / (t + 1), |delta_t| / L)
  static StepRule harmonic(double c) { return {Kind::Harmonic, c}; }

  double eta(std::size_t t, double delta, double L) const;
};

struct TraceEntry {
  ParamVector theta;
  double v_ind = 0.0;
  double v_col = 0.0;
  double delta = 0.0;
  bool conflict = false;
  double eta = 0.0;
  double direction_norm = 0.0;
};

// Entry t holds the iterate theta_t and the step taken from it; the final
// entry is the last iterate and carries eta = 0.
struct AscentTrace {
  std::vector<TraceEntry> entries;
  bool truncated = false;
  std::string error;
};

AscentTrace run_schedule(const SmoothBiObjective& obj, Combiner combiner,
                         ConstParams theta0, std::size_t steps,
                         const StepRule& rule, double beta,
                         double lambda_mag = 1.0);

struct Verdict {
  enum class Status { Pass, Fail, Skipped };
  Status status = Status::Pass;
  // Index of the first violating step, when one exists.
  std::optional<std::size_t> first_violation;
  // Largest value of (lhs - rhs) of the checked inequality, tolerance
  // included; positive means violated.
  double worst_margin = 0.0;
  std::string detail;

  bool passed() const { return status == Status::Pass; }
};

Verdict verify_monotone(const AscentTrace& trace, double tol);
Verdict verify_gap_convergence(const AscentTrace& trace, double epsilon,
                               double tail_fraction);
// On every conflict step: delta_{t+1}^2/2 - delta_t^2/2 <=
// -(eta_t/2) |delta_t| ||g_t||^2 + tol. Skipped when a conflict step used
// eta_t > |delta_t| / L.
Verdict verify_lyapunov_decrease(const AscentTrace& trace,
                                 const SmoothBiObjective& obj, double tol);

struct ScalarObjective {
  std::function<double(ConstParams)> eval;
  std::function<ParamVector(ConstParams)> grad;
  double smoothness_L = 1.0;
};

Verdict verify_stepsize_lemma(const ScalarObjective& J, ConstParams theta,
                              ConstParams g2, std::size_t trials,
                              std::uint64_t seed);

// Central finite differences of eval against grad at seeded random points in
// [-box, box]^d.
Verdict check_gradient_consistency(const SmoothBiObjective& obj,
                                   std::size_t points, std::uint64_t seed,
                                   double rel_tol = 1e-5, double box = 3.0);
Verdict check_hessian_consistency(const SmoothBiObjective& obj,
                                  std::size_t points, std::uint64_t seed,
                                  double rel_tol = 1e-4, double box = 3.0);

}  // namespace fcg::testbed
