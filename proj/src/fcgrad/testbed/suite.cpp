#include "fcgrad/testbed/suite.hpp"

#include <cmath>
#include <set>

#include "fcgrad/common/csv.hpp"
#include "fcgrad/common/error.hpp"
#include "fcgrad/common/rng.hpp"

namespace fcg::testbed {

namespace {

std::size_t instance_dim(const SuiteConfig& cfg, std::size_t index) {
  return cfg.dims[index % cfg.dims.size()];
}

SuiteRecord from_verdict(const std::string& check, Combiner comb,
                         std::size_t instance, std::size_t dim,
                         std::uint64_t seed, bool expected,
                         const Verdict& v) {
  SuiteRecord r;
  r.check = check;
  r.combiner = combiner_name(comb);
  r.instance = instance;
  r.dim = dim;
  r.seed = seed;
  r.expected_pass = expected;
  r.passed = v.passed();
  r.skipped = v.status == Verdict::Status::Skipped;
  r.worst_margin = v.worst_margin;
  r.detail = v.detail;
  return r;
}

void validate(const SuiteConfig& cfg) {
  require(!cfg.dims.empty() || cfg.instances == 0,
          "suite needs at least one dimension", ErrorCode::Config);
  for (auto d : cfg.dims) require(d >= 1, "suite dims must be >= 1", ErrorCode::Config);
  require(cfg.curvature > 0.0, "suite curvature must be > 0", ErrorCode::Config);
  require(cfg.beta >= 0.0 && cfg.beta <= 1.0, "suite beta must lie in [0,1]",
          ErrorCode::Config);
  require(cfg.step_scale > 0.0, "suite step_scale must be > 0", ErrorCode::Config);
  require(cfg.tail_fraction > 0.0 && cfg.tail_fraction <= 1.0,
          "suite tail_fraction must lie in (0,1]", ErrorCode::Config);
  require(cfg.gap_epsilon > 0.0, "suite gap_epsilon must be > 0", ErrorCode::Config);
}

}  // namespace

bool SuiteReport::ok() const {
  for (const auto& r : records)
    if (r.expected_pass && !r.passed && !r.skipped) return false;
  return negative_control_ok;
}

SuiteInstance make_suite_instance(const SuiteConfig& cfg, std::size_t index) {
  const std::size_t d = instance_dim(cfg, index);
  Rng rng = Rng::stream(cfg.master_seed, {kStreamVerify, index});
  SuiteInstance inst;
  inst.center_ind.resize(d);
  inst.center_col.resize(d);
  for (auto& x : inst.center_ind) x = rng.uniform(-cfg.center_box, cfg.center_box);
  for (auto& x : inst.center_col) x = rng.uniform(-cfg.center_box, cfg.center_box);
  inst.objective = make_quadratic_pair(inst.center_ind, inst.center_col, cfg.curvature);
  return inst;
}

ParamVector suite_start_point(const SuiteConfig& cfg, std::size_t index,
                              std::size_t dim, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, {kStreamVerify, cfg.master_seed, index});
  ParamVector p(dim);
  for (auto& x : p) x = rng.uniform(-cfg.start_box, cfg.start_box);
  return p;
}

SuiteReport run_suite(const SuiteConfig& cfg) {
  validate(cfg);
  SuiteReport rep;
  if (cfg.instances == 0 || cfg.seeds.empty()) {
    rep.warnings.push_back("empty instance grid: no checks were run");
    return rep;
  }
  std::set<std::size_t> weighted_failed;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const SuiteInstance inst = make_suite_instance(cfg, i);
    const SmoothBiObjective& obj = inst.objective;
    const std::size_t d = obj.dim;
    const StepRule rule = StepRule::gap_scaled(cfg.step_scale / obj.smoothness_L);

    for (std::uint64_t seed : cfg.seeds) {
      const std::uint64_t check_seed = Rng::derive(seed, {kStreamVerify, i, 1});
      auto add = [&](const std::string& check, Combiner comb, bool expected,
                     const Verdict& v) {
        rep.records.push_back(from_verdict(check, comb, i, d, seed, expected, v));
      };

      add("gradient_consistency", Combiner::FCGrad, true,
          check_gradient_consistency(obj, cfg.consistency_points, check_seed));
      add("hessian_consistency", Combiner::FCGrad, true,
          check_hessian_consistency(obj, cfg.consistency_points, check_seed + 1));

      const ParamVector theta0 = suite_start_point(cfg, i, d, seed);

      // Step-size lemma on each objective, along a random direction turned
      // to have a positive inner product with that objective's gradient.
      Rng dir_rng = Rng::stream(check_seed, {2});
      for (int which = 0; which < 2; ++which) {
        ScalarObjective J{which == 0 ? obj.eval_ind : obj.eval_col,
                          which == 0 ? obj.grad_ind : obj.grad_col,
                          obj.smoothness_L};
        ParamVector g2(d);
        for (auto& x : g2) x = dir_rng.normal();
        if (gradcore::dot(J.grad(theta0), g2) < 0.0)
          for (auto& x : g2) x = -x;
        add(which == 0 ? "stepsize_lemma_ind" : "stepsize_lemma_col",
            Combiner::FCGrad, true,
            verify_stepsize_lemma(J, theta0, g2, cfg.lemma_trials,
                                  check_seed + 3 + which));
      }

      const AscentTrace fc =
          run_schedule(obj, Combiner::FCGrad, theta0, cfg.steps, rule, cfg.beta);
      add("monotone", Combiner::FCGrad, true,
          verify_monotone(fc, cfg.monotone_tol));
      add("lyapunov_decrease", Combiner::FCGrad, true,
          verify_lyapunov_decrease(fc, obj, cfg.lyapunov_tol));
      add("gap_convergence", Combiner::FCGrad, true,
          verify_gap_convergence(fc, cfg.gap_epsilon, cfg.tail_fraction));

      const AscentTrace wt =
          run_schedule(obj, Combiner::Weighted, theta0, cfg.steps, rule, cfg.beta);
      const Verdict wv =
          verify_gap_convergence(wt, cfg.gap_epsilon, cfg.tail_fraction);
      add("gap_convergence", Combiner::Weighted, false, wv);
      if (!wv.passed()) weighted_failed.insert(i);
    }
  }
  rep.negative_control_failures = weighted_failed.size();
  const auto needed = static_cast<std::size_t>(
      std::ceil(cfg.negative_control_fraction * double(cfg.instances) - 1e-9));
  rep.negative_control_ok = rep.negative_control_failures >= needed;
  return rep;
}

void write_suite_csv(const SuiteReport& report, const std::string& path) {
  csv::Writer w(path);
  w.row({"check", "combiner", "instance", "dim", "seed", "expected", "passed",
         "skipped", "worst_margin", "detail"});
  for (const auto& r : report.records) {
    w.row({r.check, r.combiner, csv::format(r.instance), csv::format(r.dim),
           csv::format(r.seed), r.expected_pass ? "pass" : "fail",
           csv::format(r.passed), csv::format(r.skipped),
           csv::format(r.worst_margin), r.detail});
  }
  w.close();
}

}  // namespace fcg::testbed
