// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//   fcgrad_acceptance [--only N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fcgrad/agent/update.hpp"
#include "fcgrad/common/log.hpp"
#include "fcgrad/common/rng.hpp"
#include "fcgrad/gradcore/gradcore.hpp"
#include "fcgrad/harness/commands.hpp"
#include "fcgrad/metrics/metrics.hpp"
#include "fcgrad/testbed/suite.hpp"

using namespace fcg;
namespace fs = std::filesystem;
using gradcore::ParamVector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ParamVector gaussian(Rng& rng, std::size_t n) {
  ParamVector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ----
Outcome orthogonality() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(1, {1}));
  const std::size_t dims[] = {2, 16, 512};
  std::size_t conflicts = 0, bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = dims[t % 3];
    const ParamVector gi = gaussian(rng, n), gc = gaussian(rng, n);
    const auto r = gradcore::combine_fcgrad({gi, gc, rng.normal(), rng.normal(), 0.5});
    if (!r.conflict) continue;
    ++conflicts;
    const ParamVector& other =
        r.branch == gradcore::Branch::ProjectIndOntoColNormal ? gc : gi;
    const double scale = gradcore::norm(r.direction) * gradcore::norm(other);
    const double ratio = scale > 0 ? std::abs(gradcore::dot(r.direction, other)) / scale : 0.0;
    worst = std::max(worst, ratio);
    if (ratio > 1e-9) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && conflicts > 0 && secs < 5.0,
          fmt("%zu conflict outputs, %zu violations, worst |<d,g>|/(|d||g|) = %.3g, %.2fs",
              conflicts, bad, worst, secs)};
}

// ---- 2, 3, 4 ----
struct SuiteRun {
  testbed::SuiteReport report;
  double secs = 0.0;
};

SuiteRun run_default_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteRun s{testbed::run_suite(testbed::SuiteConfig{}), 0.0};
  s.secs = seconds_since(t0);
  return s;
}

Outcome suite_check(const SuiteRun& s, const std::string& check, double budget) {
  std::size_t total = 0, failed = 0;
  double worst = -INFINITY;
  std::string first;
  for (const auto& r : s.report.records) {
    if (r.check != check || r.combiner != "FCGrad") continue;
    ++total;
    worst = std::max(worst, r.worst_margin);
    if (!r.passed && !r.skipped) {
      if (failed++ == 0)
        first = fmt("first failure instance %zu seed %llu: %s", r.instance,
                    (unsigned long long)r.seed, r.detail.c_str());
    }
  }
  return {total > 0 && failed == 0 && s.secs < budget,
          fmt("%zu/%zu traces pass, worst margin %.3g, %.2fs", total - failed, total,
              worst, s.secs) +
              (first.empty() ? "" : "; " + first)};
}

Outcome gap_convergence(const SuiteRun& s) {
  std::map<std::size_t, bool> inst;
  for (const auto& r : s.report.records)
    if (r.check == "gap_convergence" && r.combiner == "FCGrad")
      inst[r.instance] = inst.count(r.instance) ? inst[r.instance] && r.passed : r.passed;
  std::size_t ok = 0;
  for (const auto& [i, p] : inst) ok += p;
  const Outcome traces = suite_check(s, "gap_convergence", 10.0);
  const bool control = s.report.negative_control_failures >= 15;
  return {ok == inst.size() && !inst.empty() && control && s.secs < 10.0,
          fmt("FCGrad converges on %zu/%zu instances; Weighted fails on %zu/20 "
              "(control needs >= 15); ",
              ok, inst.size(), s.report.negative_control_failures) +
              traces.detail};
}

// ---- 5 ----
Outcome stepsize_lemma() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(5, {5}));
  std::size_t failed = 0, skipped = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(15);
    const double c = 0.1 + 2.0 * rng.uniform();
    const ParamVector center = gaussian(rng, n);
    testbed::ScalarObjective J;
    J.eval = [=](gradcore::ConstParams th) {
      double s = 0.0;
      for (std::size_t i = 0; i < th.size(); ++i) s += (th[i] - center[i]) * (th[i] - center[i]);
      return -c * s;
    };
    J.grad = [=](gradcore::ConstParams th) {
      ParamVector g(th.size());
      for (std::size_t i = 0; i < th.size(); ++i) g[i] = -2.0 * c * (th[i] - center[i]);
      return g;
    };
    J.smoothness_L = 2.0 * c;
    const ParamVector th = gaussian(rng, n);
    ParamVector g2 = gaussian(rng, n);
    if (gradcore::dot(g2, J.grad(th)) < 0)
      for (double& x : g2) x = -x;
    const auto v = testbed::verify_stepsize_lemma(J, th, g2, 1, rng.next_u64());
    if (v.status == testbed::Verdict::Status::Skipped) ++skipped;
    else if (!v.passed()) ++failed;
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && skipped == 0 && secs < 2.0,
          fmt("1000 trials, %zu failures, %zu skipped, %.2fs", failed, skipped, secs)};
}

// ---- 6 ----
double rel_error(const ParamVector& a, const ParamVector& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    scale = std::max({scale, a[i] * a[i], b[i] * b[i]});
  }
  return scale > 0 ? std::sqrt(diff) / std::sqrt(gradcore::norm_sq(a) + gradcore::norm_sq(b)) : 0.0;
}

Outcome gradient_correctness() {
  using namespace agent;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(Rng::derive(6, {s}));
    PolicyNetwork net(NetShape{4, 8, 3});
    net.init(rng, 1.0);
    TrajectoryBatch b;
    b.resize(4, 16);
    for (Eigen::Index j = 0; j < 16; ++j)
      for (Eigen::Index i = 0; i < 4; ++i) b.obs(i, j) = rng.normal();
    const Forward f = net.forward(b.obs);
    for (auto* v : {&b.adv_ind, &b.adv_col, &b.ret_ind, &b.ret_col}) v->resize(16);
    for (std::size_t k = 0; k < 16; ++k) {
      b.actions[k] = int(rng.below(3));
      b.logp[k] = f.logp(b.actions[k], Eigen::Index(k)) + 0.3 * rng.normal();
      b.adv_ind[k] = rng.normal();
      b.adv_col[k] = rng.normal();
      b.ret_ind[k] = rng.normal();
      b.ret_col[k] = rng.normal();
    }
    b.has_advantages = true;
    const SurrogateOptions opts{0.2, 0.01};
    const auto pg = ppo_policy_gradients(net, b, opts);
    const double h = 1e-6;
    for (Stream st : {Stream::Individual, Stream::Collective}) {
      PolicyNetwork p = net;
      ParamVector fd(p.policy_params.size());
      for (std::size_t i = 0; i < fd.size(); ++i) {
        const double x = p.policy_params[i];
        p.policy_params[i] = x + h;
        const double up = ppo_surrogate(p, b, st, opts);
        p.policy_params[i] = x - h;
        const double dn = ppo_surrogate(p, b, st, opts);
        p.policy_params[i] = x;
        fd[i] = (up - dn) / (2 * h);
      }
      worst = std::max(worst, rel_error(st == Stream::Individual ? pg.g_ind : pg.g_col, fd));
    }
    const ParamVector vg = value_gradient(net, b, 0.5);
    PolicyNetwork p = net;
    ParamVector fd(vg.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double x = p.value_params[i];
      p.value_params[i] = x + h;
      const double up = value_loss(p, b, 0.5);
      p.value_params[i] = x - h;
      const double dn = value_loss(p, b, 0.5);
      p.value_params[i] = x;
      fd[i] = (up - dn) / (2 * h);
    }
    worst = std::max(worst, rel_error(vg, fd));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 10.0,
          fmt("worst relative error %.3g over 10 networks, %.2fs", worst, secs)};
}

// ---- 7 ----
Outcome gae_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(7, {7}));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = rng.normal();
      v[i] = rng.normal();
      d[i] = rng.bernoulli(0.2);
    }
    const double boot = rng.normal(), gamma = 0.9 + 0.1 * rng.uniform(),
                 lambda = rng.uniform();
    const auto got = agent::compute_gae(r, v, boot, gamma, lambda, d);
    // Direct sum of discounted TD errors up to the first episode end.
    for (std::size_t i = 0; i < n; ++i) {
      double a = 0.0, w = 1.0;
      for (std::size_t k = i; k < n; ++k) {
        const double next = k + 1 < n ? v[k + 1] : boot;
        const double td = r[k] + (d[k] ? 0.0 : gamma * next) - v[k];
        a += w * td;
        if (d[k]) break;
        w *= gamma * lambda;
      }
      worst = std::max({worst, std::abs(got.advantages[i] - a),
                        std::abs(got.returns[i] - (a + v[i]))});
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 1.0,
          fmt("100 trajectories, worst deviation %.3g, %.3fs", worst, secs)};
}

// ---- 8 ----
Outcome metric_oracles() {
  using namespace metrics;
  using V = std::vector<double>;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> bad;
  auto expect = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want))) bad.push_back(what);
  };
  expect("alpha (4,1) a=2", alpha_fairness(V{4, 1}, 2.0), -1.25);
  expect("alpha (1,1,1,1) a=0", alpha_fairness(V{1, 1, 1, 1}, 0.0), 4.0);
  expect("alpha (1,1,1,1) a=1", alpha_fairness(V{1, 1, 1, 1}, 1.0), 0.0);
  expect("gini (0,1)", gini(V{0, 1}), 0.5);
  expect("jain (0,1)", jain(V{0, 1}), 0.5);
  expect("mean (1,2,3,4)", report(V{1, 2, 3, 4}).mean, 2.5);
  expect("gini (1,2,3,4)", gini(V{1, 2, 3, 4}), 0.25);
  expect("jain (1,2,3,4)", jain(V{1, 2, 3, 4}), 100.0 / 120.0);
  expect("gini single", gini(V{3}), 0.0);
  expect("gini (1,0,0,0)", gini(V{1, 0, 0, 0}), 0.75);
  expect("gini equal", gini(V{2, 2}), 0.0);
  expect("jain (1,1,1,1)", jain(V{1, 1, 1, 1}), 1.0);
  expect("jain (1,0,0,0)", jain(V{1, 0, 0, 0}), 0.25);
  expect("jain single", jain(V{3}), 1.0);

  Rng rng(Rng::derive(8, {8}));
  std::size_t invariance = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(10);
    V r(n);
    for (double& x : r) x = 5.0 * rng.uniform();
    V s = r, p = r;
    const double c = 0.01 + 50.0 * rng.uniform();
    for (double& x : s) x *= c;
    rng.shuffle(std::span<double>(p));
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(gini(s), gini(r)) || !close(jain(s), jain(r)) || !close(gini(p), gini(r)) ||
        !close(jain(p), jain(r)))
      ++invariance;
  }
  const double secs = seconds_since(t0);
  std::string detail = fmt("14 examples, %zu failing; invariance violations %zu/1000; %.3fs",
                           bad.size(), invariance, secs);
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty() && invariance == 0 && secs < 1.0, detail};
}

// ---- 9 ----
Outcome combiner_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(9, {9}));
  std::size_t endpoint = 0, symmetry = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(64);
    const ParamVector a = gaussian(rng, n), b = gaussian(rng, n);
    if (gradcore::combine_weighted(a, b, 0.0).direction != a) ++endpoint;
    if (gradcore::combine_weighted(a, b, 1.0).direction != b) ++endpoint;
    if (gradcore::combine_pcgrad(a, b).direction != gradcore::combine_pcgrad(b, a).direction)
      ++symmetry;
  }
  const double secs = seconds_since(t0);
  return {endpoint == 0 && symmetry == 0 && secs < 1.0,
          fmt("endpoint mismatches %zu, PCGrad asymmetries %zu over 1000 pairs, %.3fs",
              endpoint, symmetry, secs)};
}

// ---- 10, 11, 12 ----
harness::ExperimentConfig desk(const char* env, const char* method, double beta = -1) {
  harness::ExperimentConfig c;
  c.set("env", env);
  c.set("method", method);
  if (beta >= 0) c.set("beta", fmt("%.17g", beta));
  c.resolve();
  c.validate();
  return c;
}

std::vector<harness::ResultRow> final_of(const harness::ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = harness::final_rows(harness::train_all(c));
  std::string line;
  for (const auto& r : rows)
    line += fmt(" [seed %llu mean %.3f geo %.3f min %.3f gini %.3f]",
                (unsigned long long)r.seed, r.mean, r.geomean, r.min, r.gini);
  std::printf("  %s/%s beta %.2f (%.0fs):%s\n", std::string(envs::env_name(c.env)).c_str(),
              std::string(agent::method_name(c.method)).c_str(), c.beta, seconds_since(t0),
              line.c_str());
  std::fflush(stdout);
  return rows;
}

double seed_mean(const std::vector<harness::ResultRow>& rows,
                 double harness::ResultRow::*field) {
  double s = 0.0;
  for (const auto& r : rows) s += r.*field;
  return rows.empty() ? 0.0 : s / double(rows.size());
}

Outcome coins_fairness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto col = final_of(desk("coins", "col"));
  const auto fc = final_of(desk("coins", "fcgrad"));
  const double gini_col = seed_mean(col, &harness::ResultRow::gini);
  const double gini_fc = seed_mean(fc, &harness::ResultRow::gini);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < std::min(col.size(), fc.size()); ++i) wins += fc[i].min > col[i].min;
  const double secs = seconds_since(t0);
  return {gini_fc < gini_col && wins >= 3 && secs <= 15 * 60,
          fmt("seed-mean Gini FCGrad %.4f vs Col %.4f; FCGrad Min > Col Min in %zu/4 "
              "pairings; %.0fs",
              gini_fc, gini_col, wins, secs)};
}

Outcome cleanup_dilemma() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ind = final_of(desk("cleanup", "ind"));
  const auto col = final_of(desk("cleanup", "col"));
  const auto fc = final_of(desk("cleanup", "fcgrad"));
  const double mean_ind = seed_mean(ind, &harness::ResultRow::mean);
  const double mean_col = seed_mean(col, &harness::ResultRow::mean);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < std::min(col.size(), fc.size()); ++i) wins += fc[i].min >= col[i].min;
  const double secs = seconds_since(t0);
  return {mean_ind < 0.25 * mean_col && wins >= 3 && secs <= 40 * 60,
          fmt("seed-mean Mean Ind %.3f vs Col %.3f (needs < %.3f); FCGrad Min >= Col Min "
              "in %zu/4 seeds; %.0fs",
              mean_ind, mean_col, 0.25 * mean_col, wins, secs)};
}

Outcome harvest_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<double, double>> geo;
  for (double b : {0.0, 0.25, 0.5, 0.75, 1.0})
    geo.push_back({b, seed_mean(final_of(desk("harvest", "fcgrad", b)),
                                &harness::ResultRow::geomean)});
  bool interior = false;
  std::string detail;
  for (const auto& [b, g] : geo) {
    detail += fmt("beta %.2f geomean %.4f; ", b, g);
    if (b > 0.0 && b < 1.0 && g > geo[0].second) interior = true;
  }
  const double secs = seconds_since(t0);
  return {interior && secs <= 60 * 60, detail + fmt("%.0fs", secs)};
}

// ---- 13 ----
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "fcgrad_acceptance_det";
  fs::remove_all(root);
  harness::ExperimentConfig c;
  for (const char* kv : {"env=cleanup", "method=fcgrad", "seeds=0,1", "num_envs=2",
                         "rollout_length=25", "total_updates=3", "eval_every=1",
                         "eval_episodes=2", "env.episode_length=25", "verify.instances=4"})
    harness::apply_override(c, kv);
  c.resolve();
  c.validate();
  std::vector<std::string> differing;
  auto compare = [&](const std::string& rel) {
    const std::string a = slurp(root / "a" / rel), b = slurp(root / "b" / rel);
    if (a.empty() || a != b) differing.push_back(rel);
  };
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    harness::cmd_train(c, d.string());
    harness::cmd_verify(c, (d / "verify").string());
    const fs::path ck = d / "checkpoints" / (c.effective_run_id() + "-seed1.ckpt");
    harness::cmd_eval(c, ck.string(), 2, 5, (d / "eval").string());
    harness::cmd_sweep_beta(c, {0.0, 1.0}, (d / "sweep").string());
  }
  for (const char* rel : {"results.csv", "verify/verify.csv", "eval/eval.csv", "eval/events.csv",
                          "sweep/sweep.csv"})
    compare(rel);
  fs::remove_all(root);
  const double secs = seconds_since(t0);
  std::string detail = fmt("train, verify, eval and sweep-beta outputs compared; %.1fs", secs);
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion (1-13)");
  CLI11_PARSE(app, argc, argv);
  log::set_level(log::Level::Quiet);

  std::optional<SuiteRun> suite;
  auto suite_run = [&]() -> const SuiteRun& {
    if (!suite) suite = run_default_suite();
    return *suite;
  };

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"FCGrad conflict output is orthogonal to the other gradient", orthogonality},
      {"monotone improvement of both objectives on quadratic pairs",
       [&] { return suite_check(suite_run(), "monotone", 10.0); }},
      {"value gap converges; Weighted negative control fails",
       [&] { return gap_convergence(suite_run()); }},
      {"conflict-step decrease of the squared gap",
       [&] { return suite_check(suite_run(), "lyapunov_decrease", 10.0); }},
      {"step-size improvement bound", stepsize_lemma},
      {"PPO surrogate and value gradients match finite differences", gradient_correctness},
      {"GAE matches direct evaluation", gae_oracle},
      {"fairness metric oracles and invariances", metric_oracles},
      {"combiner endpoint identities and PCGrad symmetry", combiner_identities},
      {"Coins: FCGrad fairer than Col", coins_fairness},
      {"Cleanup: individual learners fail, FCGrad protects the minimum", cleanup_dilemma},
      {"Harvest: interior beta beats beta = 0 on GeoMean", harvest_sweep},
      {"byte-identical outputs on repeated commands", determinism},
  };

  if (only < 0 || only > int(criteria.size())) {
    std::fprintf(stderr, "--only must be in 1..%zu\n", criteria.size());
    return 2;
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && int(i + 1) != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %zu: %s - %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
