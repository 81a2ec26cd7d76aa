#include "fcgrad/fcgrad.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "fcgrad/common/error.hpp"
#include "fcgrad/common/log.hpp"
#include "fcgrad/envs/env.hpp"
#include "fcgrad/gradcore/gradcore.hpp"
#include "fcgrad/harness/commands.hpp"
#include "fcgrad/harness/config.hpp"
#include "fcgrad/metrics/metrics.hpp"

struct fcg_config {
  fcg::harness::ExperimentConfig cfg;
};

struct fcg_env {
  std::unique_ptr<fcg::envs::Environment> env;
  bool started = false;
};

namespace {

thread_local std::string g_last_error;

fcg_status status_of(fcg::ErrorCode c) {
  switch (c) {
    case fcg::ErrorCode::CheckFailed: return FCG_CHECK_FAILED;
    case fcg::ErrorCode::Config: return FCG_ERR_CONFIG;
    case fcg::ErrorCode::Io: return FCG_ERR_IO;
    case fcg::ErrorCode::ContractViolation: return FCG_ERR_CONTRACT;
    case fcg::ErrorCode::DegenerateVector: return FCG_ERR_DEGENERATE;
    case fcg::ErrorCode::Domain: return FCG_ERR_DOMAIN;
  }
  return FCG_ERR_INTERNAL;
}

template <class F>
fcg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const fcg::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return FCG_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FCG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FCG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return FCG_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  fcg::require(p != nullptr, std::string(what) + " must not be null");
}

fcg_status copy_out(const std::string& s, char* buf, size_t cap,
                    size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return FCG_OK;
}

fcg::gradcore::ConstParams span_of(const double* p, size_t n) {
  return {p, n};
}

void fill_info(const fcg::gradcore::CombineResult& r, double* out,
               fcg_combine_info* info) {
  std::copy(r.direction.begin(), r.direction.end(), out);
  if (!info) return;
  info->conflict = r.conflict ? 1 : 0;
  info->branch = static_cast<int>(r.branch);
  info->inner_product = r.inner_product;
  info->projection_coefficient = r.projection_coefficient;
}

void fill_fairness(const fcg::metrics::FairnessReport& r, fcg_fairness* out) {
  out->mean = r.mean;
  out->geomean = r.geomean;
  out->sum_log = r.sum_log;
  out->min = r.min;
  out->gini = r.gini;
  out->jain = r.jain;
  out->has_negative = r.has_negative ? 1 : 0;
}

fcg::harness::ExperimentConfig resolved(const fcg_config* cfg) {
  need(cfg, "config");
  fcg::harness::ExperimentConfig c = cfg->cfg;
  c.resolve();
  c.validate();
  return c;
}

}  // namespace

extern "C" {

const char* fcg_last_error(void) { return g_last_error.c_str(); }

const char* fcg_version(void) { return "0.1.0"; }

void fcg_set_log_level(int level) {
  fcg::log::set_level(level <= 0   ? fcg::log::Level::Quiet
                      : level == 1 ? fcg::log::Level::Info
                                   : fcg::log::Level::Debug);
}

fcg_status fcg_config_create(fcg_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new fcg_config();
    return FCG_OK;
  });
}

void fcg_config_destroy(fcg_config* cfg) { delete cfg; }

fcg_status fcg_config_load_file(fcg_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    fcg::harness::load_config_file(cfg->cfg, path);
    return FCG_OK;
  });
}

fcg_status fcg_config_set(fcg_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
    return FCG_OK;
  });
}

fcg_status fcg_config_override(fcg_config* cfg, const char* kv) {
  return guarded([&] {
    need(cfg, "config");
    need(kv, "override");
    fcg::harness::apply_override(cfg->cfg, kv);
    return FCG_OK;
  });
}

fcg_status fcg_config_get(const fcg_config* cfg, const char* key, char* buf,
                          size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    return copy_out(cfg->cfg.get(key), buf, cap, needed);
  });
}

fcg_status fcg_config_resolve(fcg_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->cfg.resolve();
    cfg->cfg.validate();
    return FCG_OK;
  });
}

fcg_status fcg_config_dump(const fcg_config* cfg, char* buf, size_t cap,
                           size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    return copy_out(cfg->cfg.dump(), buf, cap, needed);
  });
}

int fcg_detect_conflict(const double* g_ind, const double* g_col, size_t n) {
  if (!g_ind || !g_col) return 0;
  return fcg::gradcore::detect_conflict(span_of(g_ind, n), span_of(g_col, n)) ? 1 : 0;
}

fcg_status fcg_project_onto_normal_plane(const double* g, const double* onto,
                                         size_t n, double* out) {
  return guarded([&] {
    need(g, "g");
    need(onto, "onto");
    need(out, "out");
    const auto r = fcg::gradcore::project_onto_normal_plane(span_of(g, n),
                                                            span_of(onto, n));
    std::copy(r.begin(), r.end(), out);
    return FCG_OK;
  });
}

fcg_status fcg_combine_fcgrad(const double* g_ind, const double* g_col,
                              size_t n, double v_ind, double v_col, double beta,
                              double* out, fcg_combine_info* info) {
  return guarded([&] {
    need(g_ind, "g_ind");
    need(g_col, "g_col");
    need(out, "out");
    fcg::gradcore::CombineInput in{span_of(g_ind, n), span_of(g_col, n), v_ind,
                                   v_col, beta};
    fill_info(fcg::gradcore::combine_fcgrad(in), out, info);
    return FCG_OK;
  });
}

fcg_status fcg_combine_weighted(const double* g_ind, const double* g_col,
                                size_t n, double beta, double* out,
                                fcg_combine_info* info) {
  return guarded([&] {
    need(g_ind, "g_ind");
    need(g_col, "g_col");
    need(out, "out");
    fill_info(fcg::gradcore::combine_weighted(span_of(g_ind, n),
                                              span_of(g_col, n), beta),
              out, info);
    return FCG_OK;
  });
}

fcg_status fcg_combine_pcgrad(const double* g_ind, const double* g_col,
                              size_t n, double* out, fcg_combine_info* info) {
  return guarded([&] {
    need(g_ind, "g_ind");
    need(g_col, "g_col");
    need(out, "out");
    fill_info(fcg::gradcore::combine_pcgrad(span_of(g_ind, n), span_of(g_col, n)),
              out, info);
    return FCG_OK;
  });
}

fcg_status fcg_combine_aga(const double* g_ind, const double* g_col, size_t n,
                           fcg_hvp_fn hvp, void* user, double lambda_mag,
                           double* out, fcg_combine_info* info) {
  return guarded([&] {
    need(g_ind, "g_ind");
    need(g_col, "g_col");
    need(out, "out");
    need(reinterpret_cast<const void*>(hvp), "hvp");
    fcg::gradcore::HvpOperator op = [&](fcg::gradcore::ConstParams v) {
      fcg::gradcore::ParamVector r(n, 0.0);
      fcg::require(hvp(v.data(), r.data(), n, user) == 0,
                   "Hessian-vector callback reported failure");
      return r;
    };
    fill_info(fcg::gradcore::combine_aga(span_of(g_ind, n), span_of(g_col, n),
                                         op, lambda_mag),
              out, info);
    return FCG_OK;
  });
}

fcg_status fcg_fairness_report(const double* returns, size_t n,
                               int shift_negative, fcg_fairness* out) {
  return guarded([&] {
    need(returns, "returns");
    need(out, "out");
    fcg::metrics::ReportOptions opts;
    opts.shift_negative = shift_negative != 0;
    fill_fairness(fcg::metrics::report({returns, n}, opts), out);
    return FCG_OK;
  });
}

fcg_status fcg_alpha_fairness(const double* returns, size_t n, double alpha,
                              double* out) {
  return guarded([&] {
    need(returns, "returns");
    need(out, "out");
    *out = fcg::metrics::alpha_fairness({returns, n}, alpha);
    return FCG_OK;
  });
}

fcg_status fcg_env_create(const fcg_config* cfg, fcg_env** out) {
  return guarded([&] {
    need(out, "out");
    const auto c = resolved(cfg);
    auto h = std::make_unique<fcg_env>();
    h->env = fcg::envs::make_env(c.env, c.env_cfg);
    *out = h.release();
    return FCG_OK;
  });
}

void fcg_env_destroy(fcg_env* env) { delete env; }

fcg_status fcg_env_shape(const fcg_env* env, size_t* num_agents,
                         size_t* obs_dim, size_t* num_actions) {
  return guarded([&] {
    need(env, "env");
    if (num_agents) *num_agents = env->env->num_agents();
    if (obs_dim) *obs_dim = env->env->obs_dim();
    if (num_actions) *num_actions = size_t(env->env->num_actions());
    return FCG_OK;
  });
}

fcg_status fcg_env_reset(fcg_env* env, uint64_t seed, double* obs) {
  return guarded([&] {
    need(env, "env");
    const auto& o = env->env->reset(seed);
    env->started = true;
    if (obs) std::copy(o.begin(), o.end(), obs);
    return FCG_OK;
  });
}

fcg_status fcg_env_step(fcg_env* env, const int* actions, double* obs,
                        double* rewards, int* done) {
  return guarded([&] {
    need(env, "env");
    need(actions, "actions");
    fcg::require(env->started, "reset must be called before step");
    const auto& out = env->env->step({actions, env->env->num_agents()});
    if (obs) std::copy(out.observations.begin(), out.observations.end(), obs);
    if (rewards) std::copy(out.rewards.begin(), out.rewards.end(), rewards);
    if (done) *done = out.done ? 1 : 0;
    return FCG_OK;
  });
}

fcg_status fcg_env_render(const fcg_env* env, char* buf, size_t cap,
                          size_t* needed) {
  return guarded([&] {
    need(env, "env");
    return copy_out(env->env->render(), buf, cap, needed);
  });
}

fcg_status fcg_verify(const fcg_config* cfg, const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    const auto rep = fcg::harness::cmd_verify(resolved(cfg), out_dir);
    if (rep.ok()) return FCG_OK;
    g_last_error = "verification checks failed; see verify.csv";
    return FCG_CHECK_FAILED;
  });
}

fcg_status fcg_train(const fcg_config* cfg, const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    fcg::harness::cmd_train(resolved(cfg), out_dir);
    return FCG_OK;
  });
}

fcg_status fcg_eval(const fcg_config* cfg, const char* checkpoint,
                    size_t episodes, uint64_t seed, const char* out_dir,
                    fcg_fairness* out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out_dir, "out_dir");
    const auto r =
        fcg::harness::cmd_eval(resolved(cfg), checkpoint, episodes, seed, out_dir);
    if (out) fill_fairness(r.result.report, out);
    return FCG_OK;
  });
}

fcg_status fcg_sweep_beta(const fcg_config* cfg, const double* betas, size_t n,
                          const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    fcg::require(betas != nullptr || n == 0, "betas must not be null");
    fcg::harness::cmd_sweep_beta(resolved(cfg),
                                 std::vector<double>(betas, betas + n), out_dir);
    return FCG_OK;
  });
}

fcg_status fcg_plot(const char* const* csv_paths, size_t n, const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    fcg::require(csv_paths != nullptr || n == 0, "csv_paths must not be null");
    std::vector<std::string> paths;
    for (size_t i = 0; i < n; ++i) {
      need(csv_paths[i], "csv path");
      paths.emplace_back(csv_paths[i]);
    }
    fcg::harness::cmd_plot(paths, out_dir);
    return FCG_OK;
  });
}

}  // extern "C"
