#include "fcgrad/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "fcgrad/common/csv.hpp"
#include "fcgrad/common/error.hpp"

namespace fcg::harness {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad(std::string_view key, std::string_view value,
                      const char* what) {
  throw Error(ErrorCode::Config, "config key '" + std::string(key) +
                                     "': '" + std::string(value) + "' is not " +
                                     what);
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  double x = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() ||
      !std::isfinite(x))
    bad(key, v, "a finite number");
  return x;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  std::uint64_t x = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    bad(key, v, "a nonnegative integer");
  return x;
}

bool to_bool(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, v, "a boolean");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t end = v.find(',', pos);
    if (end == std::string_view::npos) end = v.size();
    const std::string item = trim(v.substr(pos, end - pos));
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

template <class T, class F>
std::vector<T> to_list(std::string_view key, std::string_view v, F conv) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(conv(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>)
      out += csv::format(double(xs[i]));
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

std::string fmt(double x) { return csv::format(x); }
std::string fmt(bool b) { return b ? "true" : "false"; }

struct Entry {
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FCG_DOUBLE(name, field)                                              \
  Entry{name,                                                               \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) {   \
          c.field = to_double(k, v);                                        \
        },                                                                  \
        [](const ExperimentConfig& c) { return fmt(c.field); }}
#define FCG_SIZE(name, field)                                                \
  Entry{name,                                                               \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) {   \
          c.field = static_cast<decltype(c.field)>(to_u64(k, v));           \
        },                                                                  \
        [](const ExperimentConfig& c) {                                     \
          return std::to_string(c.field);                                   \
        }}
#define FCG_INT(name, field)                                                 \
  Entry{name,                                                               \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) {   \
          c.field = static_cast<int>(to_u64(k, v));                         \
        },                                                                  \
        [](const ExperimentConfig& c) {                                     \
          return std::to_string(c.field);                                   \
        }}
#define FCG_BOOL(name, field)                                                \
  Entry{name,                                                               \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) {   \
          c.field = to_bool(k, v);                                          \
        },                                                                  \
        [](const ExperimentConfig& c) { return fmt(c.field); }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"env",
            [](ExperimentConfig& c, std::string_view, std::string_view v) {
              c.env = envs::parse_env_kind(trim(v));
            },
            [](const ExperimentConfig& c) {
              return std::string(envs::env_name(c.env));
            }},
      Entry{"method",
            [](ExperimentConfig& c, std::string_view, std::string_view v) {
              c.method = agent::parse_method(trim(v));
            },
            [](const ExperimentConfig& c) {
              return std::string(agent::method_name(c.method));
            }},
      FCG_DOUBLE("beta", beta),
      Entry{"seeds",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              c.seeds = to_list<std::uint64_t>(k, v, to_u64);
            },
            [](const ExperimentConfig& c) { return join(c.seeds); }},
      FCG_SIZE("num_envs", num_envs),
      FCG_SIZE("rollout_length", rollout_length),
      FCG_SIZE("total_updates", total_updates),
      FCG_SIZE("ppo_epochs", ppo_epochs),
      FCG_SIZE("minibatches", minibatches),
      FCG_SIZE("hidden", hidden),
      FCG_DOUBLE("gamma", gamma),
      FCG_DOUBLE("gae_lambda", gae_lambda),
      FCG_DOUBLE("clip", clip),
      FCG_DOUBLE("learning_rate", learning_rate),
      FCG_BOOL("anneal_lr", anneal_lr),
      FCG_DOUBLE("entropy_coef", entropy_coef),
      FCG_DOUBLE("value_coef", value_coef),
      FCG_DOUBLE("grad_clip", grad_clip),
      FCG_DOUBLE("aga_lambda", aga_lambda),
      FCG_DOUBLE("hvp_eps", hvp_eps),
      FCG_DOUBLE("ia_alpha", ia_alpha),
      FCG_DOUBLE("ia_beta", ia_beta),
      FCG_BOOL("critic_values", critic_values),
      FCG_SIZE("eval_every", eval_every),
      FCG_SIZE("eval_episodes", eval_episodes),
      FCG_BOOL("greedy_eval", greedy_eval),
      FCG_BOOL("shift_negative", shift_negative),
      FCG_SIZE("threads", threads),
      FCG_BOOL("save_checkpoints", save_checkpoints),
      Entry{"run_id",
            [](ExperimentConfig& c, std::string_view, std::string_view v) {
              c.run_id = trim(v);
            },
            [](const ExperimentConfig& c) { return c.run_id; }},
      FCG_INT("env.episode_length", env_cfg.episode_length),
      FCG_INT("env.view_radius", env_cfg.view_radius),
      FCG_DOUBLE("env.p_green", env_cfg.p_green),
      FCG_DOUBLE("env.coin_penalty", env_cfg.coin_penalty),
      FCG_DOUBLE("env.p_waste", env_cfg.p_waste),
      FCG_DOUBLE("env.waste_threshold", env_cfg.waste_threshold),
      FCG_DOUBLE("env.p_apple", env_cfg.p_apple),
      Entry{"env.regrow",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              auto xs = to_list<double>(k, v, to_double);
              if (xs.size() != 4) bad(k, v, "a list of 4 probabilities");
              std::copy(xs.begin(), xs.end(), c.env_cfg.regrow.begin());
            },
            [](const ExperimentConfig& c) {
              return join(std::vector<double>(c.env_cfg.regrow.begin(),
                                              c.env_cfg.regrow.end()));
            }},
      FCG_INT("env.regrow_radius", env_cfg.regrow_radius),
      Entry{"env.layout_file",
            [](ExperimentConfig& c, std::string_view, std::string_view v) {
              c.layout_file = trim(v);
            },
            [](const ExperimentConfig& c) { return c.layout_file; }},
      FCG_SIZE("verify.instances", suite.instances),
      Entry{"verify.seeds",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              c.suite.seeds = to_list<std::uint64_t>(k, v, to_u64);
            },
            [](const ExperimentConfig& c) { return join(c.suite.seeds); }},
      Entry{"verify.dims",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              auto xs = to_list<std::uint64_t>(k, v, to_u64);
              c.suite.dims.assign(xs.begin(), xs.end());
            },
            [](const ExperimentConfig& c) { return join(c.suite.dims); }},
      FCG_SIZE("verify.steps", suite.steps),
      FCG_DOUBLE("verify.curvature", suite.curvature),
      FCG_DOUBLE("verify.center_box", suite.center_box),
      FCG_DOUBLE("verify.start_box", suite.start_box),
      FCG_DOUBLE("verify.beta", suite.beta),
      FCG_DOUBLE("verify.step_scale", suite.step_scale),
      FCG_DOUBLE("verify.gap_epsilon", suite.gap_epsilon),
      FCG_DOUBLE("verify.tail_fraction", suite.tail_fraction),
      FCG_DOUBLE("verify.monotone_tol", suite.monotone_tol),
      FCG_DOUBLE("verify.lyapunov_tol", suite.lyapunov_tol),
      FCG_SIZE("verify.lemma_trials", suite.lemma_trials),
      FCG_SIZE("verify.consistency_points", suite.consistency_points),
      FCG_DOUBLE("verify.negative_control_fraction",
                 suite.negative_control_fraction),
      FCG_SIZE("verify.master_seed", suite.master_seed),
  };
  return table;
}

#undef FCG_DOUBLE
#undef FCG_SIZE
#undef FCG_INT
#undef FCG_BOOL

const Entry& find(std::string_view key) {
  for (const auto& e : entries())
    if (key == e.key) return e;
  throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
}

struct EnvDefaults {
  double beta, learning_rate, entropy_coef, value_coef;
  std::size_t total_updates;
};

EnvDefaults defaults_for(envs::EnvKind k) {
  switch (k) {
    case envs::EnvKind::Coins: return {0.5, 1e-4, 0.1, 0.1, 300};
    case envs::EnvKind::Cleanup: return {0.7, 5e-4, 0.01, 0.5, 500};
    case envs::EnvKind::Harvest: return {0.8, 5e-4, 0.01, 0.5, 500};
  }
  return {0.5, 1e-4, 0.1, 0.1, 300};
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.emplace_back(e.key);
  return out;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const std::string k = trim(key);
  find(k).set(*this, k, value);
  explicit_keys.insert(k);
}

std::string ExperimentConfig::get(std::string_view key) const {
  return find(trim(key)).get(*this);
}

void ExperimentConfig::resolve() {
  const EnvDefaults d = defaults_for(env);
  auto fill = [&](const char* key, auto& field, auto value) {
    if (!explicit_keys.count(key)) field = value;
  };
  fill("beta", beta, d.beta);
  fill("learning_rate", learning_rate, d.learning_rate);
  fill("entropy_coef", entropy_coef, d.entropy_coef);
  fill("value_coef", value_coef, d.value_coef);
  fill("total_updates", total_updates, d.total_updates);
  if (!layout_file.empty()) {
    std::ifstream in(layout_file, std::ios::binary);
    require(in.is_open(), "cannot open layout file " + layout_file,
            ErrorCode::Io);
    std::ostringstream ss;
    ss << in.rdbuf();
    env_cfg.layout = ss.str();
  } else {
    env_cfg.layout.clear();
  }
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, what, ErrorCode::Config);
  };
  auto unit = [&](double x, const char* name) {
    check(x >= 0.0 && x <= 1.0, std::string(name) + " must lie in [0,1]");
  };
  unit(beta, "beta");
  check(!seeds.empty(), "seeds must be nonempty");
  check(num_envs >= 1, "num_envs must be >= 1");
  check(rollout_length >= 1, "rollout_length must be >= 1");
  check(ppo_epochs >= 1, "ppo_epochs must be >= 1");
  check(minibatches >= 1 && minibatches <= num_envs * rollout_length,
        "minibatches must lie in [1, num_envs * rollout_length]");
  check(hidden >= 1, "hidden must be >= 1");
  unit(gamma, "gamma");
  unit(gae_lambda, "gae_lambda");
  check(clip > 0.0, "clip must be > 0");
  check(learning_rate > 0.0, "learning_rate must be > 0");
  check(entropy_coef >= 0.0, "entropy_coef must be >= 0");
  check(value_coef >= 0.0, "value_coef must be >= 0");
  check(grad_clip >= 0.0, "grad_clip must be >= 0 (0 disables)");
  check(aga_lambda > 0.0, "aga_lambda must be > 0");
  check(hvp_eps > 0.0, "hvp_eps must be > 0");
  check(ia_alpha >= 0.0 && ia_beta >= 0.0, "ia coefficients must be >= 0");
  check(eval_every >= 1, "eval_every must be >= 1");
  check(eval_episodes >= 1, "eval_episodes must be >= 1");
  // Environment parameters are checked by constructing one.
  (void)envs::make_env(env, env_cfg);
}

std::string ExperimentConfig::dump() const {
  std::string out = "# resolved configuration\n";
  for (const auto& e : entries()) {
    out += e.key;
    out += " = ";
    out += e.get(*this);
    out += '\n';
  }
  return out;
}

std::string ExperimentConfig::effective_run_id() const {
  if (!run_id.empty()) return run_id;
  return std::string(envs::env_name(env)) + "-" +
         std::string(agent::method_name(method)) + "-b" + csv::format(beta);
}

agent::UpdateConfig ExperimentConfig::update_config() const {
  agent::UpdateConfig u;
  u.clip = clip;
  u.entropy_coef = entropy_coef;
  u.value_coef = value_coef;
  u.grad_clip = grad_clip;
  u.beta = beta;
  u.aga_lambda = aga_lambda;
  u.hvp_eps = hvp_eps;
  u.epochs = ppo_epochs;
  u.minibatches = minibatches;
  u.critic_values = critic_values;
  return u;
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text,
                       const std::string& source) {
  std::size_t pos = 0, lineno = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos,
            source + ":" + std::to_string(lineno) + ": expected key = value",
            ErrorCode::Config);
    try {
      cfg.set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), "cannot open config file " + path, ErrorCode::Io);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str(), path);
}

void apply_override(ExperimentConfig& cfg, std::string_view kv) {
  const auto eq = kv.find('=');
  require(eq != std::string_view::npos,
          "override '" + std::string(kv) + "' is not KEY=VALUE",
          ErrorCode::Config);
  cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
}

}  // namespace fcg::harness
