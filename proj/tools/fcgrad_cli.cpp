// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fcgrad/fcgrad.h"

namespace {

struct Common {
  std::string config;
  std::string env;
  std::string method;
  std::string beta;
  std::string seeds;
  std::string out = "out";
  std::vector<std::string> overrides;
  bool quiet = false;
  bool verbose = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Plain-text config file (key = value)");
  sub->add_option("--env", c.env, "coins | cleanup | harvest");
  sub->add_option("--method", c.method,
                  "col | ind | ia | weighted | pcgrad | aga | fcgrad");
  sub->add_option("--beta", c.beta, "Collective weight in [0, 1]");
  sub->add_option("--seeds", c.seeds, "Comma-separated seed list");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--override", c.overrides, "KEY=VALUE, repeatable");
  sub->add_flag("-q,--quiet", c.quiet, "No progress output");
  sub->add_flag("-v,--verbose", c.verbose, "Debug output");
}

int exit_code(fcg_status s) {
  switch (s) {
    case FCG_OK: return 0;
    case FCG_CHECK_FAILED: return 1;
    case FCG_ERR_IO: return 3;
    case FCG_ERR_INTERNAL: return 4;
    default: return 2;
  }
}

int fail(fcg_status s) {
  std::fprintf(stderr, "fcgrad: %s\n", fcg_last_error());
  return exit_code(s);
}

class Config {
 public:
  Config() { fcg_config_create(&cfg_); }
  ~Config() { fcg_config_destroy(cfg_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  fcg_config* get() const { return cfg_; }

 private:
  fcg_config* cfg_ = nullptr;
};

// File first, then the dedicated flags, then --override in order.
fcg_status build_config(const Common& c, fcg_config* cfg) {
  fcg_set_log_level(c.quiet ? 0 : c.verbose ? 2 : 1);
  fcg_status s = FCG_OK;
  if (!c.config.empty() && (s = fcg_config_load_file(cfg, c.config.c_str())) != FCG_OK)
    return s;
  const std::pair<const char*, const std::string*> flags[] = {
      {"env", &c.env}, {"method", &c.method}, {"beta", &c.beta}, {"seeds", &c.seeds}};
  for (const auto& [key, value] : flags)
    if (!value->empty() && (s = fcg_config_set(cfg, key, value->c_str())) != FCG_OK)
      return s;
  for (const auto& kv : c.overrides)
    if ((s = fcg_config_override(cfg, kv.c_str())) != FCG_OK) return s;
  return FCG_OK;
}

std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware gradient combination for multi-agent PPO"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fcg_version()));

  Common common;

  auto* verify = app.add_subcommand("verify", "Run the analytic verification suite");
  add_common(verify, common);

  auto* train = app.add_subcommand("train", "Train agents and write results.csv");
  add_common(train, common);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval, common);
  std::string checkpoint;
  std::size_t episodes = 32;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Evaluation seed")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep-beta", "Train once per beta value");
  add_common(sweep, common);
  std::string betas = "0,0.25,0.5,0.75,1";
  sweep->add_option("--betas", betas, "Comma-separated beta values")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "Render results CSVs as SVG curves");
  std::vector<std::string> csvs;
  std::string plot_out = "plots";
  plot->add_option("csv", csvs, "Results CSV files")->required();
  plot->add_option("--out", plot_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (plot->parsed()) {
    std::vector<const char*> paths;
    for (const auto& p : csvs) paths.push_back(p.c_str());
    const fcg_status s = fcg_plot(paths.data(), paths.size(), plot_out.c_str());
    if (s != FCG_OK) return fail(s);
    std::printf("plots written to %s\n", plot_out.c_str());
    return 0;
  }

  Config cfg;
  if (!cfg.get()) {
    std::fprintf(stderr, "fcgrad: cannot allocate configuration\n");
    return 4;
  }
  if (fcg_status s = build_config(common, cfg.get()); s != FCG_OK) return fail(s);
  const char* out = common.out.c_str();

  fcg_status s = FCG_OK;
  if (verify->parsed()) {
    s = fcg_verify(cfg.get(), out);
    if (s == FCG_OK || s == FCG_CHECK_FAILED)
      std::printf("verification %s; report in %s/verify.csv\n",
                  s == FCG_OK ? "passed" : "FAILED", out);
    if (s == FCG_CHECK_FAILED) return 1;
  } else if (train->parsed()) {
    s = fcg_train(cfg.get(), out);
    if (s == FCG_OK) std::printf("results written to %s/results.csv\n", out);
  } else if (eval->parsed()) {
    fcg_fairness f{};
    s = fcg_eval(cfg.get(), checkpoint.c_str(), episodes, eval_seed, out, &f);
    if (s == FCG_OK)
      std::printf("mean %.6g geomean %.6g min %.6g gini %.6g jain %.6g%s\n",
                  f.mean, f.geomean, f.min, f.gini, f.jain,
                  f.has_negative ? " (negative returns present)" : "");
  } else if (sweep->parsed()) {
    std::vector<double> values;
    try {
      values = parse_betas(betas);
    } catch (const std::exception&) {
      std::fprintf(stderr, "fcgrad: malformed --betas '%s'\n", betas.c_str());
      return 2;
    }
    s = fcg_sweep_beta(cfg.get(), values.data(), values.size(), out);
    if (s == FCG_OK) std::printf("sweep table written to %s/sweep.csv\n", out);
  }
  return s == FCG_OK ? 0 : fail(s);
}
