#include "fcgrad/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fcgrad/agent/checkpoint.hpp"
#include "fcgrad/common/csv.hpp"
#include "fcgrad/common/error.hpp"
#include "fcgrad/common/log.hpp"

namespace fcg::harness {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir),
          "cannot create directory " + dir + (ec ? ": " + ec.message() : ""),
          ErrorCode::Io);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.is_open(), "cannot open " + path + " for writing", ErrorCode::Io);
  out << text;
  out.close();
  require(!out.fail(), "write failed on " + path, ErrorCode::Io);
}

std::string checkpoint_tag(const ExperimentConfig& cfg, std::uint64_t seed) {
  return "run_id=" + cfg.effective_run_id() + ";env=" +
         std::string(envs::env_name(cfg.env)) + ";method=" +
         std::string(agent::method_name(cfg.method)) +
         ";beta=" + csv::format(cfg.beta) + ";seed=" + csv::format(seed) +
         ";update=" + csv::format(std::uint64_t(cfg.total_updates));
}

std::string tag_field(const std::string& tag, const std::string& key) {
  std::istringstream in(tag);
  std::string part;
  while (std::getline(in, part, ';')) {
    const auto eq = part.find('=');
    if (eq != std::string::npos && part.substr(0, eq) == key)
      return part.substr(eq + 1);
  }
  return {};
}

std::string beta_dir_name(double beta) { return "beta-" + csv::format(beta); }

}  // namespace

std::vector<ResultRow> final_rows(const std::vector<SeedRun>& runs) {
  std::vector<ResultRow> out;
  for (const auto& run : runs) {
    if (run.rows.empty()) continue;
    const std::uint64_t last = run.rows.back().update;
    for (const auto& r : run.rows)
      if (r.update == last && r.agent_id == 0) {
        out.push_back(r);
        break;
      }
  }
  return out;
}

testbed::SuiteReport cmd_verify(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  ensure_dir(out_dir);
  testbed::SuiteReport report = testbed::run_suite(cfg.suite);
  for (const auto& w : report.warnings) log::info("warning: " + w);
  testbed::write_suite_csv(report, join(out_dir, "verify.csv"));
  std::size_t failed = 0, skipped = 0;
  for (const auto& r : report.records) {
    if (r.skipped) ++skipped;
    else if (r.expected_pass && !r.passed) ++failed;
  }
  log::info("verify: " + std::to_string(report.records.size()) + " checks, " +
            std::to_string(failed) + " unexpected failures, " +
            std::to_string(skipped) + " skipped; negative control " +
            (report.negative_control_ok ? "ok" : "NOT ok") + " (" +
            std::to_string(report.negative_control_failures) +
            " instances failed under Weighted)");
  return report;
}

std::vector<SeedRun> cmd_train(const ExperimentConfig& cfg,
                               const std::string& out_dir) {
  ensure_dir(out_dir);
  write_text(join(out_dir, "config.resolved.txt"), cfg.dump());
  std::vector<SeedRun> runs = train_all(cfg);
  std::vector<ResultRow> rows;
  for (const auto& run : runs) rows.insert(rows.end(), run.rows.begin(), run.rows.end());
  write_results(rows, join(out_dir, "results.csv"));
  if (cfg.save_checkpoints && cfg.total_updates > 0) {
    const std::string dir = join(out_dir, "checkpoints");
    ensure_dir(dir);
    for (std::size_t k = 0; k < runs.size(); ++k) {
      agent::Checkpoint ck;
      ck.tag = checkpoint_tag(cfg, cfg.seeds[k]);
      ck.agents = runs[k].agents;
      agent::save_checkpoint(
          ck, join(dir, cfg.effective_run_id() + "-seed" +
                            std::to_string(cfg.seeds[k]) + ".ckpt"));
    }
  }
  return runs;
}

EvalOutcome cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint,
                     std::size_t episodes, std::uint64_t seed,
                     const std::string& out_dir) {
  require(episodes >= 1, "eval needs at least one episode", ErrorCode::Config);
  const agent::Checkpoint ck = agent::load_checkpoint(checkpoint);
  auto probe = envs::make_env(cfg.env, cfg.env_cfg);
  require(ck.agents.size() == probe->num_agents(),
          "incompatible checkpoint: " + std::to_string(ck.agents.size()) +
              " agents stored, environment has " +
              std::to_string(probe->num_agents()),
          ErrorCode::Config);
  for (const auto& a : ck.agents)
    require(a.net.shape().obs_dim == probe->obs_dim() &&
                a.net.shape().actions == std::size_t(probe->num_actions()),
            "incompatible checkpoint: network shape does not match the "
            "environment",
            ErrorCode::Config);

  EvalOutcome out;
  out.result = evaluate(cfg, ck.agents, episodes, seed);
  ensure_dir(out_dir);

  std::uint64_t update = 0;
  const std::string u = tag_field(ck.tag, "update");
  if (!u.empty()) update = std::strtoull(u.c_str(), nullptr, 10);
  std::string run_id = tag_field(ck.tag, "run_id");
  if (run_id.empty()) run_id = cfg.effective_run_id();
  const auto& rep = out.result.report;
  for (std::size_t i = 0; i < rep.per_agent_returns.size(); ++i) {
    ResultRow r;
    r.run_id = run_id;
    r.env = std::string(envs::env_name(cfg.env));
    r.method = std::string(agent::method_name(cfg.method));
    r.beta = cfg.beta;
    r.seed = seed;
    r.update = update;
    r.env_steps = update * cfg.num_envs * cfg.rollout_length;
    r.agent_id = i;
    r.episodic_return = rep.per_agent_returns[i];
    r.mean = rep.mean;
    r.geomean = rep.geomean;
    r.min = rep.min;
    r.gini = rep.gini;
    r.jain = rep.jain;
    out.rows.push_back(std::move(r));
  }
  write_results(out.rows, join(out_dir, "eval.csv"));

  csv::Writer ev(join(out_dir, "events.csv"));
  ev.row({"agent_id", "episodes", "episodic_return", "apples", "coins_own",
          "coins_other", "waste_cleaned"});
  for (std::size_t i = 0; i < rep.per_agent_returns.size(); ++i)
    ev.row({csv::format(std::uint64_t(i)),
            csv::format(std::uint64_t(out.result.episodes)),
            csv::format(rep.per_agent_returns[i]),
            csv::format(out.result.apples[i]),
            csv::format(out.result.coins_own[i]),
            csv::format(out.result.coins_other[i]),
            csv::format(out.result.waste_cleaned[i])});
  ev.close();
  return out;
}

std::vector<SweepPoint> cmd_sweep_beta(const ExperimentConfig& cfg,
                                       const std::vector<double>& betas,
                                       const std::string& out_dir) {
  require(!betas.empty(), "sweep needs at least one beta value",
          ErrorCode::Config);
  for (double b : betas)
    require(b >= 0.0 && b <= 1.0, "beta must lie in [0, 1]", ErrorCode::Config);
  ensure_dir(out_dir);
  std::vector<SweepPoint> points;
  for (double b : betas) {
    ExperimentConfig c = cfg;
    c.beta = b;
    c.explicit_keys.insert("beta");
    c.run_id.clear();
    const auto runs = cmd_train(c, join(out_dir, beta_dir_name(b)));
    SweepPoint p;
    p.beta = b;
    for (const auto& r : final_rows(runs)) p.final_geomean.push_back(r.geomean);
    if (!p.final_geomean.empty()) {
      double s = 0.0;
      for (double g : p.final_geomean) s += g;
      p.mean = s / double(p.final_geomean.size());
      p.min = *std::min_element(p.final_geomean.begin(), p.final_geomean.end());
      p.max = *std::max_element(p.final_geomean.begin(), p.final_geomean.end());
    }
    points.push_back(std::move(p));
  }
  csv::Writer w(join(out_dir, "sweep.csv"));
  w.row({"beta", "seeds", "geomean_mean", "geomean_min", "geomean_max"});
  for (const auto& p : points)
    w.row({csv::format(p.beta), csv::format(std::uint64_t(p.final_geomean.size())),
           csv::format(p.mean), csv::format(p.min), csv::format(p.max)});
  w.close();
  return points;
}

// ---- plotting ----

namespace {

struct Band {
  double x = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct Series {
  std::string label;
  std::vector<Band> points;
};

double metric_of(const ResultRow& r, const std::string& m) {
  if (m == "mean") return r.mean;
  if (m == "geomean") return r.geomean;
  if (m == "min") return r.min;
  if (m == "gini") return r.gini;
  if (m == "jain") return r.jain;
  return r.conflict_rate;
}

std::vector<Series> build_series(const std::vector<ResultRow>& rows,
                                 const std::string& metric) {
  // label -> env_steps -> values across seeds
  std::map<std::string, std::map<std::uint64_t, std::vector<double>>> acc;
  for (const auto& r : rows) {
    if (r.agent_id != 0) continue;
    const std::string label =
        r.env + "/" + r.method + "/b" + csv::format(r.beta);
    acc[label][r.env_steps].push_back(metric_of(r, metric));
  }
  std::vector<Series> out;
  for (const auto& [label, by_x] : acc) {
    Series s;
    s.label = label;
    for (const auto& [x, vals] : by_x) {
      Band b;
      b.x = double(x);
      double sum = 0.0;
      for (double v : vals) sum += v;
      b.mean = sum / double(vals.size());
      b.lo = *std::min_element(vals.begin(), vals.end());
      b.hi = *std::max_element(vals.begin(), vals.end());
      s.points.push_back(b);
    }
    out.push_back(std::move(s));
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

bool finite_band(const Band& b) {
  return std::isfinite(b.mean) && std::isfinite(b.lo) && std::isfinite(b.hi);
}

// One panel at (ox, oy) of size w x h.
void draw_panel(std::ostringstream& svg, const std::vector<Series>& series,
                const std::string& title, double ox, double oy, double w,
                double h) {
  const double ml = 60, mr = 15, mt = 28, mb = 40;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (const auto& b : s.points) {
      if (!finite_band(b)) continue;
      x0 = std::min(x0, b.x);
      x1 = std::max(x1, b.x);
      y0 = std::min(y0, b.lo);
      y1 = std::max(y1, b.hi);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return ox + ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return oy + mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  svg << "<text x=\"" << num(ox + ml + pw / 2) << "\" y=\"" << num(oy + 18)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  svg << "<rect x=\"" << num(ox + ml) << "\" y=\"" << num(oy + mt) << "\" width=\""
      << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double xv = x0 + (x1 - x0) * k / 4.0;
    svg << "<text x=\"" << num(ox + ml - 5) << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\" font-size=\"10\">" << num(yv) << "</text>\n";
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(oy + mt + ph + 14)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << num(xv) << "</text>\n";
  }
  svg << "<text x=\"" << num(ox + ml + pw / 2) << "\" y=\"" << num(oy + h - 8)
      << "\" text-anchor=\"middle\" font-size=\"11\">env steps</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::vector<Band> pts;
    for (const auto& b : s.points)
      if (finite_band(b)) pts.push_back(b);
    if (pts.empty()) continue;
    if (pts.size() > 1) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (const auto& b : pts) svg << num(px(b.x)) << ',' << num(py(b.hi)) << ' ';
      for (auto it = pts.rbegin(); it != pts.rend(); ++it)
        svg << num(px(it->x)) << ',' << num(py(it->lo)) << ' ';
      svg << "\"/>\n";
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\" points=\"";
      for (const auto& b : pts) svg << num(px(b.x)) << ',' << num(py(b.mean)) << ' ';
      svg << "\"/>\n";
    }
    for (const auto& b : pts) {
      if (b.hi > b.lo)
        svg << "<line x1=\"" << num(px(b.x)) << "\" y1=\"" << num(py(b.lo))
            << "\" x2=\"" << num(px(b.x)) << "\" y2=\"" << num(py(b.hi))
            << "\" stroke=\"" << color << "\" stroke-opacity=\"0.5\"/>\n";
      svg << "<circle cx=\"" << num(px(b.x)) << "\" cy=\"" << num(py(b.mean))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = oy + mt + 14 + 14 * double(k);
    svg << "<rect x=\"" << num(ox + ml + 8) << "\" y=\"" << num(ly - 9)
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << num(ox + ml + 22) << "\" y=\"" << num(ly)
        << "\" font-size=\"10\">" << s.label << "</text>\n";
  }
}

std::string svg_open(double w, double h) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w)
    << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h)
    << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return s.str();
}

}  // namespace

std::vector<std::string> cmd_plot(const std::vector<std::string>& csv_paths,
                                  const std::string& out_dir) {
  require(!csv_paths.empty(), "plot needs at least one CSV file",
          ErrorCode::Config);
  std::vector<ResultRow> rows;
  for (const auto& p : csv_paths) {
    auto r = read_results(p);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  ensure_dir(out_dir);
  std::vector<std::string> written;
  const std::vector<std::pair<std::string, std::string>> metrics{
      {"mean", "Mean return"}, {"geomean", "GeoMean"},   {"min", "Min return"},
      {"gini", "Gini"},        {"jain", "Jain index"}, {"conflict_rate", "Conflict rate"}};
  for (const auto& [key, title] : metrics) {
    std::ostringstream svg;
    svg << svg_open(640, 400);
    draw_panel(svg, build_series(rows, key), title, 0, 0, 640, 400);
    svg << "</svg>\n";
    const std::string path = join(out_dir, key + ".svg");
    write_text(path, svg.str());
    written.push_back(path);
  }
  std::ostringstream svg;
  svg << svg_open(1500, 400);
  for (int k = 0; k < 3; ++k)
    draw_panel(svg, build_series(rows, metrics[std::size_t(k)].first),
               metrics[std::size_t(k)].second, 500.0 * k, 0, 500, 400);
  svg << "</svg>\n";
  const std::string path = join(out_dir, "overview.svg");
  write_text(path, svg.str());
  written.push_back(path);
  return written;
}

}  // namespace fcg::harness
