#include "fcgrad/harness/results.hpp"

#include <charconv>

#include "fcgrad/common/csv.hpp"
#include "fcgrad/common/error.hpp"

namespace fcg::harness {

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "run_id",          "env",          "method",        "beta",
      "seed",            "update",       "env_steps",     "agent_id",
      "episodic_return", "mean",         "geomean",       "min",
      "gini",            "jain",         "conflict_rate", "branch_blend",
      "branch_proj_ind", "branch_proj_col"};
  return cols;
}

void write_results(const std::vector<ResultRow>& rows, const std::string& path) {
  csv::Writer w(path);
  w.row(result_columns());
  for (const auto& r : rows) {
    w.row({r.run_id, r.env, r.method, csv::format(r.beta), csv::format(r.seed),
           csv::format(r.update), csv::format(r.env_steps),
           csv::format(r.agent_id), csv::format(r.episodic_return),
           csv::format(r.mean), csv::format(r.geomean), csv::format(r.min),
           csv::format(r.gini), csv::format(r.jain),
           csv::format(r.conflict_rate), csv::format(r.branch_blend),
           csv::format(r.branch_proj_ind), csv::format(r.branch_proj_col)});
  }
  w.close();
}

std::vector<ResultRow> read_results(const std::string& path) {
  const csv::Table t = csv::read(path);
  std::vector<std::size_t> col;
  for (const auto& name : result_columns()) {
    try {
      col.push_back(t.column(name));
    } catch (const Error&) {
      throw Error(ErrorCode::Io, path + ": missing column '" + name + "'");
    }
  }
  std::vector<ResultRow> out;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    const std::size_t line = t.lines[k];
    auto num = [&](std::size_t c) {
      return csv::to_double(row[col[c]], path, line, result_columns()[c]);
    };
    auto whole = [&](std::size_t c) {
      const std::string& f = row[col[c]];
      std::uint64_t x = 0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), x);
      require(!f.empty() && res.ec == std::errc() &&
                  res.ptr == f.data() + f.size(),
              path + ":" + std::to_string(line) + ": column '" +
                  result_columns()[c] + "' is not a nonnegative integer",
              ErrorCode::Io);
      return x;
    };
    ResultRow r;
    r.run_id = row[col[0]];
    r.env = row[col[1]];
    r.method = row[col[2]];
    r.beta = num(3);
    r.seed = whole(4);
    r.update = whole(5);
    r.env_steps = whole(6);
    r.agent_id = whole(7);
    r.episodic_return = num(8);
    r.mean = num(9);
    r.geomean = num(10);
    r.min = num(11);
    r.gini = num(12);
    r.jain = num(13);
    r.conflict_rate = num(14);
    r.branch_blend = num(15);
    r.branch_proj_ind = num(16);
    r.branch_proj_col = num(17);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fcg::harness
