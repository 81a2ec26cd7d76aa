#include "fcgrad/common/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "fcgrad/common/error.hpp"

namespace fcg::csv {

std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format(std::int64_t x) { return std::to_string(x); }
std::string format(std::uint64_t x) { return std::to_string(x); }

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

Writer::Writer(const std::string& path) : path_(path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  require(out_.is_open(), "cannot open " + path + " for writing", ErrorCode::Io);
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape(fields[i]);
  }
  out_ << '\n';
  require(out_.good(), "write failed on " + path_, ErrorCode::Io);
}

void Writer::close() {
  out_.close();
  require(!out_.fail(), "close failed on " + path_, ErrorCode::Io);
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::Io, "missing column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_line(std::string_view line,
                                    const std::string& source,
                                    std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  require(!quoted, source + ":" + std::to_string(lineno) + ": unterminated quote",
          ErrorCode::Io);
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

Table parse(std::string_view text, const std::string& source) {
  Table t;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto fields = split_line(line, source, lineno);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    require(fields.size() == t.header.size(),
            source + ":" + std::to_string(lineno) + ": expected " +
                std::to_string(t.header.size()) + " fields, found " +
                std::to_string(fields.size()),
            ErrorCode::Io);
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  require(have_header, source + ": empty file, no header row", ErrorCode::Io);
  return t;
}

Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), "cannot open " + path, ErrorCode::Io);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

double to_double(const std::string& field, const std::string& source,
                 std::size_t line, std::string_view column) {
  if (field == "nan") return std::nan("");
  if (field == "inf") return INFINITY;
  if (field == "-inf") return -INFINITY;
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  require(res.ec == std::errc() && res.ptr == field.data() + field.size(),
          source + ":" + std::to_string(line) + ": column '" +
              std::string(column) + "' is not a number: '" + field + "'",
          ErrorCode::Io);
  return v;
}

}  // namespace fcg::csv
