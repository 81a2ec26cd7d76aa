#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace fcg::csv {

// Shortest decimal form that round-trips to the same double.
std::string format(double x);
std::string format(std::int64_t x);
std::string format(std::uint64_t x);
inline std::string format(int x) { return format(static_cast<std::int64_t>(x)); }
inline std::string format(bool b) { return b ? "1" : "0"; }

// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

// UTF-8, LF line endings. Throws fcg::Error(Io) on open or write failure.
class Writer {
 public:
  explicit Writer(const std::string& path);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line of each row.
  std::vector<std::size_t> lines;

  // Index of a named column; throws a parse error naming the column when
  // absent.
  std::size_t column(std::string_view name) const;
};

// Parses a CSV file with a header row. Rows whose field count differs from
// the header raise fcg::Error(Io) with the offending line number.
Table read(const std::string& path);
Table parse(std::string_view text, const std::string& source = "<memory>");

double to_double(const std::string& field, const std::string& source,
                 std::size_t line, std::string_view column);

}  // namespace fcg::csv
