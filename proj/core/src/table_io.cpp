#include "alignlab/table_io.hpp"

#include "alignlab/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace alignlab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view field, const std::string& where) {
  field = trim(field);
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty())
    fail(ErrorKind::format, where + ": not a real number: '" + std::string(field) + "'");
  return value;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in, const std::string& source_name) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (seen_data || seen_header)
        fail(ErrorKind::format, source_name + ":" + std::to_string(line_no) +
                                    ": only a single leading '#' header line is allowed");
      seen_header = true;
      continue;
    }
    seen_data = true;
    Index width = 0;
    std::size_t start = 0;
    const std::string where = source_name + ":" + std::to_string(line_no);
    while (true) {
      std::size_t comma = view.find(',', start);
      values.push_back(parse_real(view.substr(start, comma - start), where));
      ++width;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) cols = width;
    if (width != cols)
      fail(ErrorKind::format, where + ": expected " + std::to_string(cols) + " columns, found " +
                                  std::to_string(width));
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::format, source_name + ": no data rows");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return read_matrix_csv(in, path.string());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::string& header) {
  if (!header.empty()) out << '#' << header << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& header) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  write_matrix_csv(out, m, header);
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace alignlab
