#include "core/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace spls {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t end = line.find(',', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& raw, double& out) {
  const std::string tok = trim(raw);
  if (tok.empty()) return false;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool looks_numeric_row(const std::vector<std::string>& fields) {
  double tmp;
  for (const auto& f : fields)
    if (!parse_double(f, tmp)) return false;
  return true;
}

}  // namespace

CsvTable load_csv(const std::string& path, bool has_header) {
  const auto lines = split_lines(read_file(path));
  if (lines.empty()) fail(ErrorCode::parse, "empty csv file: " + path);

  CsvTable table;
  size_t first_data = 0;
  size_t width = 0;
  if (has_header) {
    auto header = split_fields(lines[0]);
    // a header row that is entirely numeric is almost certainly data
    if (looks_numeric_row(header))
      fail(ErrorCode::parse, "header expected but line 1 is numeric: " + path);
    for (auto& name : header) table.names.push_back(trim(name));
    width = header.size();
    first_data = 1;
  }
  if (first_data >= lines.size()) fail(ErrorCode::parse, "csv has a header but no data rows: " + path);
  if (width == 0) width = split_fields(lines[first_data]).size();

  const size_t rows = lines.size() - first_data;
  table.values.resize(static_cast<Index>(rows), static_cast<Index>(width));
  for (size_t r = 0; r < rows; ++r) {
    const size_t line_no = first_data + r + 1;  // 1-based, counting the header
    const auto fields = split_fields(lines[first_data + r]);
    if (fields.size() != width)
      fail(ErrorCode::parse, "csv parse error at line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()) + " (" + path + ")");
    for (size_t c = 0; c < width; ++c) {
      double v;
      if (!parse_double(fields[c], v))
        fail(ErrorCode::parse, "csv parse error at line " + std::to_string(line_no) + ", column " +
                                   std::to_string(c + 1) + ": '" + trim(fields[c]) +
                                   "' is not numeric (" + path + ")");
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }
  return table;
}

std::string csv_text(const Matrix& values, const std::vector<std::string>& names) {
  if (!names.empty() && static_cast<Index>(names.size()) != values.cols())
    fail(ErrorCode::invalid_argument, "column name count does not match matrix width");
  std::string out;
  if (!names.empty()) {
    for (size_t j = 0; j < names.size(); ++j) {
      if (j) out += ',';
      out += names[j];
    }
    out += '\n';
  }
  char buf[40];
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Matrix& values, const std::vector<std::string>& names, const std::string& path) {
  const std::string text = csv_text(values, names);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open file for writing: " + path);
  out << text;
  if (!out) fail(ErrorCode::io, "write failed: " + path);
}

std::vector<std::string> load_labels(const std::string& path) {
  auto lines = split_lines(read_file(path));
  if (lines.empty()) fail(ErrorCode::parse, "empty label file: " + path);
  for (auto& line : lines) line = trim(line);
  return lines;
}

Dataset load_dataset_csv(const std::string& x_path, const std::string& y_path, bool has_header,
                         const std::string& subjects_path) {
  Dataset data;
  auto xt = load_csv(x_path, has_header);
  auto yt = load_csv(y_path, has_header);
  data.X = std::move(xt.values);
  data.Y = std::move(yt.values);
  data.x_names = std::move(xt.names);
  data.y_names = std::move(yt.names);
  if (data.X.rows() != data.Y.rows())
    fail(ErrorCode::invalid_argument,
         "row count mismatch: " + x_path + " has " + std::to_string(data.X.rows()) + " rows, " +
             y_path + " has " + std::to_string(data.Y.rows()));
  if (!subjects_path.empty()) {
    data.subject_ids = load_labels(subjects_path);
    if (static_cast<Index>(data.subject_ids.size()) != data.X.rows())
      fail(ErrorCode::invalid_argument,
           "row count mismatch: " + subjects_path + " has " + std::to_string(data.subject_ids.size()) +
               " labels, " + x_path + " has " + std::to_string(data.X.rows()) + " rows");
  }
  validate(data);
  return data;
}

}  // namespace spls
