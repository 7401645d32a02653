#include "funoclust/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace funoclust {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

CsvTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);

  CsvTable table;
  std::string line;
  int row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (row_no == 1 && trim(line).empty()) continue;  // tolerate leading blank line
    std::vector<std::optional<double>> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (cell.empty()) {
        row.emplace_back(std::nullopt);
        continue;
      }
      errno = 0;
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw std::invalid_argument("row " + std::to_string(row_no) +
                                    ": non-numeric cell '" + cell + "' in " + path);
      row.emplace_back(v);
    }
    if (!line.empty() && line.back() == ',') row.emplace_back(std::nullopt);
    if (row.empty()) continue;  // skip blank trailing lines
    table.push_back(std::move(row));
  }
  return table;
}

Matrix read_matrix_csv(const std::string& path) {
  CsvTable table = read_numeric_csv(path);
  if (table.empty()) throw std::invalid_argument("empty csv: " + path);
  const std::size_t cols = table.front().size();
  Matrix m(static_cast<int>(table.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != cols)
      throw std::invalid_argument("row " + std::to_string(r + 1) + ": ragged row in " + path);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!table[r][c].has_value())
        throw std::invalid_argument("row " + std::to_string(r + 1) + ": missing cell in " +
                                    path);
      m(static_cast<int>(r), static_cast<int>(c)) = *table[r][c];
    }
  }
  return m;
}

void write_text_atomic(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << body;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + tmp + " -> " + path +
                             " (" + std::strerror(errno) + ")");
}

namespace {

void append_row(std::string& body, const double* values, int count) {
  for (int c = 0; c < count; ++c) {
    if (c > 0) body += ',';
    body += format_number(values[c]);
  }
  body += '\n';
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& values) {
  std::string body;
  body.reserve(static_cast<std::size_t>(values.size()) * 16);
  std::vector<double> row(values.cols());
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c) row[c] = values(r, c);
    append_row(body, row.data(), static_cast<int>(row.size()));
  }
  write_text_atomic(path, body);
}

void write_curves_csv(const std::string& path, const CurveSet& curves) {
  std::string body;
  body.reserve(static_cast<std::size_t>((curves.n_curves() + 1) * curves.n_points()) * 16);
  append_row(body, curves.grid.points.data(), curves.grid.size());
  std::vector<double> row(curves.n_points());
  for (int r = 0; r < curves.n_curves(); ++r) {
    for (int c = 0; c < curves.n_points(); ++c) row[c] = curves.values(r, c);
    append_row(body, row.data(), static_cast<int>(row.size()));
  }
  write_text_atomic(path, body);
}

}  // namespace funoclust
