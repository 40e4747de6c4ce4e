#include "esc_dag_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace esc_dag::cli {

namespace fs = std::filesystem;

CsvError::CsvError(const fs::path& path, long line, const std::string& what)
    : Error(path.string() + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const fs::path& path, long line, std::size_t column) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw CsvError(path, line, "non-numeric cell '" + cell + "' in column " + std::to_string(column + 1));
  }
  if (!std::isfinite(value)) {
    throw CsvError(path, line, "non-finite cell '" + cell + "' in column " + std::to_string(column + 1));
  }
  return value;
}

void check_index(double value, int lo, int hi, const fs::path& path, long line) {
  if (value != std::floor(value) || value < lo || value > hi) {
    throw CsvError(path, line, "index " + format_real(value) + " outside [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");
  }
}

}  // namespace

std::vector<NumericRow> read_numeric_rows(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<NumericRow> rows;
  std::string text;
  long line = 0;
  std::size_t width = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    if (line == 1 && !header.empty()) {
      if (trim(text) != header) throw CsvError(path, line, "expected header '" + header + "'");
      continue;
    }
    std::vector<double> row;
    std::stringstream cells(text);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(parse_cell(cell, path, line, row.size()));
    if (!text.empty() && text.back() == ',') row.push_back(parse_cell("", path, line, row.size()));
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw CsvError(path, line,
                     "row has " + std::to_string(row.size()) + " fields, expected " + std::to_string(width));
    }
    rows.push_back({line, std::move(row)});
  }
  if (line == 0 && !header.empty()) throw CsvError(path, 1, "missing header '" + header + "'");
  return rows;
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  const auto rows = read_numeric_rows(path);
  if (rows.empty()) throw CsvError(path, 1, "no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().cells.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].cells.size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i].cells[k];
    }
  }
  return m;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) out << ',';
      out << format_real(m(i, k));
    }
    out << '\n';
  }
}

void write_triplets(const fs::path& path, const Eigen::MatrixXd& m, const std::string& value_name, bool all_pairs) {
  std::ofstream out = open_out(path);
  out << "j,l," << value_name << '\n';
  for (Eigen::Index j = 1; j < m.rows(); ++j) {
    for (Eigen::Index l = 0; l < j; ++l) {
      if (all_pairs || m(j, l) != 0.0) out << j + 1 << ',' << l + 1 << ',' << format_real(m(j, l)) << '\n';
    }
  }
}

Eigen::MatrixXd read_triplets(const fs::path& path, const std::string& value_name, int p) {
  const auto rows = read_numeric_rows(path, "j,l," + value_name);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [line, row] : rows) {
    if (row.size() != 3) throw CsvError(path, line, "expected 3 fields");
    check_index(row[0], 2, p, path, line);
    check_index(row[1], 1, static_cast<int>(row[0]) - 1, path, line);
    m(static_cast<Eigen::Index>(row[0]) - 1, static_cast<Eigen::Index>(row[1]) - 1) = row[2];
  }
  return m;
}

void write_vector_csv(const fs::path& path, const Eigen::VectorXd& v, const std::string& value_name) {
  std::ofstream out = open_out(path);
  out << "j," << value_name << '\n';
  for (Eigen::Index j = 0; j < v.size(); ++j) out << j + 1 << ',' << format_real(v(j)) << '\n';
}

Eigen::VectorXd read_vector_csv(const fs::path& path, const std::string& value_name) {
  const auto rows = read_numeric_rows(path, "j," + value_name);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [line, row] = rows[i];
    if (row.size() != 2) throw CsvError(path, line, "expected 2 fields");
    check_index(row[0], static_cast<int>(i) + 1, static_cast<int>(i) + 1, path, line);
    v(static_cast<Eigen::Index>(i)) = row[1];
  }
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace esc_dag::cli
