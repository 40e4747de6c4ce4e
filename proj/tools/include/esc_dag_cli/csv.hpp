#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esc_dag/errors.hpp"

namespace esc_dag::cli {

/// Malformed input file; the message carries the path and line number.
class CsvError : public Error {
 public:
  CsvError(const std::filesystem::path& path, long line, const std::string& what);
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// Shortest text that reads back to the same binary64 value (17 significant digits).
std::string format_real(double value);

struct NumericRow {
  long line = 0;  // one-based line in the file
  std::vector<double> cells;
};

/// Rows of numeric cells; blank lines are skipped. A first line equal to `header` is skipped; when
/// `header` is nonempty it is required.
std::vector<NumericRow> read_numeric_rows(const std::filesystem::path& path, const std::string& header = "");

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// One-based (j, l, value) rows for the nonzero strictly-lower entries, or for
/// every strictly-lower entry when `all_pairs` is set.
void write_triplets(const std::filesystem::path& path, const Eigen::MatrixXd& m, const std::string& value_name,
                    bool all_pairs);
/// p x p matrix from a triplet file; entries must satisfy 1 <= l < j <= p.
Eigen::MatrixXd read_triplets(const std::filesystem::path& path, const std::string& value_name, int p);

/// One-based (j, value) rows.
void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v, const std::string& value_name);
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path, const std::string& value_name);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace esc_dag::cli
