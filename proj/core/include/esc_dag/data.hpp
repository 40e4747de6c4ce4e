#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace esc_dag {

/// n x p observation matrix. Rows are observations, column j is the response
/// of the j-th autoregression and columns 0..j-1 are its candidate predictors.
/// Immutable after construction; safe to share between threads.
class DataMatrix {
 public:
  /// Throws InvalidArgument unless n >= 2, p >= 2 and every entry is finite.
  explicit DataMatrix(Eigen::MatrixXd values);

  Eigen::Index n() const noexcept { return values_.rows(); }
  Eigen::Index p() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  auto column(Eigen::Index j) const { return values_.col(j); }

  DataMatrix scaled(double factor) const;
  /// Columns centered and scaled to unit sample variance.
  DataMatrix standardized() const;

 private:
  Eigen::MatrixXd values_;
};

/// Support of one row of the Cholesky factor: a sorted set of predictor
/// indices, all smaller than `column`. Indices are zero-based.
class SupportSet {
 public:
  SupportSet() = default;
  /// Sorts `indices`; throws InvalidArgument on duplicates or out-of-range
  /// entries.
  explicit SupportSet(int column, std::vector<int> indices = {});

  int column() const noexcept { return column_; }
  std::span<const int> indices() const noexcept { return indices_; }
  int size() const noexcept { return static_cast<int>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(int index) const;

  SupportSet with(int index) const;
  SupportSet without(int index) const;

  std::string to_string() const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;
  // Column first, then lexicographic on the indices.
  friend std::strong_ordering operator<=>(const SupportSet& a, const SupportSet& b);

 private:
  int column_ = 1;
  std::vector<int> indices_;
};

}  // namespace esc_dag
