#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "esc_dag/data.hpp"

namespace esc_dag {

// A Cholesky pivot (squared) below this fraction of the largest diagonal Gram
// entry of the support marks the support as singular.
inline constexpr double kSingularPivotTolerance = 1e-10;

// Residual sums of squares below this fraction of ||x_j||^2 are snapped to
// zero (exact fit).
inline constexpr double kExactFitTolerance = 1e-13;

class GramKernel;

/// Cached least-squares fit of column j on a support S, carried between
/// Metropolis-Hastings steps. The triangular factor is stored in insertion
/// order; `support()` and `a_hat()` are reported in sorted index order.
class FitSummary {
 public:
  int column() const noexcept { return column_; }
  int size() const noexcept { return static_cast<int>(order_.size()); }
  SupportSet support() const;
  std::span<const int> factor_order() const noexcept { return order_; }

  /// n^-1 * residual sum of squares.
  double d_hat() const noexcept { return rss_ / n_; }
  double rss() const noexcept { return rss_; }
  /// Least-squares coefficients in sorted index order.
  Eigen::VectorXd a_hat() const;
  /// Lower-triangular L with L L^T = X_S^T X_S (rows in factor_order()).
  const Eigen::MatrixXd& gram_chol() const noexcept { return chol_; }

 private:
  friend class GramKernel;

  int column_ = 1;
  double n_ = 1.0;
  double response_sq_ = 0.0;  // ||x_j||^2
  double max_diag_ = 0.0;     // largest X_l^T X_l over the support
  double rss_ = 0.0;
  std::vector<int> order_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd proj_;  // L^-1 X_S^T x_j
};

/// Precomputes X^T X once for a data matrix and serves fresh and incremental
/// fits against it. Keeps a reference to the data, which must outlive it.
class GramKernel {
 public:
  explicit GramKernel(const DataMatrix& data);
  GramKernel(DataMatrix&&) = delete;

  const DataMatrix& data() const noexcept { return *data_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

  /// Throws SingularGram when the support's Gram matrix fails the pivot rule.
  FitSummary fit(const SupportSet& support) const;
  /// O(|S|^2) extension by one column; throws SingularGram on a dependent column.
  FitSummary add(const FitSummary& fit, int index) const;
  /// O(|S|^2) Givens downdate; falls back to a fresh factorization if the
  /// downdated factor loses positivity.
  FitSummary remove(const FitSummary& fit, int index) const;

 private:
  void finish(FitSummary& fit) const;

  const DataMatrix* data_;
  Eigen::MatrixXd gram_;
};

/// Fresh d_hat for column S.column() on S. Throws SingularGram.
double residual_variance(const DataMatrix& data, const SupportSet& support);

/// Fresh least-squares coefficients (sorted order). Throws SingularGram, and
/// InvalidArgument for an empty support.
Eigen::VectorXd least_squares(const DataMatrix& data, const SupportSet& support);

inline FitSummary update_add(const FitSummary& fit, const GramKernel& kernel, int index) {
  return kernel.add(fit, index);
}

inline FitSummary update_remove(const FitSummary& fit, const GramKernel& kernel, int index) {
  return kernel.remove(fit, index);
}

/// Lower Cholesky factor of a symmetric Gram matrix under the pivot rule above.
/// Throws SingularGram.
Eigen::MatrixXd gram_cholesky(const Eigen::MatrixXd& gram);

}  // namespace esc_dag
