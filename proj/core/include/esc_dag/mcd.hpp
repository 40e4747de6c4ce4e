#pragma once

#include <optional>

#include <Eigen/Dense>

namespace esc_dag {

/// Modified Cholesky parameterization Omega = (I - A)^T D^-1 (I - A): a
/// strictly lower-triangular factor A and positive conditional variances D.
struct CholeskyModel {
  Eigen::MatrixXd factor;     // A, p x p, strictly lower triangular
  Eigen::VectorXd variances;  // D diagonal, length p

  Eigen::Index dim() const noexcept { return variances.size(); }

  static CholeskyModel identity(Eigen::Index p);

  /// Throws InvalidArgument when the shape, triangularity or positivity
  /// invariants fail.
  void validate() const;
};

Eigen::MatrixXd compose(const CholeskyModel& model);

/// Unique (A, D) of a symmetric positive definite precision matrix, computed
/// by an unpivoted LDL^T in reverse variable order. Recovered entries of A
/// below 1e-12 * max|A| are snapped to zero. Throws NotPositiveDefinite.
CholeskyModel decompose(const Eigen::MatrixXd& omega);

enum class MatrixNorm { Spectral, L1, Linf, Frobenius };

double matrix_norm(const Eigen::MatrixXd& m, MatrixNorm kind);

/// Diagnostics of a ground-truth model against the parameter-class conditions
/// (bounded eigenvalues, row/column sparsity, beta-min).
struct ConditionReport {
  double eig_min = 0.0;
  double eig_max = 0.0;
  int s0_row = 0;
  int s0_col = 0;
  double min_nonzero_sq = 0.0;  // +inf when A has no nonzero entry
  double beta_min_threshold = 0.0;
  bool passes_A1 = false;
  bool passes_A2 = false;
  bool passes_A3 = false;
  bool passes_A4 = false;
};

/// `s0` is the sparsity bound for the row/column checks; when absent the
/// observed maxima are used, so A2 and A4 pass trivially.
ConditionReport check_conditions(const CholeskyModel& truth, double eps0, double alpha, double c_bm,
                                 int n, std::optional<int> s0 = std::nullopt);

/// 16 / (alpha (1 - alpha) eps0^2 (1 - 2 eps0)^2) * c_bm * log(p) / n
double beta_min_threshold(double eps0, double alpha, double c_bm, int p, int n);

}  // namespace esc_dag
