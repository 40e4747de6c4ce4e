#include "esc_dag/mcd.hpp"

#include <cmath>
#include <limits>

#include "esc_dag/errors.hpp"

namespace esc_dag {

CholeskyModel CholeskyModel::identity(Eigen::Index p) {
  return {Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Ones(p)};
}

void CholeskyModel::validate() const {
  const Eigen::Index p = variances.size();
  if (factor.rows() != p || factor.cols() != p) throw InvalidArgument("factor shape does not match variances");
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(variances(i) > 0.0) || !std::isfinite(variances(i))) {
      throw InvalidArgument("conditional variances must be positive and finite");
    }
    for (Eigen::Index j = i; j < p; ++j) {
      if (factor(i, j) != 0.0) throw InvalidArgument("factor must be strictly lower triangular");
    }
  }
  if (!factor.allFinite()) throw InvalidArgument("factor has non-finite entries");
}

Eigen::MatrixXd compose(const CholeskyModel& model) {
  const Eigen::Index p = model.dim();
  const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(p, p) - model.factor;
  const Eigen::MatrixXd omega = unit.transpose() * model.variances.cwiseInverse().asDiagonal() * unit;
  return 0.5 * (omega + omega.transpose());
}

CholeskyModel decompose(const Eigen::MatrixXd& omega) {
  const Eigen::Index p = omega.rows();
  if (omega.cols() != p || p == 0) throw InvalidArgument("precision matrix must be square and nonempty");

  // With U = I - A unit lower triangular, Omega_il = U_li / d_l +
  // sum_{k>l} U_ki U_kl / d_k for i < l, and 1/d_l = Omega_ll - sum_{k>l} U_kl^2 / d_k.
  Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd inv_d(p);
  for (Eigen::Index l = p - 1; l >= 0; --l) {
    double pivot = omega(l, l);
    for (Eigen::Index k = l + 1; k < p; ++k) pivot -= unit(k, l) * unit(k, l) * inv_d(k);
    if (!(pivot > 0.0)) throw NotPositiveDefinite("non-positive pivot at index " + std::to_string(l));
    inv_d(l) = pivot;
    for (Eigen::Index i = 0; i < l; ++i) {
      double s = omega(i, l);
      for (Eigen::Index k = l + 1; k < p; ++k) s -= unit(k, i) * unit(k, l) * inv_d(k);
      unit(l, i) = s / pivot;
    }
  }

  CholeskyModel model{Eigen::MatrixXd::Identity(p, p) - unit, inv_d.cwiseInverse()};
  model.factor.diagonal().setZero();
  const double cutoff = 1e-12 * model.factor.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index l = 0; l < p; ++l) {
      if (l >= j || std::abs(model.factor(j, l)) < cutoff) model.factor(j, l) = 0.0;
    }
  }
  return model;
}

double matrix_norm(const Eigen::MatrixXd& m, MatrixNorm kind) {
  if (m.size() == 0) return 0.0;
  switch (kind) {
    case MatrixNorm::Spectral:
      return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    case MatrixNorm::L1:
      return m.cwiseAbs().colwise().sum().maxCoeff();
    case MatrixNorm::Linf:
      return m.cwiseAbs().rowwise().sum().maxCoeff();
    case MatrixNorm::Frobenius:
      return m.norm();
  }
  return 0.0;
}

double beta_min_threshold(double eps0, double alpha, double c_bm, int p, int n) {
  const double shrink = 1.0 - 2.0 * eps0;
  return 16.0 / (alpha * (1.0 - alpha) * eps0 * eps0 * shrink * shrink) * c_bm *
         std::log(static_cast<double>(p)) / static_cast<double>(n);
}

ConditionReport check_conditions(const CholeskyModel& truth, double eps0, double alpha, double c_bm,
                                 int n, std::optional<int> s0) {
  if (!(eps0 > 0.0 && eps0 < 0.5)) throw InvalidArgument("eps0 must lie in (0, 1/2)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  truth.validate();

  ConditionReport report;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(compose(truth), Eigen::EigenvaluesOnly);
  report.eig_min = eig.eigenvalues().minCoeff();
  report.eig_max = eig.eigenvalues().maxCoeff();

  const auto nonzero = (truth.factor.array() != 0.0).cast<int>();
  report.s0_row = nonzero.rowwise().sum().maxCoeff();
  report.s0_col = nonzero.colwise().sum().maxCoeff();

  report.min_nonzero_sq = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < truth.factor.size(); ++i) {
    const double v = truth.factor.data()[i];
    if (v != 0.0) report.min_nonzero_sq = std::min(report.min_nonzero_sq, v * v);
  }
  report.beta_min_threshold =
      beta_min_threshold(eps0, alpha, c_bm, static_cast<int>(truth.dim()), n);

  const int bound = s0.value_or(std::max(report.s0_row, report.s0_col));
  report.passes_A1 = eps0 <= report.eig_min && report.eig_max <= 1.0 / eps0;
  report.passes_A2 = report.s0_row <= bound;
  report.passes_A3 = report.min_nonzero_sq >= report.beta_min_threshold;
  report.passes_A4 = report.s0_col <= bound;
  return report;
}

}  // namespace esc_dag
