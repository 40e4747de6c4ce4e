#include "esc_dag/gram_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "esc_dag/errors.hpp"

namespace esc_dag {
namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& x, std::span<const int> cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  return out;
}

void check_index(int column, int index) {
  if (index < 0 || index >= column) {
    throw InvalidArgument("predictor index " + std::to_string(index) + " out of range for column " +
                          std::to_string(column));
  }
}

}  // namespace

Eigen::MatrixXd gram_cholesky(const Eigen::MatrixXd& gram) {
  const Eigen::Index k = gram.rows();
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(k, k);
  if (k == 0) return chol;
  const double max_diag = gram.diagonal().maxCoeff();
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index r = c; r < k; ++r) {
      double s = gram(r, c);
      for (Eigen::Index m = 0; m < c; ++m) s -= chol(r, m) * chol(c, m);
      if (r == c) {
        if (!(s >= kSingularPivotTolerance * max_diag) || !(max_diag > 0.0)) {
          throw SingularGram("Gram pivot " + std::to_string(s) + " below tolerance");
        }
        chol(c, c) = std::sqrt(s);
      } else {
        chol(r, c) = s / chol(c, c);
      }
    }
  }
  return chol;
}

SupportSet FitSummary::support() const {
  return SupportSet(column_, order_);
}

Eigen::VectorXd FitSummary::a_hat() const {
  const Eigen::Index k = size();
  Eigen::VectorXd coef = chol_.triangularView<Eigen::Lower>().transpose().solve(proj_);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) { return order_[a] < order_[b]; });
  Eigen::VectorXd sorted(k);
  for (Eigen::Index i = 0; i < k; ++i) sorted(i) = coef(perm[static_cast<std::size_t>(i)]);
  return sorted;
}

GramKernel::GramKernel(const DataMatrix& data) : data_(&data) {
  gram_ = data.values().transpose() * data.values();
}

void GramKernel::finish(FitSummary& fit) const {
  double rss = fit.response_sq_ - fit.proj_.squaredNorm();
  if (rss <= kExactFitTolerance * fit.response_sq_) rss = 0.0;
  fit.rss_ = rss;
}

FitSummary GramKernel::fit(const SupportSet& support) const {
  const int j = support.column();
  if (j >= gram_.cols()) throw InvalidArgument("support column out of range");
  FitSummary out;
  out.column_ = j;
  out.n_ = static_cast<double>(data_->n());
  out.response_sq_ = gram_(j, j);
  out.order_.assign(support.indices().begin(), support.indices().end());
  const Eigen::Index k = support.size();
  Eigen::MatrixXd sub(k, k);
  Eigen::VectorXd cross(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    cross(a) = gram_(out.order_[a], j);
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = gram_(out.order_[a], out.order_[b]);
  }
  out.max_diag_ = k > 0 ? sub.diagonal().maxCoeff() : 0.0;
  out.chol_ = gram_cholesky(sub);
  out.proj_ = out.chol_.triangularView<Eigen::Lower>().solve(cross);
  finish(out);
  return out;
}

FitSummary GramKernel::add(const FitSummary& fit, int index) const {
  check_index(fit.column_, index);
  if (std::find(fit.order_.begin(), fit.order_.end(), index) != fit.order_.end()) {
    throw InvalidArgument("index already in support");
  }
  const Eigen::Index k = fit.size();
  const int j = fit.column_;

  Eigen::VectorXd w(k);
  for (Eigen::Index a = 0; a < k; ++a) w(a) = gram_(fit.order_[a], index);
  if (k > 0) fit.chol_.triangularView<Eigen::Lower>().solveInPlace(w);

  const double max_diag = std::max(fit.max_diag_, gram_(index, index));
  const double pivot = gram_(index, index) - w.squaredNorm();
  if (!(pivot >= kSingularPivotTolerance * max_diag) || !(max_diag > 0.0)) {
    throw SingularGram("column " + std::to_string(index) + " is numerically dependent on the support");
  }
  const double diag = std::sqrt(pivot);

  FitSummary out;
  out.column_ = j;
  out.n_ = fit.n_;
  out.response_sq_ = fit.response_sq_;
  out.max_diag_ = max_diag;
  out.order_ = fit.order_;
  out.order_.push_back(index);
  out.chol_.setZero(k + 1, k + 1);
  out.chol_.topLeftCorner(k, k) = fit.chol_;
  out.chol_.row(k).head(k) = w.transpose();
  out.chol_(k, k) = diag;
  out.proj_.resize(k + 1);
  out.proj_.head(k) = fit.proj_;
  out.proj_(k) = (gram_(index, j) - w.dot(fit.proj_)) / diag;
  finish(out);
  return out;
}

FitSummary GramKernel::remove(const FitSummary& fit, int index) const {
  const auto it = std::find(fit.order_.begin(), fit.order_.end(), index);
  if (it == fit.order_.end()) throw InvalidArgument("index not in support");
  const Eigen::Index pos = it - fit.order_.begin();
  const Eigen::Index k = fit.size();

  // Drop row `pos`; the rows below it gain one superdiagonal entry, which a
  // sweep of Givens rotations on adjacent columns removes again.
  Eigen::MatrixXd chol(k - 1, k);
  chol.topRows(pos) = fit.chol_.topRows(pos);
  chol.bottomRows(k - 1 - pos) = fit.chol_.bottomRows(k - 1 - pos);
  for (Eigen::Index r = pos; r < k - 1; ++r) {
    Eigen::JacobiRotation<double> rot;
    rot.makeGivens(chol(r, r), chol(r, r + 1));
    chol.applyOnTheRight(r, r + 1, rot);
    chol(r, r + 1) = 0.0;
  }

  FitSummary out;
  out.column_ = fit.column_;
  out.n_ = fit.n_;
  out.response_sq_ = fit.response_sq_;
  out.order_ = fit.order_;
  out.order_.erase(out.order_.begin() + pos);
  out.chol_ = chol.leftCols(k - 1);

  bool healthy = true;
  for (Eigen::Index r = 0; r < k - 1; ++r) {
    if (out.chol_(r, r) < 0.0) out.chol_.col(r) *= -1.0;
    if (!(out.chol_(r, r) > 0.0) || !std::isfinite(out.chol_(r, r))) healthy = false;
  }
  if (!healthy) return this->fit(out.support());

  out.max_diag_ = 0.0;
  Eigen::VectorXd cross(k - 1);
  for (Eigen::Index a = 0; a < k - 1; ++a) {
    cross(a) = gram_(out.order_[a], out.column_);
    out.max_diag_ = std::max(out.max_diag_, gram_(out.order_[a], out.order_[a]));
  }
  out.proj_ = out.chol_.triangularView<Eigen::Lower>().solve(cross);
  finish(out);
  return out;
}

double residual_variance(const DataMatrix& data, const SupportSet& support) {
  const int j = support.column();
  if (j >= data.p()) throw InvalidArgument("support column out of range");
  const auto y = data.column(j);
  const double n = static_cast<double>(data.n());
  if (support.empty()) return y.squaredNorm() / n;
  const Eigen::MatrixXd xs = gather(data.values(), support.indices());
  const Eigen::MatrixXd chol = gram_cholesky(xs.transpose() * xs);
  Eigen::VectorXd coef = xs.transpose() * y;
  chol.triangularView<Eigen::Lower>().solveInPlace(coef);
  chol.triangularView<Eigen::Lower>().transpose().solveInPlace(coef);
  const double rss = (y - xs * coef).squaredNorm();
  return rss <= kExactFitTolerance * y.squaredNorm() ? 0.0 : rss / n;
}

Eigen::VectorXd least_squares(const DataMatrix& data, const SupportSet& support) {
  if (support.empty()) throw InvalidArgument("least_squares needs a nonempty support");
  const int j = support.column();
  if (j >= data.p()) throw InvalidArgument("support column out of range");
  const Eigen::MatrixXd xs = gather(data.values(), support.indices());
  const Eigen::MatrixXd chol = gram_cholesky(xs.transpose() * xs);
  Eigen::VectorXd coef = xs.transpose() * data.column(j);
  chol.triangularView<Eigen::Lower>().solveInPlace(coef);
  chol.triangularView<Eigen::Lower>().transpose().solveInPlace(coef);
  return coef;
}

}  // namespace esc_dag
