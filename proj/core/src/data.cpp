#include "esc_dag/data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esc_dag/errors.hpp"

namespace esc_dag {

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw InvalidArgument("data matrix needs n >= 2 and p >= 2, got " +
                          std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
  }
  if (!values_.allFinite()) throw InvalidArgument("data matrix has non-finite entries");
}

DataMatrix DataMatrix::scaled(double factor) const {
  return DataMatrix(values_ * factor);
}

DataMatrix DataMatrix::standardized() const {
  Eigen::MatrixXd out = values_;
  const double n = static_cast<double>(out.rows());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    auto col = out.col(j);
    col.array() -= col.mean();
    const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
    if (sd > 0.0) col /= sd;
  }
  return DataMatrix(std::move(out));
}

SupportSet::SupportSet(int column, std::vector<int> indices)
    : column_(column), indices_(std::move(indices)) {
  if (column_ < 1) throw InvalidArgument("support column must be >= 1");
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw InvalidArgument("support has duplicate indices");
  }
  if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= column_)) {
    throw InvalidArgument("support index out of range for column " + std::to_string(column_));
  }
}

bool SupportSet::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

SupportSet SupportSet::with(int index) const {
  if (index < 0 || index >= column_) throw InvalidArgument("index out of range");
  SupportSet out = *this;
  auto it = std::lower_bound(out.indices_.begin(), out.indices_.end(), index);
  if (it != out.indices_.end() && *it == index) throw InvalidArgument("index already in support");
  out.indices_.insert(it, index);
  return out;
}

SupportSet SupportSet::without(int index) const {
  SupportSet out = *this;
  auto it = std::lower_bound(out.indices_.begin(), out.indices_.end(), index);
  if (it == out.indices_.end() || *it != index) throw InvalidArgument("index not in support");
  out.indices_.erase(it);
  return out;
}

std::string SupportSet::to_string() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < indices_.size(); ++i) os << (i ? "," : "") << indices_[i];
  os << "}";
  return os.str();
}

std::strong_ordering operator<=>(const SupportSet& a, const SupportSet& b) {
  if (auto c = a.column_ <=> b.column_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.indices_.begin(), a.indices_.end(),
                                                b.indices_.begin(), b.indices_.end());
}

}  // namespace esc_dag
