#pragma once

#include <stdexcept>
#include <string>

namespace esc_dag {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gram matrix of a support is numerically rank deficient.
class SingularGram : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidInit : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A per-column chain failed inside fit_dag; carries the column index.
class ColumnFailure : public Error {
 public:
  ColumnFailure(int column, const std::string& what)
      : Error("column " + std::to_string(column) + ": " + what), column_(column) {}

  int column() const noexcept { return column_; }

 private:
  int column_;
};

}  // namespace esc_dag
