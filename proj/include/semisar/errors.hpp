#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace semisar {

/// Input or configuration outside the documented domain. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy answer. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditionedError : public NumericalError {
 public:
  explicit IllConditionedError(double cond)
      : NumericalError("design matrix ill-conditioned (cond=" + std::to_string(cond) + ")"),
        cond_(cond) {}
  double cond() const noexcept { return cond_; }

 private:
  double cond_;
};

class EmptyNeighborhoodError : public NumericalError {
 public:
  explicit EmptyNeighborhoodError(long row)
      : NumericalError("empty neighborhood at site " + std::to_string(row)), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

}  // namespace semisar
